"""Streaming algorithms for submodular b-matching, with dual certificates."""

from .certificates import (DualCertificate, FeasibilityReport, brute_force_opt, build_dual, certify,
                           check_feasibility, check_ratios, mc_expected_feasibility,
                           subsample_lemma_check)
from .generators import GenSpec, gen_random, gen_tight, write_pair
from .instance import BMatching, Edge, Instance, parse_stream, read_instance, write_instance
from .msbm import AlgoParams, RunRecord, preset, run
from .mwbm import exact_mwbm, run_mwbm
from .oracles import (CoverageOracle, CovLinOracle, LinearOracle, SubmodularOracle, TightOracle,
                      parse_oracle, read_oracle, verify_submodular, write_oracle)
from .preemptive import run_preemptive

__all__ = [
    "AlgoParams", "BMatching", "CoverageOracle", "CovLinOracle", "DualCertificate", "Edge",
    "FeasibilityReport", "GenSpec", "Instance", "LinearOracle", "RunRecord", "SubmodularOracle",
    "TightOracle", "brute_force_opt", "build_dual", "certify", "check_feasibility",
    "check_ratios", "exact_mwbm", "gen_random", "gen_tight", "mc_expected_feasibility",
    "parse_oracle", "parse_stream", "preset", "read_instance", "read_oracle", "run",
    "run_mwbm", "run_preemptive", "subsample_lemma_check", "verify_submodular", "write_instance",
    "write_oracle", "write_pair",
]
