"""Command-line front end: ``run``, ``gen`` and ``bench``.

Reports go to stdout, diagnostics to stderr. Exit codes: 0 when every
requested check passes, 1 for usage or I/O errors, 2 when a check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .certificates import (TooLargeError, brute_force_opt, certify, mc_expected_feasibility)
from .generators import GenSpec, gen_random, gen_tight, write_pair
from .instance import StreamFormatError, read_instance
from .msbm import AlgoParams, monotone_factor, preset, run
from .mwbm import EXACT_LIMIT, TooLargeError as ExactTooLargeError, run_mwbm, run_stack_phase
from .numeric import geq
from .oracles import LinearOracle, OracleFormatError, read_oracle
from .preemptive import (UnsupportedConstraintError, preemptive_monotone_factor,
                         preemptive_preset, run_preemptive)

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 1, 2
ALGORITHMS = ("msbm", "preemptive", "mwbm")
OPT_LIMIT = 26
STREAMING = "streaming"
NON_STREAMING = "non-streaming memory profile"


class UsageError(ValueError):
    pass


@dataclass
class RunReport:
    algorithm: str
    C: float
    q: float
    skip_rule: str | None
    seed: int | None
    eps: float | None
    f_matching: float
    matching_size: int
    stack_size: int | None  # |S| for stack-based runs
    preempted: int | None  # |S - M| for the preemptive run
    peak_memory_proxy: int
    oracle_evaluations: int
    wall_time: float
    memory_profile: str
    opt_value: float | None = None
    ratio: float | None = None
    ratio_bound: float | None = None
    certificate: dict | None = None
    expected: dict | None = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _check(lhs, rhs) -> dict:
    return {"lhs": float(lhs), "rhs": float(rhs), "pass": geq(lhs, rhs)}


def _cert_summary(report) -> dict:
    return {
        "edge_violations": len(report.edge_violations),
        "subsets": report.subsets,
        "ratios": [v.to_dict() for v in report.ratios],
        "pass": report.ok,
    }


def _attach_certificate(rep: RunReport, cert_rep) -> None:
    rep.certificate = _cert_summary(cert_rep)
    if rep.q == 1:
        rep.certificate["edge_constraints"] = "every run"
        ok = cert_rep.ok
    else:
        # a sampled-out edge may break its edge constraint; only the expectation
        # is guaranteed (--trials estimates it)
        rep.certificate["edge_constraints"] = "in expectation only"
        ok = cert_rep.subsets.get("pass", True) and all(v.passed for v in cert_rep.ratios)
    rep.checks["certificate"] = {"lhs": rep.certificate["edge_violations"], "rhs": 0, "pass": ok}


def _msbm_params(opts) -> AlgoParams:
    if opts.preset:
        base = preset(opts.preset, eps=opts.eps, seed=opts.seed)
        C = opts.C if opts.C is not None else base.C
        q = opts.q if opts.q is not None else base.q
    else:
        C = opts.C if opts.C is not None else preset("monotone").C
        q = opts.q if opts.q is not None else 1.0
    return AlgoParams(C=C, q=q, skip_rule=opts.skip_rule, seed=opts.seed)


def execute(instance, oracle, algorithm: str, opts) -> RunReport:
    """Run one algorithm and attach the requested checks."""
    if algorithm not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {algorithm!r}")
    t0 = time.perf_counter()
    opt_M = None
    if opts.opt:
        try:
            opt_M, opt_value = brute_force_opt(instance, oracle, limit=opts.opt_limit)
        except TooLargeError as exc:
            raise UsageError(str(exc)) from exc
    oracle.reset_counters()  # count only the algorithm's own evaluations

    if algorithm == "msbm":
        params = _msbm_params(opts)
        rec = run(instance, oracle, params, certify=opts.certify)
        evals = oracle.evaluations
        fM = rec.matching.value(oracle)
        rep = RunReport("msbm", params.C, params.q, params.skip_rule, params.seed, opts.eps,
                        fM, len(rec.matching), len(rec.stack), None, rec.memory_proxy,
                        evals, 0.0, NON_STREAMING if opts.certify else STREAMING)
        if params.q == 1 and oracle.monotone:
            rep.ratio_bound = monotone_factor(params.C)
        if opts.certify:
            _attach_certificate(rep, certify(rec, instance, oracle))
        if opts.trials:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mc = mc_expected_feasibility(instance, oracle, params.C, params.q,
                                             trials=opts.trials, seed=opts.seed or 0)
            rep.expected = {"trials": mc.trials, "label": mc.label, "flagged": mc.flagged,
                            "f_mean": mc.f_mean, "f_se": mc.f_se}
            if mc.within_hypothesis:
                rep.checks["expected_feasibility"] = {"lhs": len(mc.flagged), "rhs": 0,
                                                      "pass": not mc.flagged}

    elif algorithm == "preemptive":
        if opts.preset:
            C, q = preemptive_preset(opts.preset)
        else:
            C, q = 2.0, 1.0
        C = opts.C if opts.C is not None else C
        q = opts.q if opts.q is not None else q
        try:
            M, st = run_preemptive(instance, oracle, C, q, opts.seed, certify=opts.certify)
        except UnsupportedConstraintError as exc:
            raise UsageError(str(exc)) from exc
        evals = oracle.evaluations
        fM = M.value(oracle)
        rep = RunReport("preemptive", C, q, None, opts.seed, opts.eps, fM, len(M), None,
                        len(st.preempted), st.memory_proxy, evals, 0.0,
                        NON_STREAMING if opts.certify else STREAMING)
        if q == 1 and oracle.monotone:
            rep.ratio_bound = preemptive_monotone_factor(C)
        if opts.certify:
            _attach_certificate(rep, certify(st, instance, oracle))

    else:
        if not isinstance(oracle, LinearOracle):
            raise UsageError("mwbm needs a linear oracle")
        eps = opts.eps if opts.eps is not None else 0.5
        if eps <= 0:
            raise UsageError("eps must be positive")
        try:
            M, mrep = run_mwbm(instance, oracle, eps, opt=opt_M, limit=opts.exact_limit)
        except ExactTooLargeError as exc:
            raise UsageError(str(exc)) from exc
        evals = oracle.evaluations
        rep = RunReport("mwbm", 1 + eps / 2, 1.0, "nonstrict", opts.seed, eps, mrep.weight,
                        len(M), mrep.stack_size, None, mrep.memory_proxy, evals, 0.0,
                        NON_STREAMING if opts.certify else STREAMING)
        rep.ratio_bound = 3 + eps
        rep.checks.update(mrep.checks)
        if opts.certify:
            ws = run_stack_phase(instance, oracle, eps, certify=True)
            _attach_certificate(rep, certify(ws, instance, oracle))

    if opt_M is not None:
        rep.opt_value = opt_value
        rep.ratio = opt_value / rep.f_matching if rep.f_matching > 0 else (
            1.0 if opt_value <= 0 else math.inf)
        if rep.ratio_bound is not None:
            rep.checks["ratio"] = _check(rep.ratio_bound * rep.f_matching, opt_value)
    rep.wall_time = time.perf_counter() - t0
    return rep


# --- argument parsing -----------------------------------------------------------------

def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--C", type=float, default=None, help="slack factor (> 1)")
    p.add_argument("--q", type=float, default=None, help="acceptance probability in (0, 1]")
    p.add_argument("--eps", type=float, default=None, help="accuracy for mwbm and mwm_linear")
    p.add_argument("--skip-rule", choices=("nonstrict", "strict"), default="nonstrict")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--preset", choices=("monotone", "nonmonotone", "mwm_linear"), default=None)
    p.add_argument("--certify", action="store_true", help="record a dual certificate and check it")
    p.add_argument("--opt", action="store_true", help="attach the brute-force optimum")
    p.add_argument("--trials", type=int, default=0,
                   help="Monte-Carlo trials for the expected dual check (msbm)")
    p.add_argument("--opt-limit", type=int, default=OPT_LIMIT)
    p.add_argument("--exact-limit", type=int, default=EXACT_LIMIT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="submatch",
                                     description="Streaming submodular b-matching toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an algorithm on an instance/oracle pair")
    p.add_argument("instance")
    p.add_argument("oracle")
    p.add_argument("algorithm", choices=ALGORITHMS)
    _add_run_flags(p)

    g = sub.add_parser("gen", help="generate an instance/oracle pair")
    g.add_argument("family", choices=("tight", "coverage", "covlin", "linear"))
    g.add_argument("--out", default=None, help="output prefix (default: the family name)")
    g.add_argument("--C", type=float, default=2.0)
    g.add_argument("--n", type=int, default=3, help="tight family size")
    g.add_argument("--eps", type=float, default=1e-3)
    g.add_argument("--delta", type=float, default=None)
    g.add_argument("--vertices", type=int, default=8)
    g.add_argument("--edges", type=int, default=12)
    g.add_argument("--b", type=int, default=1, help="uniform capacity")
    g.add_argument("--b-max", type=int, default=None, help="draw capacities from [b, b-max]")
    g.add_argument("--universe", type=int, default=16)
    g.add_argument("--set-size", type=int, default=4)
    g.add_argument("--cost-scale", type=float, default=1.5)
    g.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="run every row of a manifest CSV")
    b.add_argument("manifest")
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--jobs", type=int, default=1, help="worker threads")
    b.add_argument("--out", default=None, help="write CSV here instead of stdout")
    return parser


def _load(instance_path, oracle_path):
    try:
        return read_instance(instance_path), read_oracle(oracle_path)
    except (OSError, StreamFormatError, OracleFormatError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_run(args) -> int:
    instance, oracle = _load(args.instance, args.oracle)
    try:
        rep = execute(instance, oracle, args.algorithm, args)
    except ValueError as exc:  # UsageError and domain errors from parameters
        raise UsageError(str(exc)) from exc
    print(rep.to_json())
    if not rep.passed:
        failed = [k for k, c in rep.checks.items() if not c["pass"]]
        print(f"check failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_gen(args) -> int:
    family = {"tight": "tight", "coverage": "coverage_random", "covlin": "covlin_random",
              "linear": "linear_random"}[args.family]
    capacity = args.b if args.b_max is None else (args.b, args.b_max)
    try:
        spec = GenSpec(family, seed=args.seed, num_vertices=args.vertices, num_edges=args.edges,
                       capacity=capacity, universe=args.universe, max_set_size=args.set_size,
                       cost_scale=args.cost_scale, C=args.C, n=args.n, eps=args.eps,
                       delta=args.delta)
        if family == "tight":
            instance, oracle = gen_tight(args.C, args.n, args.eps, args.delta)
        else:
            instance, oracle = gen_random(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    prefix = args.out or args.family
    try:
        paths = write_pair(prefix, instance, oracle, spec.describe())
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    for path in paths:
        print(path)
    return EXIT_OK


# --- bench ---------------------------------------------------------------------------

MANIFEST_HEADER = ["instance", "oracle", "algorithm", "C", "q", "eps", "seed", "flags"]
BENCH_COLUMNS = ["row", "repeat", "kind", "instance", "oracle", "algorithm", "C", "q",
                 "skip_rule", "eps", "seed", "f_matching", "matching_size", "stack_size",
                 "preempted", "peak_memory_proxy", "oracle_evaluations", "wall_time",
                 "opt_value", "ratio", "passed", "mean_ratio", "min_ratio", "error"]


def _row_opts(row: dict, repeat: int):
    p = argparse.ArgumentParser(add_help=False, exit_on_error=False)
    _add_run_flags(p)
    argv = shlex.split(row.get("flags") or "")
    for name in ("C", "q", "eps", "seed"):
        val = (row.get(name) or "").strip()
        if val:
            argv += [f"--{name}", val]
    opts = p.parse_args(argv)
    if opts.seed is not None:
        opts.seed += repeat
    return opts


def _bench_one(base: Path, row: dict, index: int, repeat: int) -> dict:
    out = {k: None for k in BENCH_COLUMNS}
    out.update(row=index, repeat=repeat, kind="data", instance=row.get("instance"),
               oracle=row.get("oracle"), algorithm=row.get("algorithm"))
    try:
        opts = _row_opts(row, repeat)
        instance, oracle = _load(base / row["instance"], base / row["oracle"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = execute(instance, oracle, (row.get("algorithm") or "").strip(), opts)
        d = rep.to_dict()
        for k in BENCH_COLUMNS:
            if k in d and k not in ("instance", "oracle", "algorithm"):
                out[k] = d[k]
    except (UsageError, ValueError, KeyError, argparse.ArgumentError, SystemExit) as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round(v, 7)) if math.isfinite(v) else str(v)
    return str(v)


def bench_rows(manifest_path: str | Path, repeat: int = 1, jobs: int = 1) -> list[dict]:
    """Data rows in manifest order, followed by one aggregate row per manifest row."""
    manifest_path = Path(manifest_path)
    with open(manifest_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is not None and list(reader.fieldnames) != MANIFEST_HEADER:
            raise UsageError(f"manifest header must be {','.join(MANIFEST_HEADER)}")
        rows = list(reader)
    base = manifest_path.parent
    tasks = [(i, r) for i in range(len(rows)) for r in range(repeat)]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda ir: _bench_one(base, rows[ir[0]], ir[0], ir[1]), tasks))
    aggregates = []
    for i, row in enumerate(rows):
        group = [r for r in results if r["row"] == i]
        ratios = [r["ratio"] for r in group if r["ratio"] is not None and not r["error"]]
        agg = {k: None for k in BENCH_COLUMNS}
        agg.update(row=i, kind="aggregate", instance=row.get("instance"),
                   oracle=row.get("oracle"), algorithm=row.get("algorithm"),
                   C=group[0]["C"], q=group[0]["q"], eps=group[0]["eps"])
        fvals = [r["f_matching"] for r in group if r["f_matching"] is not None]
        if fvals:
            agg["f_matching"] = math.fsum(fvals) / len(fvals)
        if ratios:
            agg["mean_ratio"] = math.fsum(ratios) / len(ratios)
            agg["min_ratio"] = min(ratios)
        errors = sum(1 for r in group if r["error"])
        agg["error"] = f"{errors} failed" if errors else None
        agg["passed"] = all(r["passed"] for r in group) if group and not errors else False
        aggregates.append(agg)
    return results + aggregates


def format_bench(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in BENCH_COLUMNS])
    return buf.getvalue()


def cmd_bench(args) -> int:
    if args.repeat < 1:
        raise UsageError("--repeat must be at least 1")
    try:
        rows = bench_rows(args.manifest, args.repeat, args.jobs)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    text = format_bench(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handler = {"run": cmd_run, "gen": cmd_gen, "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
