"""Reproducible instance generators and paired instance/oracle files."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .instance import Instance, format_stream
from .oracles import (CoverageOracle, CovLinOracle, LinearOracle, SubmodularOracle,
                      TightOracle, format_oracle, make_tight_oracle)

FAMILIES = ("tight", "coverage_random", "covlin_random", "linear_random")


def default_delta(C: float) -> float:
    return 1e-4 * (C - 1)


def gen_tight(C: float, n: int, eps: float, delta: float | None = None
              ) -> tuple[Instance, TightOracle]:
    """The capped-pair family: d_1..d_n = (x_0, x_i) arrive first, then e_0..e_n = (x_i, y_i).

    ``delta`` > 0 inflates w(d_i) to (C + delta)^(i-1) so each d_i clears the
    non-strict skip test strictly.
    """
    if delta is None:
        delta = default_delta(C)
    oracle, instance = make_tight_oracle(C, n, eps, delta)
    return instance, oracle


def tight_ratio(C: float, n: int, eps: float, delta: float) -> float:
    """OPT / ALG on the tight family: sum_i w(e_i) over w(d_n)."""
    opt = C ** n + sum(C ** i for i in range(n + 1)) - eps * (n + 1)
    return opt / (C + delta) ** (n - 1)


@dataclass(frozen=True)
class GenSpec:
    family: str
    seed: int = 0
    num_vertices: int = 8
    num_edges: int = 12
    capacity: int | tuple[int, int] = 1  # uniform value or inclusive (lo, hi) range
    universe: int = 16
    max_set_size: int = 4
    element_weights: tuple[int, int] | None = None  # integer range, None for unit weights
    weight_range: tuple[float, float] = (1.0, 100.0)  # linear family
    cost_scale: float = 1.5  # covlin: cost_k ~ U(0, cost_scale) * f({k}) coverage
    # tight family
    C: float = 2.0
    n: int = 3
    eps: float = 1e-3
    delta: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family != "tight":
            if self.num_vertices < 2:
                raise ValueError("need at least two vertices")
            if self.num_edges < 0:
                raise ValueError("num_edges must be nonnegative")
            lo, hi = (self.capacity, self.capacity) if isinstance(self.capacity, int) else self.capacity
            if lo < 1 or hi < lo:
                raise ValueError("capacities must be positive with lo <= hi")
            if self.universe < 1 or not 1 <= self.max_set_size <= self.universe:
                raise ValueError("need 1 <= max_set_size <= universe")
            if self.cost_scale < 0:
                raise ValueError("cost_scale must be nonnegative")

    def describe(self) -> str:
        fields = {k: v for k, v in asdict(self).items() if v is not None}
        return "GenSpec(" + ", ".join(f"{k}={v!r}" for k, v in fields.items()) + ")"


def _graph(spec: GenSpec, rng: np.random.Generator):
    n, m = spec.num_vertices, spec.num_edges
    us = rng.integers(n, size=m)
    vs = rng.integers(n - 1, size=m)
    vs = vs + (vs >= us)  # uniform over v != u
    pairs = list(zip(us.tolist(), vs.tolist()))
    if isinstance(spec.capacity, int):
        caps = (spec.capacity,) * n
    else:
        lo, hi = spec.capacity
        caps = tuple(int(x) for x in rng.integers(lo, hi + 1, size=n))
    order = rng.permutation(m)
    # key k belongs to the k-th generated edge; arrival order is shuffled
    arrivals = [(pairs[k][0], pairs[k][1], int(k)) for k in order]
    return Instance.from_pairs(n, arrivals, caps)


def _coverage_sets(spec: GenSpec, rng: np.random.Generator):
    # draw up to max_set_size elements with replacement; repeats shrink the set
    m = spec.num_edges
    sizes = rng.integers(1, spec.max_set_size + 1, size=m).tolist()
    draws = rng.integers(spec.universe, size=(m, spec.max_set_size)).tolist()
    sets = {k: sorted(set(draws[k][:sizes[k]])) for k in range(m)}
    weights = None
    if spec.element_weights is not None:
        lo, hi = spec.element_weights
        weights = {x: float(rng.integers(lo, hi + 1)) for x in range(spec.universe)}
    return sets, weights


def gen_random(spec: GenSpec) -> tuple[Instance, SubmodularOracle]:
    """Deterministic in ``spec`` (including its seed)."""
    if spec.family == "tight":
        return gen_tight(spec.C, spec.n, spec.eps, spec.delta)
    rng = np.random.default_rng(spec.seed)
    instance = _graph(spec, rng)
    if spec.family == "linear_random":
        lo, hi = spec.weight_range
        weights = {k: round(float(rng.uniform(lo, hi)), 3) for k in range(spec.num_edges)}
        return instance, LinearOracle(weights)
    sets, weights = _coverage_sets(spec, rng)
    if spec.family == "coverage_random":
        return instance, CoverageOracle(spec.universe, sets, weights)
    base = CoverageOracle(spec.universe, sets, weights)
    single = base.singleton_values()
    costs = {k: round(float(rng.uniform(0, spec.cost_scale)) * single[k], 3)
             for k in range(spec.num_edges)}
    return instance, CovLinOracle(spec.universe, sets, costs, weights)


def write_pair(prefix: str | Path, instance: Instance, oracle: SubmodularOracle,
               provenance: str | None = None) -> tuple[Path, Path]:
    """Write ``<prefix>.msbm`` and ``<prefix>.oracle``."""
    prefix = Path(prefix)
    comments = [f"generated by submatch: {provenance}"] if provenance else []
    inst_path = prefix.with_name(prefix.name + ".msbm")
    orc_path = prefix.with_name(prefix.name + ".oracle")
    inst_path.write_text(format_stream(instance, comments), encoding="utf-8")
    orc_path.write_text(format_oracle(oracle, comments), encoding="utf-8")
    return inst_path, orc_path

