"""Linear-weight b-matching: stack phase, then an exact b-matching on the stack."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .instance import BMatching, Edge, Instance
from .msbm import AlgoParams, RunRecord, run
from .numeric import TOL, geq
from .oracles import LinearOracle

EXACT_LIMIT = 24


class TooLargeError(ValueError):
    """The exact solver refuses inputs above its edge limit."""


def _as_oracle(weights) -> LinearOracle:
    if isinstance(weights, LinearOracle):
        return weights
    return LinearOracle(weights)


@dataclass
class WeightedStack:
    record: RunRecord
    weights: dict[int, float]  # arrival index -> w_e for every edge of the instance
    eps: float

    @property
    def C(self) -> float:
        return self.record.params.C

    @property
    def edges(self) -> list[Edge]:
        return self.record.stack_edges

    @property
    def potentials(self) -> dict[int, float]:
        return self.record.potentials


def run_stack_phase(instance: Instance, weights, eps: float, certify: bool = True) -> WeightedStack:
    """The stack pass with a linear oracle, C = 1 + eps/2 and q = 1."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    oracle = _as_oracle(weights)
    rec = run(instance, oracle, AlgoParams(C=1 + eps / 2, q=1.0), certify=certify)
    w = {e.t: oracle.weights[e.key] for e in instance.edges}
    return WeightedStack(rec, w, eps)


def exact_mwbm(weighted_edges: Sequence[tuple[Edge, float]], capacities: Sequence[int],
               limit: int = EXACT_LIMIT) -> tuple[BMatching, float]:
    """Maximum-weight b-matching by branch and bound.

    Edges are branched heaviest first; a branch is cut when its weight plus
    all remaining positive weight cannot beat the incumbent. Ties go to the
    lexicographically smallest set of arrival indices.
    """
    if len(weighted_edges) > limit:
        raise TooLargeError(f"{len(weighted_edges)} edges is too large for exact mode (limit {limit})")
    items = sorted(((e, float(w)) for e, w in weighted_edges if w > 0),
                   key=lambda p: (-p[1], p[0].t))
    suffix = [0.0] * (len(items) + 1)
    for i in range(len(items) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + items[i][1]

    caps = tuple(capacities)
    deg = [0] * len(caps)
    chosen: list[Edge] = []
    best_val = 0.0
    best_ids: tuple[int, ...] | None = None

    def dfs(i: int, val: float):
        nonlocal best_val, best_ids
        if best_ids is not None and val + suffix[i] < best_val - TOL:
            return
        if i == len(items):
            ids = tuple(sorted(e.t for e in chosen))
            if (best_ids is None or val > best_val + TOL
                    or (abs(val - best_val) <= TOL and ids < best_ids)):
                best_val, best_ids = val, ids
            return
        e, w = items[i]
        if deg[e.u] < caps[e.u] and deg[e.v] < caps[e.v]:
            deg[e.u] += 1
            deg[e.v] += 1
            chosen.append(e)
            dfs(i + 1, val + w)
            chosen.pop()
            deg[e.u] -= 1
            deg[e.v] -= 1
        dfs(i + 1, val)

    dfs(0, 0.0)
    by_id = {e.t: e for e, _ in weighted_edges}
    M = BMatching(caps)
    for t in best_ids:
        M.add(by_id[t])
    weight = math.fsum(w for e, w in weighted_edges if e.t in M.edges)
    return M, weight


@dataclass
class MWbMReport:
    weight: float  # w(M)
    greedy_weight: float  # w of the reverse greedy unwind on the same stack
    dual_cost: float  # sum_v b_v * phi_v with phi_v = C * phi_v^(|E|)
    stack_size: int
    opt_weight: float | None = None
    opt_in_stack_weight: float | None = None  # w(OPT & S)
    memory_proxy: int = 0  # stack entries plus nonzero potentials
    checks: dict[str, dict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks.values())


def linear_dual_violations(ws: WeightedStack, stack_only: bool = False):
    """Edges breaking C * sum_{v in e} phi_v^(|E|) >= w_e.

    The certificate (0, phi, w restricted to edges off the stack) covers
    OPT minus S; stack edges can break it when 1/b_u + 1/b_v < 1.
    ``stack_only`` instead lists the stack edges that do not.
    """
    phi = ws.potentials
    on_stack = {e.t for e in ws.edges}
    bad = []
    for e in ws.record.instance.edges:
        if (e.t in on_stack) != stack_only:
            continue
        lhs = ws.C * (phi.get(e.u, 0.0) + phi.get(e.v, 0.0))
        if not geq(lhs, ws.weights[e.t]):
            bad.append((e, lhs, ws.weights[e.t]))
    return bad


def run_mwbm(instance: Instance, weights, eps: float, opt: BMatching | None = None,
             limit: int = EXACT_LIMIT) -> tuple[BMatching, MWbMReport]:
    """Stack phase then an exact b-matching on the stack; ``opt`` enables the OPT-based checks."""
    ws = run_stack_phase(instance, weights, eps)
    wmap = ws.weights
    M, weight = exact_mwbm([(e, wmap[e.t]) for e in ws.edges], instance.capacities, limit)
    greedy = ws.record.matching
    greedy_weight = math.fsum(wmap[e.t] for e in greedy)
    b = instance.capacities
    dual_cost = math.fsum(b[v] * ws.C * p for v, p in ws.potentials.items())
    report = MWbMReport(weight, greedy_weight, dual_cost, len(ws.edges))
    report.memory_proxy = ws.record.memory_proxy

    report.checks["exact_dominates_greedy"] = _check(weight, greedy_weight)
    report.checks["weight_vs_dual"] = _check(weight, dual_cost / (2 + eps))
    off = linear_dual_violations(ws)
    report.checks["dual_feasible_off_stack"] = {
        "lhs": len(off), "rhs": 0, "pass": not off,
    }
    if opt is not None:
        on_stack = {e.t for e in ws.edges}
        report.opt_weight = math.fsum(wmap[e.t] for e in opt)
        report.opt_in_stack_weight = math.fsum(wmap[e.t] for e in opt if e.t in on_stack)
        opt_off = report.opt_weight - report.opt_in_stack_weight
        report.checks["weight_vs_opt_in_stack"] = _check(weight, report.opt_in_stack_weight)
        report.checks["dual_covers_opt_off_stack"] = _check(dual_cost, opt_off)
        report.checks["ratio"] = _check((3 + eps) * weight, report.opt_weight)
    return M, report


def _check(lhs: float, rhs: float) -> dict:
    return {"lhs": lhs, "rhs": rhs, "pass": geq(lhs, rhs)}
