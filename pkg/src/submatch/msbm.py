"""Single-pass primal-dual stack algorithm for submodular b-matching.

Each arriving edge e = (u, v) is compared against its endpoints' potentials:
it is skipped when ``C * (phi_u + phi_v) >= f(e:S)``; otherwise, with
probability q, it is pushed on the stack and both potentials grow by
``(f(e:S) - phi_u - phi_v) / b_x``. After the pass, the stack is unwound in
reverse and each edge is kept if both endpoints still have spare capacity.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .instance import BMatching, Edge, Instance, greedy_maximal_bmatching
from .numeric import TOL
from .oracles import SubmodularOracle

SKIP_RULES = ("nonstrict", "strict")


@dataclass(frozen=True)
class AlgoParams:
    C: float
    q: float = 1.0
    skip_rule: str = "nonstrict"
    seed: int | None = None

    def __post_init__(self):
        if not self.C > 1:
            raise ValueError(f"slack C must exceed 1, got {self.C}")
        if not 0 < self.q <= 1:
            raise ValueError(f"sampling probability q must lie in (0, 1], got {self.q}")
        if self.skip_rule not in SKIP_RULES:
            raise ValueError(f"skip_rule must be one of {SKIP_RULES}")


def monotone_factor(C: float) -> float:
    """Approximation factor 2C + C/(C-1) of the deterministic run."""
    return 2 * C + C / (C - 1)


def nonmonotone_factor(C: float) -> float:
    """Factor (4C^2 - 1)/(2C - 2) of the run with q = 1/(2C+1)."""
    return (4 * C * C - 1) / (2 * C - 2)


def preset(kind: str, eps: float | None = None, seed: int | None = None) -> AlgoParams:
    """Parameter presets: ``monotone``, ``nonmonotone`` or ``mwm_linear`` (needs eps)."""
    if kind == "monotone":
        return AlgoParams(C=1 + 1 / math.sqrt(2), q=1.0, seed=seed)
    if kind == "nonmonotone":
        C = 1 + math.sqrt(3) / 2
        return AlgoParams(C=C, q=1 / (2 * C + 1), seed=seed)
    if kind == "mwm_linear":
        if eps is None or eps <= 0:
            raise ValueError("mwm_linear preset needs eps > 0")
        return AlgoParams(C=1 + eps, q=1.0, seed=seed)
    raise ValueError(f"unknown preset {kind!r}")


class Decision(str, Enum):
    SKIPPED = "skipped"
    PUSHED = "pushed"
    SAMPLED_OUT = "sampled_out"


@dataclass(frozen=True)
class StackEntry:
    edge: Edge
    marginal: float  # f(e:S) at push time
    increments: tuple[float, float]  # (w_eu, w_ev)


@dataclass
class RunRecord:
    instance: Instance
    params: AlgoParams
    stack: list[StackEntry]
    potentials: dict[int, float]  # final phi_v^(|E|), nonzero entries only
    matching: BMatching
    marginal_calls: int
    set_evaluations: int
    peak_stack: int
    incidence: Counter  # per-vertex number of stack edges
    certify: bool = False
    # certify mode only: (edge, recorded marginal, decision) for every edge not pushed
    skipped: list[tuple[Edge, float, Decision]] | None = None
    # certify mode only: vertex -> [(t, phi_v^(t))] at every change
    trajectory: dict[int, list[tuple[int, float]]] | None = None
    decisions: list[Decision] | None = None

    @property
    def stack_edges(self) -> list[Edge]:
        return [s.edge for s in self.stack]

    def f_matching(self, oracle: SubmodularOracle) -> float:
        return self.matching.value(oracle)

    def f_stack(self, oracle: SubmodularOracle) -> float:
        return oracle.eval(e.key for e in self.stack_edges)

    @property
    def memory_proxy(self) -> int:
        """Stack entries plus stored (nonzero) potentials."""
        return len(self.stack) + sum(1 for p in self.potentials.values() if p != 0)


class StackRun:
    """Incremental driver: feed edges with :meth:`arrival_step`, then :meth:`finish`."""

    def __init__(self, instance: Instance, oracle: SubmodularOracle, params: AlgoParams,
                 certify: bool = False):
        self.instance = instance
        self.oracle = oracle
        self.params = params
        self.certify = certify
        self.b = instance.capacities
        self.state = oracle.new_state()
        self.phi: dict[int, float] = {}
        self.stack: list[StackEntry] = []
        self.incidence: Counter = Counter()
        self.rng = random.Random(params.seed)
        self.marginal_calls = 0
        self._evals0 = oracle.evaluations
        self.skipped = [] if certify else None
        self.trajectory = {} if certify else None
        self.decisions = [] if certify else None

    def _skips(self, covered: float, g: float) -> bool:
        if self.params.skip_rule == "nonstrict":
            return covered >= g - TOL
        return covered > g + TOL

    def arrival_step(self, e: Edge) -> Decision:
        phi = self.phi
        pu, pv = phi.get(e.u, 0.0), phi.get(e.v, 0.0)
        g = self.oracle.stream_marginal(self.state, e.key)
        self.marginal_calls += 1
        if self._skips(self.params.C * (pu + pv), g):
            decision = Decision.SKIPPED
        elif self.params.q < 1 and self.rng.random() >= self.params.q:
            decision = Decision.SAMPLED_OUT
        else:
            decision = Decision.PUSHED
            reduced = g - pu - pv
            wu, wv = reduced / self.b[e.u], reduced / self.b[e.v]
            self.oracle.push_accept(self.state, e.key, g)
            self.stack.append(StackEntry(e, g, (wu, wv)))
            phi[e.u] = pu + wu
            phi[e.v] = pv + wv
            self.incidence[e.u] += 1
            self.incidence[e.v] += 1
            if self.certify:
                self.trajectory.setdefault(e.u, []).append((e.t, phi[e.u]))
                self.trajectory.setdefault(e.v, []).append((e.t, phi[e.v]))
        if self.certify:
            self.decisions.append(decision)
            if decision is not Decision.PUSHED:
                self.skipped.append((e, g, decision))
        return decision

    def finish(self) -> RunRecord:
        return RunRecord(
            instance=self.instance,
            params=self.params,
            stack=self.stack,
            potentials=self.phi,
            matching=unwind(self.stack_edges(), self.b),
            marginal_calls=self.marginal_calls,
            set_evaluations=self.oracle.evaluations - self._evals0,
            peak_stack=len(self.stack),
            incidence=self.incidence,
            certify=self.certify,
            skipped=self.skipped,
            trajectory=self.trajectory,
            decisions=self.decisions,
        )

    def stack_edges(self) -> list[Edge]:
        return [s.edge for s in self.stack]


def unwind(stack: list[Edge], capacities) -> BMatching:
    """Pop the stack (last pushed first), keeping edges whose endpoints have room."""
    M = BMatching(tuple(capacities))
    for e in reversed(stack):
        if M.can_add(e):
            M.add(e)
    return M


def run(instance: Instance, oracle: SubmodularOracle, params: AlgoParams,
        certify: bool = False) -> RunRecord:
    """One pass over the stream followed by the reverse greedy unwind.

    With ``certify=False`` only the stack and final potentials are kept;
    ``certify=True`` also records every skipped edge's marginal and the full
    potential trajectories (a non-streaming memory profile).
    """
    driver = StackRun(instance, oracle, params, certify)
    for e in instance.edges:
        driver.arrival_step(e)
    return driver.finish()


# --- resource accounting ------------------------------------------------------------

def incidence_bound(b_v: int, C: float, fmax: float, fmin: float) -> float:
    """Most stack edges a vertex with capacity ``b_v`` can carry.

    The first push at v leaves phi_v >= fmin * eps / ((1 + eps) * b_v), each
    later push multiplies phi_v by at least 1 + eps/b_v, and a push needs
    phi_v < fmax / C (eps = C - 1). Valid when f(empty) >= 0, so that no
    marginal exceeds fmax, and fmin is at most every pushed marginal.
    """
    eps = C - 1
    r = math.log1p(eps / b_v)
    return 1 + (math.log(fmax / fmin) + math.log(b_v / eps) + r) / r


@dataclass
class ResourceReport:
    num_edges: int
    marginal_calls: int
    set_evaluations: int
    stack_size: int
    memory_proxy: int
    fmax: float
    fmin: float
    worst_vertex: int | None  # vertex with the least slack to its bound
    worst_incidence: int
    worst_bound: float
    incidence_ok: bool
    cover_size: int  # vertices touched by a greedy maximal b-matching
    cover_bound: float  # sum over the cover of min(incidence bound, stack degree)
    matching_lower: int  # size of that greedy matching, a lower bound on M_max
    constant: float  # memory_proxy / (matching_lower * max(1, log(fmax/fmin)))

    @property
    def calls_ok(self) -> bool:
        return self.marginal_calls == self.num_edges and self.set_evaluations <= 2 * self.num_edges

    @property
    def ok(self) -> bool:
        return self.incidence_ok and self.calls_ok and self.stack_size <= self.cover_bound


def resource_report(rec: RunRecord, oracle: SubmodularOracle) -> ResourceReport:
    """Measure a run against its per-vertex incidence bound and call budget.

    fmax is the largest singleton value and fmin the smallest pushed marginal.
    """
    inst = rec.instance
    fmax = oracle.fmax
    pushed = [s.marginal for s in rec.stack if s.marginal > 0]
    fmin = min(pushed) if pushed else fmax
    b = inst.capacities
    worst, worst_k, worst_bound, worst_slack = None, 0, math.inf, math.inf
    ok = True
    bounds = {}
    for v, k in rec.incidence.items():
        kb = incidence_bound(b[v], rec.params.C, fmax, fmin)
        bounds[v] = kb
        if k > kb + TOL:
            ok = False
        if kb - k < worst_slack:
            worst, worst_k, worst_bound, worst_slack = v, k, kb, kb - k
    greedy = greedy_maximal_bmatching(inst)
    cover = {x for e in greedy for x in e.endpoints}
    # every edge has an endpoint in the cover, else the greedy matching was not maximal
    cover_bound = math.fsum(min(bounds.get(u, 0.0), rec.incidence.get(u, 0)) for u in cover)
    mlow = max(1, len(greedy))
    spread = math.log(fmax / fmin) if fmin > 0 else 0.0
    constant = rec.memory_proxy / (mlow * max(1.0, spread))
    return ResourceReport(inst.num_edges, rec.marginal_calls, rec.set_evaluations, len(rec.stack),
                          rec.memory_proxy, fmax, fmin, worst, worst_k, worst_bound, ok,
                          len(cover), cover_bound, len(greedy), constant)
