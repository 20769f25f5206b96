"""Preemptive single-matching algorithm for submodular matching (b = 1).

An arriving edge e competes with the matched edges it touches. Its gain
f(e:M) is compared to C times B(e), the summed gains f(e':M) of those
blockers; if it wins, then with probability q the blockers are evicted and
e joins the matching. An evicted edge's weight is frozen at its gain just
before eviction, and it never returns.

The gain of a matched edge e' is its stream marginal against the matched
edges that arrived before it, so that f(M) equals the sum of these gains.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .instance import BMatching, Edge, Instance
from .msbm import Decision
from .numeric import TOL
from .oracles import SubmodularOracle


class UnsupportedConstraintError(ValueError):
    pass


def preemptive_monotone_factor(C: float) -> float:
    return 2 * C + 2 * C / (C - 1)


def preemptive_nonmonotone_factor(C: float) -> float:
    return (2 * C * C + C) / (C - 1)


def preemptive_preset(kind: str) -> tuple[float, float]:
    """``(C, q)`` for ``monotone`` (factor 8) or ``nonmonotone`` (factor 5 + 2*sqrt(6))."""
    if kind == "monotone":
        return 2.0, 1.0
    if kind == "nonmonotone":
        # argmin of (2C^2 + C)/(C - 1)
        C = 1 + math.sqrt(6) / 2
        return C, 1 / (2 * C + 1)
    raise ValueError(f"unknown preset {kind!r}")


@dataclass
class PreemptiveState:
    instance: Instance
    C: float
    q: float
    matching: BMatching
    admitted: list[Edge] = field(default_factory=list)
    preempted: dict[int, Edge] = field(default_factory=dict)
    frozen: dict[int, float] = field(default_factory=dict)  # w_e for e in P
    admission_gain: dict[int, float] = field(default_factory=dict)
    evicted_by: dict[int, list[int]] = field(default_factory=dict)
    current_gain: dict[int, float] = field(default_factory=dict)  # f(e:M) for e in M, refreshed each arrival
    marginal_calls: int = 0
    set_evaluations: int = 0
    peak_matching: int = 0
    certify: bool = False
    # certify mode only
    blocking: dict[int, float] | None = None  # B(e) at decision time
    skipped: list[tuple[Edge, float, Decision]] | None = None  # (edge, f(e:S), decision)
    vertex_max: dict[int, float] | None = None  # max f(e:M^(t)) over matched e containing v
    decisions: list[Decision] | None = None

    def weights(self) -> dict[int, float]:
        """w_e over S: the final gain for matched edges, the frozen gain for preempted ones."""
        w = {t: self.current_gain[t] for t in self.matching.edges}
        w.update(self.frozen)
        return w

    @property
    def memory_proxy(self) -> int:
        return len(self.matching)


class PreemptiveRun:
    def __init__(self, instance: Instance, oracle: SubmodularOracle, C: float = 2.0,
                 q: float = 1.0, seed: int | None = None, certify: bool = False):
        if not C > 1:
            raise ValueError(f"slack C must exceed 1, got {C}")
        if not 0 < q <= 1:
            raise ValueError(f"preemption probability q must lie in (0, 1], got {q}")
        if any(b != 1 for b in instance.capacities):
            raise UnsupportedConstraintError("the preemptive algorithm supports b = 1 only")
        self.oracle = oracle
        self.rng = random.Random(seed)
        self._evals0 = oracle.evaluations
        self.s = PreemptiveState(instance, float(C), float(q), BMatching(instance.capacities),
                                 certify=certify)
        if certify:
            self.s.blocking, self.s.skipped, self.s.vertex_max = {}, [], {}
            self.s.decisions = []
            self._admitted_state = oracle.new_state()

    def _refresh_gains(self):
        """Gains f(e':M) of the matched edges; returns the state holding all of M."""
        s, oracle = self.s, self.oracle
        state = oracle.new_state()
        gains = {}
        for e in s.matching:  # arrival order
            g = oracle.stream_marginal(state, e.key)
            oracle.push_accept(state, e.key, g)
            gains[e.t] = g
            if s.certify:
                for v in e.endpoints:
                    if g > s.vertex_max.get(v, -math.inf):
                        s.vertex_max[v] = g
        s.marginal_calls += len(gains)
        s.current_gain = gains
        return state

    def step(self, e: Edge) -> Decision:
        s, oracle = self.s, self.oracle
        state = self._refresh_gains()
        gain = oracle.stream_marginal(state, e.key)
        s.marginal_calls += 1
        blockers = [x for x in s.matching.edges.values() if e.touches(x)]
        B = math.fsum(s.current_gain[x.t] for x in blockers)
        if s.certify:
            s.blocking[e.t] = B
            lam = oracle.stream_marginal(self._admitted_state, e.key)
        if gain <= s.C * B + TOL:
            decision = Decision.SKIPPED
        elif s.q < 1 and self.rng.random() >= s.q:
            decision = Decision.SAMPLED_OUT
        else:
            decision = Decision.PUSHED
            for x in blockers:
                s.matching.remove(x)
                s.preempted[x.t] = x
                s.frozen[x.t] = s.current_gain.pop(x.t)
            s.matching.add(e)
            s.admitted.append(e)
            s.admission_gain[e.t] = gain
            s.evicted_by[e.t] = sorted(x.t for x in blockers)
            s.peak_matching = max(s.peak_matching, len(s.matching))
            if s.certify:
                oracle.push_accept(self._admitted_state, e.key, lam)
        if s.certify:
            s.decisions.append(decision)
            if decision is not Decision.PUSHED:
                s.skipped.append((e, lam, decision))
        return decision

    def finish(self) -> PreemptiveState:
        self._refresh_gains()
        self.s.set_evaluations = self.oracle.evaluations - self._evals0
        return self.s


def preemptive_step(driver: PreemptiveRun, e: Edge) -> Decision:
    return driver.step(e)


def run_preemptive(instance: Instance, oracle: SubmodularOracle, C: float = 2.0, q: float = 1.0,
                   seed: int | None = None, certify: bool = False
                   ) -> tuple[BMatching, PreemptiveState]:
    driver = PreemptiveRun(instance, oracle, C, q, seed, certify)
    for e in instance.edges:
        driver.step(e)
    state = driver.finish()
    return state.matching, state
