"""Dual certificates, LP feasibility checks, ratio checks and brute-force optima.

The dual LP, for a submodular g and capacities b, is

    min  mu + sum_v b_v phi_v
    s.t. mu + sum_{e in T} lambda_e >= g(T)   for every edge set T
         phi_u + phi_v >= lambda_e            for every edge e = (u, v)
         phi >= 0

and every feasible dual bounds max_T g(T) from above. For a run that kept
the edge set S we use g(T) = f(S | T) and the dual

    mu = f(S),  phi_v = C * (final potential of v),
    lambda_e = f(e:S) for e outside S and 0 on S.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .instance import BMatching, Edge, Instance
from .msbm import AlgoParams, RunRecord, monotone_factor, run
from .mwbm import WeightedStack
from .numeric import TOL, geq
from .oracles import SubmodularOracle
from .preemptive import PreemptiveState, preemptive_monotone_factor

BRUTE_FORCE_LIMIT = 22
EXHAUSTIVE_SUBSET_LIMIT = 20


class CertifyModeError(ValueError):
    """The run was made without ``certify=True`` and lacks the records a dual needs."""


class TooLargeError(ValueError):
    pass


@dataclass
class DualCertificate:
    mode: str  # "stack", "preemptive" or "linear"
    C: float
    mu: float
    phi: dict[int, float]
    lam: dict[int, float]  # arrival index -> lambda_e, every edge of the instance
    capacities: tuple[int, ...]
    support: list[Edge]  # S: the stack, or every edge ever matched
    weights: dict[int, float] | None = None  # linear mode only

    @property
    def cost(self) -> float:
        return self.mu + math.fsum(self.capacities[v] * p for v, p in self.phi.items())

    @property
    def vertex_cost(self) -> float:
        return math.fsum(self.capacities[v] * p for v, p in self.phi.items())


@dataclass
class Verdict:
    name: str
    lhs: float
    rhs: float
    passed: bool
    factor: float | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed,
                "factor": self.factor}


def _verdict(name, lhs, rhs, factor=None, tol=TOL) -> Verdict:
    return Verdict(name, float(lhs), float(rhs), geq(lhs, rhs, tol), factor)


@dataclass
class FeasibilityReport:
    edges: list[tuple[int, float, float, bool]] = field(default_factory=list)
    subsets: dict = field(default_factory=dict)
    ratios: list[Verdict] = field(default_factory=list)

    @property
    def edge_violations(self):
        return [x for x in self.edges if not x[3]]

    @property
    def ok(self) -> bool:
        return (not self.edge_violations
                and self.subsets.get("pass", True)
                and all(v.passed for v in self.ratios))

    def ratio(self, name: str) -> Verdict:
        for v in self.ratios:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "edges": [{"edge": t, "lhs": l, "rhs": r, "pass": p} for t, l, r, p in self.edges],
            "subsets": self.subsets,
            "ratios": [v.to_dict() for v in self.ratios],
            "pass": self.ok,
        }


# --- building duals -------------------------------------------------------------

def _lambda_from_records(instance: Instance, support, skipped) -> dict[int, float]:
    lam = {e.t: 0.0 for e in support}
    for e, marginal, _ in skipped:
        lam[e.t] = marginal
    missing = [e.t for e in instance.edges if e.t not in lam]
    if missing:
        raise CertifyModeError(f"no record for edges {missing[:5]}")
    return lam


def build_dual(run_result, oracle: SubmodularOracle | None = None) -> DualCertificate:
    """Dual solution fitted to a certify-mode run.

    Accepts a :class:`RunRecord` (stack mode), a :class:`PreemptiveState`
    (preemptive mode: phi_v is C times the largest gain of any edge matched
    at v over the whole run) or a :class:`WeightedStack` (linear mode:
    mu = 0 and lambda_e = w_e off the stack).
    """
    if isinstance(run_result, WeightedStack):
        rec = run_result.record
        if not rec.certify:
            raise CertifyModeError("stack phase was run without certify=True")
        C = rec.params.C
        on_stack = {e.t for e in rec.stack_edges}
        lam = {t: (0.0 if t in on_stack else w) for t, w in run_result.weights.items()}
        phi = {v: C * p for v, p in rec.potentials.items()}
        return DualCertificate("linear", C, 0.0, phi, lam, rec.instance.capacities,
                               rec.stack_edges, dict(run_result.weights))

    if oracle is None:
        raise ValueError("stack and preemptive duals need the oracle")

    if isinstance(run_result, RunRecord):
        if not run_result.certify:
            raise CertifyModeError("run was made without certify=True")
        C = run_result.params.C
        S = run_result.stack_edges
        lam = _lambda_from_records(run_result.instance, S, run_result.skipped)
        phi = {v: C * p for v, p in run_result.potentials.items()}
        mu = oracle.eval(e.key for e in S)
        return DualCertificate("stack", C, mu, phi, lam, run_result.instance.capacities, S)

    if isinstance(run_result, PreemptiveState):
        if not run_result.certify:
            raise CertifyModeError("run was made without certify=True")
        C = run_result.C
        S = list(run_result.admitted)
        lam = _lambda_from_records(run_result.instance, S, run_result.skipped)
        phi = {v: C * g for v, g in run_result.vertex_max.items()}
        mu = oracle.eval(e.key for e in S)
        return DualCertificate("preemptive", C, mu, phi, lam, run_result.instance.capacities, S)

    raise TypeError(f"cannot build a dual from {type(run_result).__name__}")


# --- LP feasibility ---------------------------------------------------------------

def check_feasibility(cert: DualCertificate, instance: Instance, oracle: SubmodularOracle | None,
                      subset_mode: str = "exhaustive", limit: int = EXHAUSTIVE_SUBSET_LIMIT,
                      tol: float = TOL) -> FeasibilityReport:
    """Check both constraint families of the dual LP.

    Edge constraints are checked exactly. Subset constraints are checked
    either for every T (``exhaustive``; restricting T to edges outside S loses
    nothing since support edges have lambda = 0 and leave f(S | T)
    unchanged) or through the sufficient condition lambda_e >= f_S(e) for
    every e outside S (``sufficient``).
    """
    report = FeasibilityReport()
    phi = cert.phi
    for e in instance.edges:
        lhs = phi.get(e.u, 0.0) + phi.get(e.v, 0.0)
        rhs = cert.lam[e.t]
        report.edges.append((e.t, lhs, rhs, geq(lhs, rhs, tol)))
    phi_nonneg = all(p >= -tol for p in phi.values())

    in_support = {e.t for e in cert.support}
    outside = [e for e in instance.edges if e.t not in in_support]

    if cert.mode == "linear":
        # g(T) = w(T - S), matched term by term by lambda
        report.subsets = {"mode": "identity", "checked": 0, "violations": [],
                          "phi_nonnegative": phi_nonneg, "pass": phi_nonneg}
        return report
    if oracle is None:
        raise ValueError("subset constraints need the oracle")

    if subset_mode == "exhaustive":
        if instance.num_edges > limit:
            raise TooLargeError(f"{instance.num_edges} edges exceeds exhaustive limit {limit}")
        base = oracle.state_of(e.key for e in cert.support)
        violations = []
        checked = 0

        def dfs(i, state, lam_sum, chosen):
            nonlocal checked
            if i == len(outside):
                checked += 1
                lhs, rhs = cert.mu + lam_sum, state.value
                if not geq(lhs, rhs, tol) and len(violations) < 10:
                    violations.append((sorted(chosen), lhs, rhs))
                return
            dfs(i + 1, state, lam_sum, chosen)
            e = outside[i]
            nxt = state.copy()
            oracle.push_accept(nxt, e.key)
            chosen.append(e.t)
            dfs(i + 1, nxt, lam_sum + cert.lam[e.t], chosen)
            chosen.pop()

        dfs(0, base, 0.0, [])
        report.subsets = {"mode": "exhaustive", "checked": checked,
                          "violations": violations, "pass": not violations}
    elif subset_mode == "sufficient":
        base = oracle.state_of(e.key for e in cert.support)
        violations = []
        for e in outside:
            gain = oracle.stream_marginal(base, e.key)
            if not geq(cert.lam[e.t], gain, tol):
                violations.append(([e.t], cert.lam[e.t], gain))
        mu_ok = geq(cert.mu, base.value, tol)
        if not mu_ok:
            violations.append(([], cert.mu, base.value))
        report.subsets = {"mode": "sufficient", "checked": len(outside) + 1,
                          "violations": violations, "pass": not violations}
    else:
        raise ValueError(f"unknown subset_mode {subset_mode!r}")
    report.subsets["phi_nonnegative"] = phi_nonneg
    report.subsets["pass"] = report.subsets["pass"] and phi_nonneg
    return report


# --- primal-dual ratios -------------------------------------------------------------

def check_ratios(run_result, cert: DualCertificate, oracle: SubmodularOracle | None = None,
                 tol: float = TOL) -> list[Verdict]:
    """Compare the output's value against each part of the dual cost.

    Stack mode: f(M) >= half the summed b_v * w_ev, f(M) >= sum b_v phi_v / 2C,
    f(M) >= (1 - 1/C) mu, and (2C + C/(C-1)) f(M) >= dual cost.
    Preemptive mode: f(M) = w(M), w(P) <= w(M)/(C-1), f(M) >= (1 - 1/C) mu,
    f(M) >= sum phi_v / (2C + C/(C-1)), and (2C + 2C/(C-1)) f(M) >= dual cost.
    Linear mode: the greedy unwind beats sum b_v phi_v / 2C.
    """
    C = cert.C
    out: list[Verdict] = []
    if cert.mode == "stack":
        rec: RunRecord = run_result
        b = rec.instance.capacities
        fM = rec.matching.value(oracle)
        inc = math.fsum(b[s.edge.u] * s.increments[0] + b[s.edge.v] * s.increments[1]
                        for s in rec.stack)
        out.append(_verdict("stack_weight", fM, inc / 2, tol=tol))
        out.append(_verdict("potentials", fM, cert.vertex_cost / (2 * C), tol=tol))
        out.append(_verdict("stack_value", fM, (1 - 1 / C) * cert.mu, tol=tol))
        factor = monotone_factor(C)
        out.append(_verdict("combined", factor * fM, cert.cost, factor, tol=tol))
    elif cert.mode == "preemptive":
        st: PreemptiveState = run_result
        fM = st.matching.value(oracle)
        w = st.weights()
        wM = math.fsum(w[t] for t in st.matching.edges)
        wP = math.fsum(st.frozen.values())
        out.append(Verdict("telescoping", fM, wM, abs(fM - wM) <= tol * max(1.0, abs(fM))))
        out.append(_verdict("preempted_weight", wM / (C - 1), wP, tol=tol))
        out.append(_verdict("stack_value", fM, (1 - 1 / C) * cert.mu, tol=tol))
        out.append(_verdict("potentials", fM, cert.vertex_cost / (2 * C + C / (C - 1)), tol=tol))
        factor = preemptive_monotone_factor(C)
        out.append(_verdict("combined", factor * fM, cert.cost, factor, tol=tol))
    elif cert.mode == "linear":
        ws: WeightedStack = run_result
        greedy = math.fsum(ws.weights[e.t] for e in ws.record.matching)
        out.append(_verdict("potentials", greedy, cert.vertex_cost / (2 * C), tol=tol))
    else:
        raise ValueError(f"unknown certificate mode {cert.mode!r}")
    return out


def certify(run_result, instance: Instance, oracle: SubmodularOracle,
            subset_mode: str | None = None, limit: int = 12) -> FeasibilityReport:
    """build_dual + check_feasibility + check_ratios. Subsets are enumerated
    when the instance has at most ``limit`` edges, else the sufficient test runs."""
    cert = build_dual(run_result, oracle)
    if subset_mode is None:
        subset_mode = "exhaustive" if instance.num_edges <= limit else "sufficient"
    report = check_feasibility(cert, instance, oracle, subset_mode)
    report.ratios = check_ratios(run_result, cert, oracle)
    return report


# --- brute force optimum -----------------------------------------------------------

def brute_force_opt(instance: Instance, oracle: SubmodularOracle,
                    limit: int = BRUTE_FORCE_LIMIT) -> tuple[BMatching, float]:
    """Exhaustive search over feasible b-matchings.

    Ties within tolerance go to the lexicographically smallest tuple of
    arrival indices.
    """
    if instance.num_edges > limit:
        raise TooLargeError(f"{instance.num_edges} edges exceeds brute-force limit {limit}")
    edges = instance.edges
    caps = instance.capacities
    deg = [0] * instance.num_vertices
    chosen: list[int] = []
    best_val = -math.inf
    best_ids: tuple[int, ...] = ()

    def dfs(i, state):
        nonlocal best_val, best_ids
        if i == len(edges):
            val = state.value
            ids = tuple(chosen)
            if val > best_val + TOL or (val >= best_val - TOL and ids < best_ids):
                best_val, best_ids = val, ids
            return
        e = edges[i]
        if deg[e.u] < caps[e.u] and deg[e.v] < caps[e.v]:
            deg[e.u] += 1
            deg[e.v] += 1
            chosen.append(e.t)
            nxt = state.copy()
            oracle.push_accept(nxt, e.key)
            dfs(i + 1, nxt)
            chosen.pop()
            deg[e.u] -= 1
            deg[e.v] -= 1
        dfs(i + 1, state)

    dfs(0, oracle.new_state())
    M = BMatching(caps)
    for t in best_ids:
        M.add(instance.edge(t))
    return M, oracle.eval(e.key for e in M)


# --- Monte Carlo checks -------------------------------------------------------------

def trial_seeds(seed: int, trials: int) -> list[int]:
    """Independent per-trial seeds spawned from one master seed."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def mean_se(samples) -> tuple[float, float]:
    x = np.asarray(samples, dtype=float)
    mean = math.fsum(x) / len(x)
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return mean, se


@dataclass
class ExpectedFeasibilityReport:
    trials: int
    C: float
    q: float
    within_hypothesis: bool
    phi_mean: dict[int, float]
    phi_se: dict[int, float]
    lam_mean: dict[int, float]
    lam_se: dict[int, float]
    flagged: list[int]
    f_mean: float
    f_se: float

    @property
    def label(self) -> str:
        return "within lemma hypothesis" if self.within_hypothesis else "outside lemma hypothesis"


def mc_expected_feasibility(instance: Instance, oracle: SubmodularOracle, C: float, q: float,
                            trials: int = 10_000, seed: int = 0, bands: float = 3.0
                            ) -> ExpectedFeasibilityReport:
    """Estimate E[phi_u + phi_v] and E[lambda_e] for every edge over repeated runs.

    An edge is flagged when its estimated slack falls below ``-bands``
    combined standard errors. The analysis covers q in [1/(2C+1), 1/2];
    other q still run but are labelled outside the hypothesis.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if trials < 1000:
        warnings.warn("fewer than 1000 trials; standard errors will be loose", stacklevel=2)
    within = 1 / (2 * C + 1) - TOL <= q <= 0.5 + TOL
    if not within:
        warnings.warn(f"q={q} is outside [1/(2C+1), 1/2]", stacklevel=2)
    m = instance.num_edges
    cover = np.zeros((trials, m))
    lam = np.zeros((trials, m))
    fvals = np.zeros(trials)
    for i, s in enumerate(trial_seeds(seed, trials)):
        rec = run(instance, oracle, AlgoParams(C=C, q=q, seed=s), certify=True)
        phi = rec.potentials
        for e in instance.edges:
            cover[i, e.t - 1] = C * (phi.get(e.u, 0.0) + phi.get(e.v, 0.0))
        for e, g, _ in rec.skipped:
            lam[i, e.t - 1] = g
        fvals[i] = rec.matching.value(oracle)
    phi_mean, phi_se, lam_mean, lam_se, flagged = {}, {}, {}, {}, []
    for e in instance.edges:
        pm, ps = mean_se(cover[:, e.t - 1])
        lm, ls = mean_se(lam[:, e.t - 1])
        phi_mean[e.t], phi_se[e.t], lam_mean[e.t], lam_se[e.t] = pm, ps, lm, ls
        if pm - lm < -(bands * math.hypot(ps, ls) + TOL):
            flagged.append(e.t)
    f_mean, f_se = mean_se(fvals)
    return ExpectedFeasibilityReport(trials, C, q, within, phi_mean, phi_se, lam_mean, lam_se,
                                     flagged, f_mean, f_se)


@dataclass
class SubsampleReport:
    q: float
    trials: int
    h_empty: float
    mean: float
    se: float
    bound: float  # (1 - q) * h(empty)
    passed: bool


def subsample_lemma_check(oracle: SubmodularOracle, base, q: float, trials: int = 1000,
                          seed: int = 0, fixed=(), bands: float = 3.0) -> SubsampleReport:
    """Sample B from ``base`` with independent inclusion probability q and test
    E[h(B)] >= (1 - q) h(empty) for h(B) = f(B | fixed)."""
    base = list(base)
    fixed = list(fixed)
    rng = np.random.default_rng(seed)
    h_empty = oracle.eval(fixed)
    picks = rng.random((trials, len(base))) < q
    vals = [oracle.eval(fixed + [k for k, take in zip(base, row) if take]) for row in picks]
    mean, se = mean_se(vals)
    bound = (1 - q) * h_empty
    return SubsampleReport(q, trials, h_empty, mean, se, bound,
                           mean >= bound - bands * se - TOL)
