"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the summary lines are
printed at the end of the session).
"""

import math
from functools import lru_cache

import pytest

from submatch.certificates import (brute_force_opt, build_dual, certify, check_ratios,
                                   mc_expected_feasibility, subsample_lemma_check)
from submatch.generators import GenSpec, gen_random, gen_tight
from submatch.msbm import (AlgoParams, Decision, StackRun, monotone_factor, nonmonotone_factor,
                           preset, resource_report, run)
from submatch.mwbm import run_mwbm, run_stack_phase
from submatch.preemptive import run_preemptive

pytestmark = pytest.mark.acceptance

TOL = 1e-9
N_COVERAGE = 500
N_LINEAR = 500
N_COVLIN = 20
MC_TRIALS = 10_000


@lru_cache(maxsize=None)
def coverage_set():
    """Criterion-1 instances: b = 1, 6 to 14 edges, unit or integer element weights."""
    out = []
    for seed in range(N_COVERAGE):
        spec = GenSpec("coverage_random", seed=seed, num_vertices=5 + seed % 4,
                       num_edges=6 + seed % 9, universe=12,
                       element_weights=(1, 9) if seed % 2 else None)
        inst, f = gen_random(spec)
        opt = brute_force_opt(inst, f)[1]
        out.append((inst, f, opt))
    return out


@lru_cache(maxsize=None)
def tight_case():
    inst, f = gen_tight(2, 12, 1e-3, 1e-4)
    opt = brute_force_opt(inst, f, limit=25)[1]
    return inst, f, opt


@lru_cache(maxsize=None)
def covlin_set():
    out = []
    for seed in range(N_COVLIN):
        spec = GenSpec("covlin_random", seed=1000 + seed, num_vertices=6, num_edges=8 + seed % 5,
                       universe=10)
        inst, f = gen_random(spec)
        opt_M, opt = brute_force_opt(inst, f)
        out.append((inst, f, opt_M, opt))
    return out


@lru_cache(maxsize=None)
def covlin_mc():
    p = preset("nonmonotone")
    return [mc_expected_feasibility(inst, f, p.C, p.q, trials=MC_TRIALS, seed=i)
            for i, (inst, f, _, _) in enumerate(covlin_set())]


def test_criterion_1_monotone_guarantee(acceptance):
    factor = 3 + 2 * math.sqrt(2)
    p = preset("monotone")
    assert monotone_factor(p.C) == pytest.approx(factor)
    worst, fails = 0.0, 0
    for inst, f, opt in coverage_set():
        fM = run(inst, f, p).matching.value(f)
        fails += fM < opt / factor - TOL
        worst = max(worst, opt / fM if fM > 0 else math.inf)
    ok = acceptance(1, fails == 0 and len(coverage_set()) >= 500,
                    f"{len(coverage_set())} coverage instances, worst OPT/f(M) = {worst:.4f} "
                    f"<= {factor:.4f}, failures {fails}")
    assert ok


def test_criterion_2_tightness(acceptance):
    inst, f, opt = tight_case()
    driver = StackRun(inst, f, AlgoParams(C=2, q=1), certify=True)
    decisions = [driver.arrival_step(e) for e in inst.edges]
    rec = driver.finish()
    labels = [f.label(e.key) for e in inst.edges]
    pushed = sorted(lab for lab, d in zip(labels, decisions) if d is Decision.PUSHED)
    trace_ok = (pushed == sorted(f"d_{i}" for i in range(1, 13))
                and all(d is Decision.SKIPPED for lab, d in zip(labels, decisions)
                        if lab.startswith("e_"))
                and [f.label(e.key) for e in rec.matching] == ["d_12"])
    ratio = opt / rec.matching.value(f)
    ok = acceptance(2, trace_ok and ratio >= 0.95 * 6,
                    f"trace {'exact' if trace_ok else 'WRONG'}, M = d_12, "
                    f"OPT/f(M) = {ratio:.4f} >= {0.95 * 6:.2f}")
    assert ok


def test_criterion_3_dual_feasibility(acceptance):
    p = preset("monotone")
    runs = [(inst, f, run(inst, f, p, certify=True)) for inst, f, _ in coverage_set()]
    inst, f, _ = tight_case()
    runs.append((inst, f, run(inst, f, AlgoParams(C=2), certify=True)))
    violations, exhaustive = 0, 0
    for inst, f, rec in runs:
        mode = "exhaustive" if inst.num_edges <= 12 else "sufficient"
        exhaustive += mode == "exhaustive"
        rep = certify(rec, inst, f, subset_mode=mode)
        violations += len(rep.edge_violations) + len(rep.subsets["violations"])
        violations += not rep.subsets["phi_nonnegative"]
    ok = acceptance(3, violations == 0,
                    f"{len(runs)} q=1 runs ({exhaustive} with every subset enumerated), "
                    f"violations {violations}")
    assert ok


def _ratio_failures(rec, f, with_mu):
    verdicts = {v.name: v for v in check_ratios(rec, build_dual(rec, f), f)}
    names = ["stack_weight", "potentials"] + (["stack_value"] if with_mu else [])
    return sum(not verdicts[n].passed for n in names)


def test_criterion_4_ratio_lemmas(acceptance):
    fails, count = 0, 0
    mono = preset("monotone")
    for inst, f, _ in coverage_set():
        fails += _ratio_failures(run(inst, f, mono, certify=True), f, True)
        count += 1
    inst, f, _ = tight_case()
    fails += _ratio_failures(run(inst, f, AlgoParams(C=2), certify=True), f, True)
    count += 1
    # sampled runs: the nonmonotone preset on both instance sets
    for i, (inst, f, _) in enumerate(coverage_set()):
        fails += _ratio_failures(run(inst, f, preset("nonmonotone", seed=i), certify=True), f, False)
        count += 1
    for i, (inst, f, _, _) in enumerate(covlin_set()):
        for s in range(200):
            p = preset("nonmonotone", seed=10_000 * i + s)
            fails += _ratio_failures(run(inst, f, p, certify=True), f, False)
            count += 1
    ok = acceptance(4, fails == 0, f"{count} runs (q=1 and q<1), failures {fails}")
    assert ok


def test_criterion_5_nonmonotone_guarantee(acceptance):
    factor = 4 + 2 * math.sqrt(3)
    assert nonmonotone_factor(preset("nonmonotone").C) == pytest.approx(factor)
    fails, worst = 0, math.inf
    for (inst, f, _, opt), mc in zip(covlin_set(), covlin_mc()):
        margin = mc.f_mean + 3 * mc.f_se - opt / factor
        worst = min(worst, margin)
        fails += margin < 0
    ok = acceptance(5, fails == 0,
                    f"{N_COVLIN} covlin instances x {MC_TRIALS} trials, "
                    f"min (mean f(M) + 3 SE - OPT/{factor:.4f}) = {worst:.4f}, failures {fails}")
    assert ok


def test_criterion_6_expected_dual_feasibility(acceptance):
    flagged = sum(len(mc.flagged) for mc in covlin_mc())
    inside = all(mc.within_hypothesis for mc in covlin_mc())
    ok = acceptance(6, flagged == 0 and inside,
                    f"{N_COVLIN} covlin instances x {MC_TRIALS} trials, flagged edges {flagged}")
    assert ok


def test_criterion_7_mwbm(acceptance):
    fails, worst, count = 0, 0.0, 0
    for seed in range(N_LINEAR):
        spec = GenSpec("linear_random", seed=seed, num_vertices=5 + seed % 4,
                       num_edges=6 + seed % 9, capacity=(1, 3))
        inst, f = gen_random(spec)
        opt_M, opt = brute_force_opt(inst, f)
        for eps in (0.1, 1.0):
            M, rep = run_mwbm(inst, f, eps, opt=opt_M)
            cert_ok = certify(run_stack_phase(inst, f, eps), inst, f).ok
            fails += not (rep.passed and cert_ok)
            worst = max(worst, opt / rep.weight)
            count += 1
    ok = acceptance(7, fails == 0,
                    f"{count} runs (b <= 3, eps in {{0.1, 1}}), worst OPT/w(M) = {worst:.4f}, "
                    f"w(M) >= w(OPT & S) and dual checks, failures {fails}")
    assert ok


def test_criterion_8_preemptive(acceptance):
    fails, worst = 0, 0.0
    for inst, f, opt in coverage_set():
        M, st = run_preemptive(inst, f, C=2.0, q=1.0, certify=True)
        fM = M.value(f)
        verdicts = {v.name: v for v in check_ratios(st, build_dual(st, f), f)}
        lemmas = all(verdicts[n].passed for n in ("telescoping", "preempted_weight", "stack_value"))
        fails += not (lemmas and 8 * fM >= opt - TOL)
        worst = max(worst, opt / fM if fM > 0 else math.inf)
    ok = acceptance(8, fails == 0,
                    f"{len(coverage_set())} instances, worst OPT/f(M) = {worst:.4f} <= 8, "
                    f"preempted-weight and f(M) >= (1-1/C) f(S) on every run, failures {fails}")
    assert ok


def test_criterion_9_subsampling(acceptance):
    fails, count = 0, 0
    for i, (inst, f, opt_M, _) in enumerate(covlin_set()):
        fixed = [e.key for e in opt_M]
        rest = sorted(f.keys - set(fixed))
        for q in (0.21, 0.25, 0.5):
            for base, fx in ((sorted(f.keys), []), (rest, fixed)):
                rep = subsample_lemma_check(f, base, q, trials=1000, seed=100 * i + int(q * 100),
                                            fixed=fx)
                fails += not rep.passed
                count += 1
    ok = acceptance(9, fails == 0,
                    f"{count} checks (h(B) = f(B) and f(B | OPT), q in {{0.21, 0.25, 0.5}}), "
                    f"failures {fails}")
    assert ok


def test_criterion_10_resources(acceptance):
    spec = GenSpec("coverage_random", seed=2024, num_vertices=2000, num_edges=100_000,
                   universe=20_000, element_weights=(1, 100))
    inst, f = gen_random(spec)
    f.reset_counters()
    rec = run(inst, f, AlgoParams(C=1.5))
    rep = resource_report(rec, f)
    one_call = rep.marginal_calls == inst.num_edges == f.marginal_calls
    proxy_ok = rep.memory_proxy <= 3 * rep.stack_size and rep.stack_size <= rep.cover_bound
    ok = acceptance(10, rep.incidence_ok and one_call and rep.calls_ok and proxy_ok,
                    f"max incidence {rep.worst_incidence} vs bound {rep.worst_bound:.2f} "
                    f"(fmax/fmin = {rep.fmax:g}/{rep.fmin:g}), one marginal per arrival: {one_call}, "
                    f"|S| = {rep.stack_size} <= {rep.cover_bound:g}, memory proxy {rep.memory_proxy}"
                    f" = {rep.constant:.3f} * M_greedy * log(fmax/fmin)")
    assert ok


def test_criterion_11_linear_matching(acceptance):
    eps = 0.1
    p = preset("mwm_linear", eps=eps)
    fails, worst = 0, 0.0
    for seed in range(N_LINEAR):
        spec = GenSpec("linear_random", seed=50_000 + seed, num_vertices=5 + seed % 4,
                       num_edges=6 + seed % 9)
        inst, f = gen_random(spec)
        opt = brute_force_opt(inst, f)[1]
        w = run(inst, f, p).matching.value(f)
        fails += w < opt / (2 + eps) - TOL
        worst = max(worst, opt / w)
    ok = acceptance(11, fails == 0,
                    f"{N_LINEAR} instances with C = 1.1, worst OPT/w(M) = {worst:.4f} <= 2.1 "
                    f"(generic bound {monotone_factor(p.C):.1f}), failures {fails}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
