import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from submatch.instance import Instance, is_feasible
from submatch.mwbm import (TooLargeError, exact_mwbm, linear_dual_violations, run_mwbm,
                           run_stack_phase)
from submatch.certificates import brute_force_opt
from submatch.oracles import LinearOracle

from conftest import all_bmatchings, linear_cases


def weighted(inst, w):
    return [(e, w[e.key]) for e in inst.edges]


def test_single_edge_stack():
    inst = Instance.from_pairs(2, [(0, 1)])
    ws = run_stack_phase(inst, {0: 5}, eps=1.0)
    assert len(ws.edges) == 1
    assert ws.potentials == {0: 5, 1: 5}


def test_disjoint_edges_both_pushed():
    inst = Instance.from_pairs(4, [(0, 1), (2, 3)])
    ws = run_stack_phase(inst, {0: 5, 1: 7}, eps=1.0)
    assert len(ws.edges) == 2


def test_path_second_edge_skipped():
    # C = 1 + eps/2 = 1.5 and g = 1 <= 1.5 * 1
    inst = Instance.from_pairs(3, [(0, 1), (1, 2)])
    ws = run_stack_phase(inst, {0: 1, 1: 1}, eps=1.0)
    assert ws.C == 1.5
    assert [e.t for e in ws.edges] == [1]


def test_exact_triangle():
    tri = {0: 3, 1: 4, 2: 5}
    inst = Instance.from_pairs(3, [(0, 1), (1, 2), (0, 2)])
    M, w = exact_mwbm(weighted(inst, tri), (1, 1, 1))
    assert M.ids == [3] and w == 5
    M, w = exact_mwbm(weighted(inst, tri), (2, 2, 2))
    assert M.ids == [1, 2, 3] and w == 12


def test_exact_path():
    inst = Instance.from_pairs(4, [(0, 1), (1, 2), (2, 3)])
    M, w = exact_mwbm(weighted(inst, {0: 3, 1: 4, 2: 3}), (1, 1, 1, 1))
    assert M.ids == [1, 3] and w == 6


def test_exact_refuses_large():
    inst = Instance.from_pairs(2, [(0, 1)] * 5)
    with pytest.raises(TooLargeError):
        exact_mwbm(weighted(inst, {k: 1 for k in range(5)}), (1, 1), limit=4)


def test_opt_inside_stack_is_recovered():
    inst = Instance.from_pairs(4, [(0, 1), (2, 3)])
    f = LinearOracle({0: 2, 1: 9})
    opt, _ = brute_force_opt(inst, f)
    M, rep = run_mwbm(inst, f, 0.5, opt=opt)
    assert rep.weight == rep.opt_weight == 11
    assert rep.passed


def test_single_edge_mwbm():
    inst = Instance.from_pairs(2, [(0, 1)])
    M, rep = run_mwbm(inst, {0: 4.5}, 0.1)
    assert rep.weight == 4.5 and len(M) == 1


def test_stack_edges_can_break_the_linear_dual():
    # capacity 3 everywhere: increments are a third of the reduced gain
    inst = Instance.from_pairs(2, [(0, 1)], 3)
    ws = run_stack_phase(inst, {0: 3.0}, eps=0.5)
    assert ws.potentials == {0: 1.0, 1: 1.0}
    assert linear_dual_violations(ws) == []
    assert len(linear_dual_violations(ws, stack_only=True)) == 1


@given(linear_cases(max_edges=8, max_b=3))
@settings(max_examples=100, deadline=None)
def test_exact_matches_enumeration(case):
    inst, f = case
    M, w = exact_mwbm(weighted(inst, f.weights), inst.capacities)
    assert is_feasible(M.ids, inst)
    best = max(math.fsum(f.weights[e.key] for e in combo) for combo in all_bmatchings(inst))
    assert w == pytest.approx(best)


@given(linear_cases(max_edges=9, max_b=3), st.sampled_from([0.1, 0.5, 1.0]))
@settings(max_examples=100, deadline=None)
def test_mwbm_checks_hold(case, eps):
    inst, f = case
    opt, _ = brute_force_opt(inst, f)
    M, rep = run_mwbm(inst, f, eps, opt=opt)
    assert is_feasible(M.ids, inst)
    assert rep.passed, rep.checks
