import itertools
import math

import pytest
from hypothesis import strategies as st

from submatch.instance import Instance
from submatch.oracles import CoverageOracle, LinearOracle


def all_bmatchings(instance):
    """Every feasible edge subset, by plain enumeration."""
    for r in range(instance.num_edges + 1):
        for combo in itertools.combinations(instance.edges, r):
            deg = [0] * instance.num_vertices
            ok = True
            for e in combo:
                deg[e.u] += 1
                deg[e.v] += 1
                if deg[e.u] > instance.capacities[e.u] or deg[e.v] > instance.capacities[e.v]:
                    ok = False
                    break
            if ok:
                yield combo


def enum_opt(instance, oracle):
    return max(oracle.eval(e.key for e in combo) for combo in all_bmatchings(instance))


@st.composite
def small_instances(draw, max_vertices=6, max_edges=8, max_b=1):
    n = draw(st.integers(2, max_vertices))
    m = draw(st.integers(0, max_edges))
    pairs = []
    for _ in range(m):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 2))
        pairs.append((u, v + (v >= u)))
    caps = [draw(st.integers(1, max_b)) for _ in range(n)]
    return Instance.from_pairs(n, pairs, caps)


@st.composite
def coverage_cases(draw, max_vertices=6, max_edges=8, max_b=1, universe=8):
    inst = draw(small_instances(max_vertices, max_edges, max_b))
    sets = {e.key: draw(st.sets(st.integers(0, universe - 1), min_size=1, max_size=4))
            for e in inst.edges}
    weights = {x: float(draw(st.integers(1, 9))) for x in range(universe)}
    return inst, CoverageOracle(universe, sets, weights)


@st.composite
def linear_cases(draw, max_vertices=6, max_edges=8, max_b=1):
    inst = draw(small_instances(max_vertices, max_edges, max_b))
    weights = {e.key: float(draw(st.integers(1, 50))) for e in inst.edges}
    return inst, LinearOracle(weights)


@pytest.fixture
def triangle():
    # a=0, b=1, c=2: ab, bc, ac
    return Instance.from_pairs(3, [(0, 1), (1, 2), (0, 2)])


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


# --- acceptance report ------------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
