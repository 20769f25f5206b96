import pytest
from hypothesis import given

from submatch.instance import (BMatching, Edge, Instance, StreamFormatError, format_stream,
                               greedy_maximal_bmatching, is_feasible, max_degree_violation,
                               neighbors_in, parse_stream)

from conftest import small_instances


def test_minimal_document():
    inst = parse_stream("msbm 1\nn 2\nb uniform 1\nm 1\ne 0 1\n")
    assert inst.num_edges == 1
    e = inst.edges[0]
    assert (e.u, e.v, e.t, e.key) == (0, 1, 1, 0)


def test_empty_edge_section():
    inst = parse_stream("msbm 1\nn 3\nb uniform 2\nm 0\n")
    assert inst.num_edges == 0
    assert inst.capacities == (2, 2, 2)


def test_self_loop_reports_line():
    text = "msbm 1\nn 4\n# comment\nb uniform 1\nm 2\ne 0 1\ne 3 3\n"
    with pytest.raises(StreamFormatError, match="self-loop at line 7"):
        parse_stream(text)


@pytest.mark.parametrize("text, msg", [
    ("", "missing 'msbm'"),
    ("msbm 2\nn 2\nb uniform 1\nm 0\n", "unsupported"),
    ("msbm 1\nn 2\nb uniform 1\nm 2\ne 0 1\n", "declares 2 edges"),
    ("msbm 1\nn 2\nb uniform 1\nm 1\ne 0 5\n", "out of range"),
    ("msbm 1\nn 2\nb list 1\nm 0\n", "needs 2 capacities"),
    ("msbm 1\nn 2\nb uniform 0\nm 0\n", "non-positive"),
    ("msbm 1\nn x\nb uniform 1\nm 0\n", "integer"),
])
def test_malformed_documents(text, msg):
    with pytest.raises(StreamFormatError, match=msg):
        parse_stream(text)


def test_capacity_list_and_keys():
    inst = parse_stream("msbm 1\nn 3\nb list 1 2 3\nm 2\ne 0 1 7\ne 1 2 7\n")
    assert inst.capacities == (1, 2, 3)
    assert [e.key for e in inst.edges] == [7, 7]


def test_neighbors():
    a, b, c, d = 0, 1, 2, 3
    e = Edge(a, b, 9, 9)
    bc, cd, ac, bd = Edge(b, c, 1, 1), Edge(c, d, 2, 2), Edge(a, c, 3, 3), Edge(b, d, 4, 4)
    assert neighbors_in(e, [bc]) == {bc}
    assert neighbors_in(e, [cd]) == set()
    assert neighbors_in(e, [ac, bd, cd]) == {ac, bd}


def test_star_feasibility():
    caps = [2, 1, 1, 1]
    star = Instance.from_pairs(4, [(0, 1), (0, 2), (0, 3)], caps)
    assert not is_feasible([1, 2, 3], star)
    assert is_feasible([1, 3], star)
    assert is_feasible([], star)
    assert max_degree_violation(star.edges, caps) == 1


def test_bmatching_rejects_overflow():
    inst = Instance.from_pairs(3, [(0, 1), (0, 2)])
    M = BMatching(inst.capacities)
    M.add(inst.edges[0])
    assert not M.can_add(inst.edges[1])
    with pytest.raises(ValueError):
        M.add(inst.edges[1])


def test_instance_validation():
    with pytest.raises(ValueError):
        Instance.from_pairs(2, [(0, 0)])
    with pytest.raises(ValueError):
        Instance.from_pairs(2, [(0, 1)], [1])
    with pytest.raises(KeyError):
        Instance.from_pairs(2, [(0, 1)]).edge(2)


@given(small_instances(max_b=3))
def test_format_round_trip(inst):
    assert parse_stream(format_stream(inst, ["note"])) == inst


@given(small_instances(max_b=3))
def test_greedy_is_maximal(inst):
    M = greedy_maximal_bmatching(inst)
    assert is_feasible(M.ids, inst)
    for e in inst.edges:
        assert e in M or not M.can_add(e)
