"""Graph stream data model: instances, b-matchings and the ``msbm`` text format.

A stream file looks like::

    msbm 1
    n 4
    b uniform 1
    m 2
    e 0 1 0
    e 2 3 1

Arrival order is line order. ``#`` starts a comment.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

FORMAT_MAGIC = "msbm"
FORMAT_VERSION = 1


class StreamFormatError(ValueError):
    """Raised for a malformed stream document; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    t: int  # arrival index, 1-based
    key: int  # oracle key

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)

    def touches(self, other: "Edge") -> bool:
        return self.u in (other.u, other.v) or self.v in (other.u, other.v)


@dataclass(frozen=True)
class Instance:
    num_vertices: int
    capacities: tuple[int, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.num_vertices < 1:
            raise ValueError("num_vertices must be positive")
        if len(self.capacities) != self.num_vertices:
            raise ValueError("capacity vector length must equal num_vertices")
        for v, b in enumerate(self.capacities):
            if b < 1:
                raise ValueError(f"capacity of vertex {v} must be >= 1, got {b}")
        for pos, e in enumerate(self.edges, start=1):
            if e.t != pos:
                raise ValueError(f"edge at position {pos} has arrival index {e.t}")
            if e.u == e.v:
                raise ValueError(f"self-loop at arrival {e.t}")
            for x in e.endpoints:
                if not 0 <= x < self.num_vertices:
                    raise ValueError(f"vertex {x} out of range at arrival {e.t}")
            if e.key < 0:
                raise ValueError(f"negative oracle key at arrival {e.t}")

    @classmethod
    def from_pairs(
        cls,
        num_vertices: int,
        pairs: Iterable[tuple[int, int]] | Iterable[tuple[int, int, int]],
        capacities: int | Sequence[int] = 1,
    ) -> "Instance":
        """Build an instance from ``(u, v)`` or ``(u, v, key)`` tuples in arrival order.

        Without explicit keys, edge ``t`` gets key ``t - 1``.
        """
        edges = []
        for t, p in enumerate(pairs, start=1):
            key = p[2] if len(p) > 2 else t - 1
            edges.append(Edge(int(p[0]), int(p[1]), t, int(key)))
        if isinstance(capacities, int):
            caps = (capacities,) * num_vertices
        else:
            caps = tuple(int(b) for b in capacities)
        return cls(num_vertices, caps, tuple(edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def uniform_capacity(self) -> int | None:
        first = self.capacities[0]
        return first if all(b == first for b in self.capacities) else None

    def edge(self, t: int) -> Edge:
        if not 1 <= t <= len(self.edges):
            raise KeyError(f"unknown edge id {t}")
        return self.edges[t - 1]

    def degrees(self) -> Counter:
        deg: Counter = Counter()
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg


@dataclass
class BMatching:
    """A set of edges (by arrival index) kept feasible against the capacities."""

    capacities: tuple[int, ...]
    edges: dict[int, Edge] = field(default_factory=dict)
    degree: Counter = field(default_factory=Counter)

    def can_add(self, e: Edge) -> bool:
        return (
            e.t not in self.edges
            and self.degree[e.u] < self.capacities[e.u]
            and self.degree[e.v] < self.capacities[e.v]
        )

    def add(self, e: Edge) -> None:
        if not self.can_add(e):
            raise ValueError(f"adding edge {e.t} would violate a capacity")
        self.edges[e.t] = e
        self.degree[e.u] += 1
        self.degree[e.v] += 1

    def remove(self, e: Edge) -> None:
        del self.edges[e.t]
        self.degree[e.u] -= 1
        self.degree[e.v] -= 1

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, e: Edge) -> bool:
        return e.t in self.edges

    def __iter__(self):
        return iter(sorted(self.edges.values(), key=lambda e: e.t))

    @property
    def ids(self) -> list[int]:
        return sorted(self.edges)

    def keys(self) -> list[int]:
        return [e.key for e in self]

    def value(self, oracle) -> float:
        return oracle.eval(self.keys())


def neighbors_in(e: Edge, M: Iterable[Edge]) -> set[Edge]:
    """Edges of ``M`` sharing an endpoint with ``e``, excluding ``e`` itself."""
    return {x for x in M if x.t != e.t and e.touches(x)}


def is_feasible(edge_ids: Iterable[int], instance: Instance) -> bool:
    deg: Counter = Counter()
    for t in edge_ids:
        e = instance.edge(t)
        deg[e.u] += 1
        deg[e.v] += 1
    return all(d <= instance.capacities[v] for v, d in deg.items())


def max_degree_violation(edges: Iterable[Edge], capacities: Sequence[int]) -> int:
    deg: Counter = Counter()
    for e in edges:
        deg[e.u] += 1
        deg[e.v] += 1
    return max((d - capacities[v] for v, d in deg.items()), default=0)


def greedy_maximal_bmatching(instance: Instance) -> BMatching:
    """Maximal b-matching taking edges in arrival order."""
    M = BMatching(instance.capacities)
    for e in instance.edges:
        if M.can_add(e):
            M.add(e)
    return M


# --- text format -----------------------------------------------------------

def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise StreamFormatError(lineno, f"{what} must be an integer, got {tok!r}") from None


def parse_stream(text: str) -> Instance:
    lines = list(_content_lines(text))
    last = lines[-1][0] if lines else 1

    def header(i: int, tag: str):
        if i >= len(lines):
            raise StreamFormatError(last, f"missing '{tag}' header")
        lineno, toks = lines[i]
        if toks[0] != tag:
            raise StreamFormatError(lineno, f"expected '{tag}' header, got {toks[0]!r}")
        return lineno, toks

    lineno, toks = header(0, FORMAT_MAGIC)
    if len(toks) != 2 or toks[1] != str(FORMAT_VERSION):
        raise StreamFormatError(lineno, f"unsupported format header {' '.join(toks)!r}")

    lineno, toks = header(1, "n")
    if len(toks) != 2:
        raise StreamFormatError(lineno, "malformed 'n' header")
    n = _int(toks[1], lineno, "n")
    if n < 1:
        raise StreamFormatError(lineno, "n must be positive")

    lineno, toks = header(2, "b")
    if len(toks) < 3 or toks[1] not in ("uniform", "list"):
        raise StreamFormatError(lineno, "expected 'b uniform <k>' or 'b list ...'")
    if toks[1] == "uniform":
        if len(toks) != 3:
            raise StreamFormatError(lineno, "malformed 'b uniform' header")
        caps = (_int(toks[2], lineno, "capacity"),) * n
    else:
        if len(toks) != n + 2:
            raise StreamFormatError(lineno, f"'b list' needs {n} capacities, got {len(toks) - 2}")
        caps = tuple(_int(x, lineno, "capacity") for x in toks[2:])
    if any(b < 1 for b in caps):
        raise StreamFormatError(lineno, "non-positive capacity")

    lineno, toks = header(3, "m")
    if len(toks) != 2:
        raise StreamFormatError(lineno, "malformed 'm' header")
    m = _int(toks[1], lineno, "m")
    if m < 0:
        raise StreamFormatError(lineno, "m must be nonnegative")

    body = lines[4:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else last
        raise StreamFormatError(where, f"header declares {m} edges, found {len(body)}")
    edges = []
    for t, (lineno, toks) in enumerate(body, start=1):
        if toks[0] != "e" or len(toks) not in (3, 4):
            raise StreamFormatError(lineno, "expected 'e <u> <v> <key>'")
        u = _int(toks[1], lineno, "vertex id")
        v = _int(toks[2], lineno, "vertex id")
        key = _int(toks[3], lineno, "key") if len(toks) == 4 else t - 1
        for x in (u, v):
            if not 0 <= x < n:
                raise StreamFormatError(lineno, f"vertex id {x} out of range [0, {n})")
        if u == v:
            raise StreamFormatError(lineno, f"self-loop at line {lineno}")
        if key < 0:
            raise StreamFormatError(lineno, "key must be nonnegative")
        edges.append(Edge(u, v, t, key))
    return Instance(n, caps, tuple(edges))


def format_stream(instance: Instance, comments: Sequence[str] = ()) -> str:
    """Canonical text form; ``parse_stream(format_stream(x)) == x``."""
    out = [f"# {c}" for c in comments]
    out.append(f"{FORMAT_MAGIC} {FORMAT_VERSION}")
    out.append(f"n {instance.num_vertices}")
    k = instance.uniform_capacity
    if k is not None:
        out.append(f"b uniform {k}")
    else:
        out.append("b list " + " ".join(map(str, instance.capacities)))
    out.append(f"m {instance.num_edges}")
    out.extend(f"e {e.u} {e.v} {e.key}" for e in instance.edges)
    return "\n".join(out) + "\n"


def read_instance(path: str | Path) -> Instance:
    return parse_stream(Path(path).read_text(encoding="utf-8"))


def write_instance(path: str | Path, instance: Instance, comments: Sequence[str] = ()) -> None:
    Path(path).write_text(format_stream(instance, comments), encoding="utf-8")
