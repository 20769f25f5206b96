"""Submodular set-function oracles over integer edge keys.

Every oracle is a set function on keys. Evaluation goes through
:meth:`SubmodularOracle.eval`; streaming algorithms instead keep a
:class:`StreamMarginalState` holding the accepted prefix and ask for the
marginal gain of one more key, which costs a single evaluation.

Shipped families:

* ``linear``   -- f(T) = sum of per-key weights.
* ``coverage`` -- weighted coverage of a finite universe.
* ``covlin``   -- coverage plus the total cost of keys *not* in T; submodular,
  nonnegative, and non-monotone whenever a key costs more than it covers.
* ``tight``    -- the capped-pair family on which the stack algorithm's
  analysis is tight (see :func:`make_tight_oracle`).
* ``scaled_sum`` -- nonnegative combination of other oracles.
"""

from __future__ import annotations

import itertools
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .instance import Edge, Instance
from .numeric import TOL


class UnknownKeyError(KeyError):
    pass


class OracleFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class StreamMarginalState:
    """Accepted keys in arrival order plus an oracle-specific summary.

    ``value`` is always f(accepted keys). Summaries are immutable, so
    :meth:`copy` is cheap.
    """

    __slots__ = ("keys", "value", "summary")

    def __init__(self, keys: list[int], value: float, summary):
        self.keys = keys
        self.value = value
        self.summary = summary

    def copy(self) -> "StreamMarginalState":
        return StreamMarginalState(list(self.keys), self.value, self.summary)

    def __len__(self):
        return len(self.keys)

    def __repr__(self):
        return f"StreamMarginalState(keys={self.keys}, value={self.value})"


class SubmodularOracle:
    """Base class. Subclasses implement ``_value``; ``_gain``/``_absorb`` are
    optional incremental fast paths over an immutable summary (default: the
    frozenset of accepted keys)."""

    kind = "abstract"
    monotone = False

    def __init__(self):
        self.evaluations = 0
        self.marginal_calls = 0

    # -- subclass hooks ----------------------------------------------------
    @property
    def keys(self) -> frozenset[int]:
        raise NotImplementedError

    def _value(self, T: frozenset[int]) -> float:
        raise NotImplementedError

    def _empty_summary(self):
        return frozenset()

    def _gain(self, summary, key: int) -> float:
        if key in summary:
            return 0.0
        return self._value(summary | {key}) - self._value(summary)

    def _absorb(self, summary, key: int):
        return summary | {key}

    # -- public API ----------------------------------------------------------
    def _check(self, key: int) -> None:
        if key not in self.keys:
            raise UnknownKeyError(key)

    def eval(self, T: Iterable[int]) -> float:
        T = frozenset(T)
        for k in T:
            self._check(k)
        self.evaluations += 1
        return self._value(T)

    def new_state(self) -> StreamMarginalState:
        return StreamMarginalState([], self._value(frozenset()), self._empty_summary())

    def state_of(self, keys: Iterable[int]) -> StreamMarginalState:
        state = self.new_state()
        for k in keys:
            self.push_accept(state, k)
        return state

    def stream_marginal(self, state: StreamMarginalState, key: int) -> float:
        """f(key : state) -- gain of ``key`` over the accepted prefix. Pure."""
        self._check(key)
        self.marginal_calls += 1
        self.evaluations += 1
        return self._gain(state.summary, key)

    def push_accept(self, state: StreamMarginalState, key: int,
                    gain: float | None = None) -> StreamMarginalState:
        """Append ``key``; ``gain`` may pass an already computed stream marginal."""
        self._check(key)
        if gain is None:
            gain = self._gain(state.summary, key)
        state.keys.append(key)
        state.summary = self._absorb(state.summary, key)
        state.value += gain
        return state

    def reset_counters(self) -> None:
        self.evaluations = 0
        self.marginal_calls = 0

    def singleton_values(self) -> dict[int, float]:
        return {k: self._value(frozenset((k,))) for k in self.keys}

    @property
    def fmax(self) -> float:
        """Largest singleton value, max_e f({e})."""
        return max(self.singleton_values().values(), default=0.0)

    def _validate_range(self) -> None:
        empty = self._value(frozenset())
        if empty < -TOL:
            raise ValueError(f"f(empty) = {empty} is negative")
        for k, val in self.singleton_values().items():
            if not math.isfinite(val) or val < -TOL:
                raise ValueError(f"f({{{k}}}) = {val} is not a nonnegative finite value")


class LinearOracle(SubmodularOracle):
    kind = "linear"
    monotone = True

    def __init__(self, weights: Mapping[int, float]):
        super().__init__()
        self.weights = {int(k): float(w) for k, w in weights.items()}
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("linear weights must be nonnegative")
        self._keys = frozenset(self.weights)

    @property
    def keys(self):
        return self._keys

    def _value(self, T):
        return math.fsum(self.weights[k] for k in T)

    def _gain(self, summary, key):
        return 0.0 if key in summary else self.weights[key]


class CoverageOracle(SubmodularOracle):
    """Weighted coverage: f(T) = sum of element weights covered by the keys in T."""

    kind = "coverage"
    monotone = True

    def __init__(self, universe: int, sets: Mapping[int, Iterable[int]],
                 element_weights: Mapping[int, float] | None = None):
        super().__init__()
        if universe < 0:
            raise ValueError("universe size must be nonnegative")
        self.universe = int(universe)
        self.sets = {int(k): tuple(sorted(set(int(x) for x in s))) for k, s in sets.items()}
        for k, s in self.sets.items():
            for x in s:
                if not 0 <= x < self.universe:
                    raise ValueError(f"element {x} of set {k} outside universe")
        self.element_weights = [1.0] * self.universe
        for x, a in (element_weights or {}).items():
            if not 0 <= int(x) < self.universe:
                raise ValueError(f"weight given for element {x} outside universe")
            if a < 0:
                raise ValueError("element weights must be nonnegative")
            self.element_weights[int(x)] = float(a)
        self.unit = all(a == 1.0 for a in self.element_weights)
        self._mask = {k: sum(1 << x for x in s) for k, s in self.sets.items()}
        self._keys = frozenset(self.sets)
        self._validate_range()

    @property
    def keys(self):
        return self._keys

    def _cover_value(self, mask: int) -> float:
        if self.unit:
            return float(bin(mask).count("1"))
        a = self.element_weights
        total = []
        while mask:
            low = mask & -mask
            total.append(a[low.bit_length() - 1])
            mask ^= low
        return math.fsum(total)

    def _value(self, T):
        mask = 0
        for k in T:
            mask |= self._mask[k]
        return self._cover_value(mask)

    def _empty_summary(self):
        return 0

    def _gain(self, summary, key):
        new = self._mask[key] & ~summary
        if not new:
            return 0.0
        if self.unit:
            return float(bin(new).count("1"))
        a = self.element_weights
        return math.fsum(a[x] for x in self.sets[key] if new >> x & 1)

    def _absorb(self, summary, key):
        return summary | self._mask[key]

    def marginal_floor(self) -> float:
        """A lower bound on every nonzero marginal: the smallest positive element weight."""
        pos = [a for a in self.element_weights if a > 0]
        return min(pos) if pos else 0.0


class CovLinOracle(CoverageOracle):
    """f(T) = coverage(T) + sum_{k not in T} cost_k.

    A coverage function plus a nonnegative modular function of the
    complement, hence submodular and nonnegative; f(empty) = total cost.
    """

    kind = "covlin"
    monotone = False

    def __init__(self, universe, sets, costs: Mapping[int, float],
                 element_weights=None):
        self.costs = {int(k): float(c) for k, c in costs.items()}
        if any(c < 0 for c in self.costs.values()):
            raise ValueError("costs must be nonnegative")
        unknown = set(self.costs) - set(int(k) for k in sets)
        if unknown:
            raise ValueError(f"costs given for unknown keys {sorted(unknown)}")
        self.total_cost = math.fsum(self.costs.values())
        super().__init__(universe, sets, element_weights)

    def _cost(self, k):
        return self.costs.get(k, 0.0)

    def _value(self, T):
        return super()._value(T) + self.total_cost - math.fsum(self._cost(k) for k in T)

    def _empty_summary(self):
        return (0, frozenset())

    def _gain(self, summary, key):
        mask, seen = summary
        if key in seen:
            return 0.0
        return super()._gain(mask, key) - self._cost(key)

    def _absorb(self, summary, key):
        mask, seen = summary
        return (mask | self._mask[key], seen | {key})


class TightOracle(SubmodularOracle):
    """Capped-pair family f(T) = w(T & {e_0}) + sum_i min(w(T & {d_i, e_i}), w(e_i)).

    Keys follow arrival order: d_1..d_n are keys 0..n-1, e_0 is key n and
    e_i is key n+i.
    """

    kind = "tight"
    monotone = True

    def __init__(self, C: float, n: int, eps: float, delta: float = 0.0):
        super().__init__()
        if not C > 1:
            raise ValueError("tight family needs C > 1")
        if n < 1 or int(n) != n:
            raise ValueError("tight family needs an integer n >= 1")
        if not 0 < eps < 1:
            raise ValueError("tight family needs 0 < eps < 1")
        if delta < 0:
            raise ValueError("tight family needs delta >= 0")
        self.C, self.n, self.eps, self.delta = float(C), int(n), float(eps), float(delta)
        n = self.n
        w = {}
        for i in range(1, n + 1):
            w[self.d(i)] = (self.C + self.delta) ** (i - 1)
        w[self.e(0)] = self.C ** n - self.eps
        w[self.e(1)] = 1 + self.C - self.eps
        for i in range(2, n + 1):
            w[self.e(i)] = self.C ** i - self.eps
        self.weights = w
        # key -> (group index, cap); e_0 is group 0 and uncapped
        self._group = {}
        for i in range(1, n + 1):
            self._group[self.d(i)] = i
            self._group[self.e(i)] = i
        self._group[self.e(0)] = 0
        self._keys = frozenset(w)
        self._validate_range()

    def d(self, i: int) -> int:
        return i - 1

    def e(self, i: int) -> int:
        return self.n + i

    @property
    def keys(self):
        return self._keys

    def _group_value(self, i: int, T) -> float:
        if i == 0:
            return self.weights[self.e(0)] if self.e(0) in T else 0.0
        raw = sum(self.weights[k] for k in (self.d(i), self.e(i)) if k in T)
        return min(raw, self.weights[self.e(i)])

    def _value(self, T):
        groups = {self._group[k] for k in T}
        return math.fsum(self._group_value(i, T) for i in groups)

    def _gain(self, summary, key):
        if key in summary:
            return 0.0
        i = self._group[key]
        return self._group_value(i, summary | {key}) - self._group_value(i, summary)

    def instance(self) -> Instance:
        """The graph: x_0..x_n are vertices 0..n, y_0..y_n are n+1..2n+1.

        Stream order d_1..d_n, e_0, e_1..e_n; edge ``t`` carries key ``t - 1``.
        """
        n = self.n
        x = lambda i: i  # noqa: E731
        y = lambda i: n + 1 + i  # noqa: E731
        pairs = [(x(0), x(i)) for i in range(1, n + 1)]
        pairs += [(x(i), y(i)) for i in range(0, n + 1)]
        return Instance.from_pairs(2 * n + 2, pairs, 1)

    def label(self, key: int) -> str:
        return f"d_{key + 1}" if key < self.n else f"e_{key - self.n}"


def make_tight_oracle(C: float, n: int, eps: float, delta: float = 0.0
                      ) -> tuple[TightOracle, Instance]:
    oracle = TightOracle(C, n, eps, delta)
    return oracle, oracle.instance()


class ScaledSumOracle(SubmodularOracle):
    """Nonnegative combination sum_j c_j * f_j of oracles sharing a key set."""

    kind = "scaled_sum"

    def __init__(self, parts: Sequence[tuple[float, SubmodularOracle]]):
        super().__init__()
        if not parts:
            raise ValueError("need at least one part")
        if any(c < 0 for c, _ in parts):
            raise ValueError("coefficients must be nonnegative")
        self.parts = [(float(c), o) for c, o in parts]
        self._keys = frozenset.intersection(*(o.keys for _, o in parts))
        self.monotone = all(o.monotone for _, o in parts)
        self._validate_range()

    @property
    def keys(self):
        return self._keys

    def _value(self, T):
        return math.fsum(c * o._value(T) for c, o in self.parts)

    def _empty_summary(self):
        return tuple(o._empty_summary() for _, o in self.parts)

    def _gain(self, summary, key):
        return math.fsum(c * o._gain(s, key) for (c, o), s in zip(self.parts, summary))

    def _absorb(self, summary, key):
        return tuple(o._absorb(s, key) for (_, o), s in zip(self.parts, summary))


def edge_keys(edges: Iterable[Edge]) -> list[int]:
    return [e.key for e in edges]


# --- exhaustive audits --------------------------------------------------------

def _value_table(oracle: SubmodularOracle, ground: Sequence[int]) -> np.ndarray:
    n = len(ground)
    table = np.empty(1 << n)
    for mask in range(1 << n):
        table[mask] = oracle._value(frozenset(ground[i] for i in range(n) if mask >> i & 1))
    return table


def _check_ground(oracle, ground, limit):
    ground = list(dict.fromkeys(ground))
    if len(ground) > limit:
        raise ValueError(f"ground set of size {len(ground)} exceeds exhaustive limit {limit}")
    for k in ground:
        oracle._check(k)
    return ground


def verify_submodular(oracle: SubmodularOracle, ground: Iterable[int] | None = None,
                      exhaustive_limit: int = 14, tol: float = TOL):
    """Exhaustive diminishing-returns check.

    Returns ``(True, None)`` or ``(False, (S, T, e))`` with S a subset of T,
    e outside T and f_S(e) < f_T(e). It suffices to test T = S + {j}.
    """
    ground = _check_ground(oracle, oracle.keys if ground is None else ground, exhaustive_limit)
    n = len(ground)
    F = _value_table(oracle, ground)
    masks = np.arange(1 << n)
    for i, j in itertools.permutations(range(n), 2):
        bi, bj = 1 << i, 1 << j
        base = masks[(masks & (bi | bj)) == 0]
        slack = F[base | bi] - F[base] - (F[base | bi | bj] - F[base | bj])
        bad = np.nonzero(slack < -tol)[0]
        if bad.size:
            m = int(base[bad[0]])
            S = {ground[x] for x in range(n) if m >> x & 1}
            return False, (S, S | {ground[j]}, ground[i])
    return True, None


def verify_monotone(oracle: SubmodularOracle, ground: Iterable[int] | None = None,
                    exhaustive_limit: int = 14, tol: float = TOL):
    """Returns ``(True, None)`` or ``(False, (S, e))`` with f(S + e) < f(S)."""
    ground = _check_ground(oracle, oracle.keys if ground is None else ground, exhaustive_limit)
    n = len(ground)
    F = _value_table(oracle, ground)
    masks = np.arange(1 << n)
    for i in range(n):
        base = masks[(masks & (1 << i)) == 0]
        bad = np.nonzero(F[base | (1 << i)] < F[base] - tol)[0]
        if bad.size:
            m = int(base[bad[0]])
            return False, ({ground[x] for x in range(n) if m >> x & 1}, ground[i])
    return True, None


def audit_fmin(oracle: SubmodularOracle, ground: Iterable[int] | None = None,
               exhaustive_limit: int = 14) -> float:
    """Smallest positive marginal f(e | S) over all S, by enumeration."""
    ground = _check_ground(oracle, oracle.keys if ground is None else ground, exhaustive_limit)
    n = len(ground)
    F = _value_table(oracle, ground)
    masks = np.arange(1 << n)
    best = math.inf
    for i in range(n):
        base = masks[(masks & (1 << i)) == 0]
        gains = F[base | (1 << i)] - F[base]
        pos = gains[gains > TOL]
        if pos.size:
            best = min(best, float(pos.min()))
    return best


# --- oracle text files --------------------------------------------------------

def _num(tok, lineno, what, conv=float):
    try:
        return conv(tok)
    except ValueError:
        raise OracleFormatError(lineno, f"{what} must be numeric, got {tok!r}") from None


def parse_oracle(text: str) -> SubmodularOracle:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line.split()))
    if not lines or lines[0][1][0] != "oracle" or len(lines[0][1]) < 2:
        raise OracleFormatError(lines[0][0] if lines else 1, "expected 'oracle <kind>' header")
    lineno, head = lines[0]
    kind = head[1]
    body = lines[1:]

    if kind == "linear":
        weights = {}
        for ln, toks in body:
            if toks[0] != "w" or len(toks) != 3:
                raise OracleFormatError(ln, "expected 'w <key> <value>'")
            weights[_num(toks[1], ln, "key", int)] = _num(toks[2], ln, "weight")
        try:
            return LinearOracle(weights)
        except ValueError as exc:
            raise OracleFormatError(lineno, str(exc)) from None

    if kind in ("coverage", "covlin"):
        universe = None
        sets, weights, costs = {}, {}, {}
        for ln, toks in body:
            tag = toks[0]
            if tag == "universe" and len(toks) == 2:
                universe = _num(toks[1], ln, "universe", int)
            elif tag == "a" and len(toks) == 3:
                weights[_num(toks[1], ln, "element", int)] = _num(toks[2], ln, "weight")
            elif tag == "set" and len(toks) >= 2:
                sets[_num(toks[1], ln, "key", int)] = [_num(x, ln, "element", int) for x in toks[2:]]
            elif tag == "cost" and kind == "covlin" and len(toks) == 3:
                costs[_num(toks[1], ln, "key", int)] = _num(toks[2], ln, "cost")
            else:
                raise OracleFormatError(ln, f"unexpected line in {kind} block: {' '.join(toks)!r}")
        if universe is None:
            raise OracleFormatError(lineno, "missing 'universe <N>' line")
        try:
            if kind == "coverage":
                return CoverageOracle(universe, sets, weights)
            return CovLinOracle(universe, sets, costs, weights)
        except ValueError as exc:
            raise OracleFormatError(lineno, str(exc)) from None

    if kind == "tight":
        if body:
            raise OracleFormatError(body[0][0], "tight oracle takes no body lines")
        params = head[2:]
        if len(params) != 8 or params[0::2] != ["C", "n", "eps", "delta"]:
            raise OracleFormatError(lineno, "expected 'oracle tight C <C> n <n> eps <eps> delta <delta>'")
        try:
            return TightOracle(_num(params[1], lineno, "C"), _num(params[3], lineno, "n", int),
                               _num(params[5], lineno, "eps"), _num(params[7], lineno, "delta"))
        except ValueError as exc:
            raise OracleFormatError(lineno, str(exc)) from None

    raise OracleFormatError(lineno, f"unknown oracle kind {kind!r}")


def format_oracle(oracle: SubmodularOracle, comments: Sequence[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    if isinstance(oracle, TightOracle):
        out.append(f"oracle tight C {oracle.C!r} n {oracle.n} eps {oracle.eps!r} delta {oracle.delta!r}")
    elif isinstance(oracle, LinearOracle):
        out.append("oracle linear")
        out.extend(f"w {k} {w!r}" for k, w in sorted(oracle.weights.items()))
    elif isinstance(oracle, CoverageOracle):
        out.append(f"oracle {oracle.kind}")
        out.append(f"universe {oracle.universe}")
        out.extend(f"a {x} {a!r}" for x, a in enumerate(oracle.element_weights) if a != 1.0)
        for k, s in sorted(oracle.sets.items()):
            out.append(" ".join(["set", str(k), *map(str, s)]))
        if isinstance(oracle, CovLinOracle):
            out.extend(f"cost {k} {c!r}" for k, c in sorted(oracle.costs.items()))
    else:
        raise TypeError(f"no text format for oracle kind {oracle.kind!r}")
    return "\n".join(out) + "\n"


def read_oracle(path: str | Path) -> SubmodularOracle:
    return parse_oracle(Path(path).read_text(encoding="utf-8"))


def write_oracle(path: str | Path, oracle: SubmodularOracle, comments: Sequence[str] = ()) -> None:
    Path(path).write_text(format_oracle(oracle, comments), encoding="utf-8")
