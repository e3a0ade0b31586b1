"""Finite Markov chains with exact rational transition matrices.

On a finite state space a state is recurrent exactly when its
communicating class is closed, so classification reduces to strongly
connected components of the positive-transition digraph. Linear systems
(invariant measures, hitting probabilities, return times, potential
kernel) are solved exactly over the rationals.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

import networkx as nx

from . import linalg
from .errors import IsolatedVertex, NotIrreducible, UnknownState
from .exact_core import binomial, format_rational, to_fraction


@dataclass(frozen=True)
class StochasticMatrix:
    states: tuple
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        states = tuple(self.states)
        rows = tuple(tuple(to_fraction(x) for x in row) for row in self.rows)
        n = len(states)
        if n == 0:
            raise ValueError("need at least one state")
        if len(set(states)) != n:
            raise ValueError("state labels must be distinct")
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError("transition matrix must be square over the states")
        for s, r in zip(states, rows):
            if any(not 0 <= x <= 1 for x in r):
                raise ValueError(f"row {s!r} has an entry outside [0, 1]")
            if sum(r) != 1:
                raise ValueError(f"row {s!r} sums to {sum(r)}, not 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "rows", rows)

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownState(f"unknown state {state!r}") from None

    def __getitem__(self, key) -> Fraction:
        x, y = key
        return self.rows[self.index(x)][self.index(y)]

    def to_json(self) -> dict:
        return {
            "states": [str(s) for s in self.states],
            "rows": [[format_rational(x) for x in r] for r in self.rows],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "StochasticMatrix":
        return cls(tuple(doc["states"]), tuple(tuple(r) for r in doc["rows"]))


def power(q: StochasticMatrix, n: int) -> StochasticMatrix:
    """Q^n by repeated squaring; Q^0 is the identity."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    result = linalg.identity(q.size)
    base = [list(r) for r in q.rows]
    while n:
        if n & 1:
            result = linalg.matmul(result, base)
        n >>= 1
        if n:
            base = linalg.matmul(base, base)
    return StochasticMatrix(q.states, tuple(tuple(r) for r in result))


def _graph(q: StochasticMatrix) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(q.size))
    g.add_edges_from((i, j) for i, row in enumerate(q.rows) for j, x in enumerate(row) if x > 0)
    return g


@dataclass(frozen=True)
class CommunicatingClass:
    states: frozenset
    closed: bool


@dataclass(frozen=True)
class ChainReport:
    classes: tuple[CommunicatingClass, ...]
    recurrent: frozenset
    transient: frozenset
    irreducible: bool

    def to_json(self) -> dict:
        key = lambda s: str(s)
        return {
            "classes": [
                {"states": sorted(map(str, c.states)), "closed": c.closed} for c in self.classes
            ],
            "recurrent": sorted(self.recurrent, key=key),
            "transient": sorted(self.transient, key=key),
            "irreducible": self.irreducible,
        }


def _class_indices(q: StochasticMatrix) -> list[tuple[list[int], bool]]:
    g = _graph(q)
    out = []
    for comp in nx.strongly_connected_components(g):
        comp = sorted(comp)
        members = set(comp)
        closed = all(j in members for i in comp for j in g.successors(i))
        out.append((comp, closed))
    out.sort(key=lambda c: c[0][0])
    return out


def classify(q: StochasticMatrix) -> ChainReport:
    classes = []
    recurrent, transient = set(), set()
    for comp, closed in _class_indices(q):
        labels = frozenset(q.states[i] for i in comp)
        classes.append(CommunicatingClass(labels, closed))
        (recurrent if closed else transient).update(labels)
    return ChainReport(tuple(classes), frozenset(recurrent), frozenset(transient), len(classes) == 1)


class InvariantMeasures(NamedTuple):
    """One normalized invariant measure per closed class."""

    measures: tuple[dict, ...]
    non_unique: bool

    @property
    def mu(self) -> dict:
        if self.non_unique:
            raise ValueError("invariant probability is not unique")
        return self.measures[0]


def _stationary_on(q: StochasticMatrix, comp: Sequence[int]) -> list[Fraction]:
    """Probability solution of mu Q = mu restricted to a closed class."""
    k = len(comp)
    sub = [[q.rows[i][j] for j in comp] for i in comp]
    # (Q^T - I) mu = 0 with the last equation swapped for sum(mu) = 1
    a = [[sub[j][i] - (1 if i == j else 0) for j in range(k)] for i in range(k)]
    a[-1] = [Fraction(1)] * k
    b = [Fraction(0)] * (k - 1) + [Fraction(1)]
    return linalg.solve(a, b)


def invariant_measure(q: StochasticMatrix) -> InvariantMeasures:
    measures = []
    for comp, closed in _class_indices(q):
        if not closed:
            continue
        sol = dict(zip(comp, _stationary_on(q, comp)))
        measures.append({s: sol.get(i, Fraction(0)) for i, s in enumerate(q.states)})
    return InvariantMeasures(tuple(measures), len(measures) > 1)


class ReversibilityCheck(NamedTuple):
    reversible: bool
    violation: tuple | None


def is_reversible(q: StochasticMatrix, mu: Mapping) -> ReversibilityCheck:
    """Detailed balance mu(x) Q(x,y) = mu(y) Q(y,x) over all pairs."""
    m = [to_fraction(mu[s]) for s in q.states]
    for i in range(q.size):
        for j in range(i + 1, q.size):
            if m[i] * q.rows[i][j] != m[j] * q.rows[j][i]:
                return ReversibilityCheck(False, (q.states[i], q.states[j]))
    return ReversibilityCheck(True, None)


def is_invariant(q: StochasticMatrix, mu: Mapping) -> bool:
    m = [to_fraction(mu[s]) for s in q.states]
    return all(
        sum((m[i] * q.rows[i][j] for i in range(q.size)), Fraction(0)) == m[j]
        for j in range(q.size)
    )


class HittingProbabilities(NamedTuple):
    probabilities: dict
    unreachable: frozenset


def hitting_probability(q: StochasticMatrix, target: Iterable, forbidden: Iterable = ()) -> HittingProbabilities:
    """h(x) = P_x[reach target before forbidden].

    States that cannot reach ``target | forbidden`` at all get 0 and are
    listed in ``unreachable``.
    """
    tgt = {q.index(s) for s in target}
    fb = {q.index(s) for s in forbidden}
    if tgt & fb:
        raise ValueError("target and forbidden sets overlap")
    boundary = tgt | fb
    g = _graph(q)
    can_reach = set(boundary)
    for b in boundary:
        can_reach |= nx.ancestors(g, b)
    unreachable = {i for i in range(q.size) if i not in can_reach}
    free = [i for i in range(q.size) if i in can_reach and i not in boundary]
    h = [Fraction(0)] * q.size
    for i in tgt:
        h[i] = Fraction(1)
    if free:
        a = [[(1 if r == c else 0) - q.rows[r][c] for c in free] for r in free]
        rhs = [sum((q.rows[r][t] for t in tgt), Fraction(0)) for r in free]
        for i, v in zip(free, linalg.solve(a, rhs)):
            h[i] = v
    return HittingProbabilities(
        {s: h[i] for i, s in enumerate(q.states)},
        frozenset(q.states[i] for i in unreachable),
    )


def mean_hitting_times(q: StochasticMatrix, target) -> dict:
    """m(x) = E_x[time to reach target], with m(target) = 0, by first-step analysis.

    Requires the target to be reached almost surely from every state.
    """
    t = q.index(target)
    free = [i for i in range(q.size) if i != t]
    a = [[(1 if r == c else 0) - q.rows[r][c] for c in free] for r in free]
    sol = linalg.solve(a, [Fraction(1)] * len(free)) if free else []
    m = {t: Fraction(0)}
    m.update(zip(free, sol))
    return {s: m[i] for i, s in enumerate(q.states)}


def return_times_first_step(q: StochasticMatrix) -> dict:
    """E_x[H_x] = 1 + sum_y Q(x, y) m_x(y), from the first-step system."""
    out = {}
    for x in q.states:
        m = mean_hitting_times(q, x)
        i = q.index(x)
        out[x] = 1 + sum((q.rows[i][j] * m[y] for j, y in enumerate(q.states)), Fraction(0))
    return out


def expected_return_time(q: StochasticMatrix) -> dict:
    """E_x[H_x] = 1 / mu(x) for an irreducible chain."""
    if not classify(q).irreducible:
        raise NotIrreducible("expected return times need an irreducible chain")
    mu = invariant_measure(q).mu
    out = {s: 1 / mu[s] for s in q.states}
    if out != return_times_first_step(q):
        raise AssertionError("return times disagree with the first-step system")
    return out


class PotentialMatrix(NamedTuple):
    states: tuple
    matrix: tuple[tuple[Fraction, ...], ...]


def potential_matrix(q: StochasticMatrix) -> PotentialMatrix:
    """U = sum_n Q_TT^n = (I - Q_TT)^(-1) on the transient states T."""
    transient = classify(q).transient
    idx = [i for i, s in enumerate(q.states) if s in transient]
    if not idx:
        return PotentialMatrix((), ())
    a = [[(1 if r == c else 0) - q.rows[r][c] for c in idx] for r in idx]
    inv = linalg.inverse(a)
    return PotentialMatrix(tuple(q.states[i] for i in idx), tuple(tuple(r) for r in inv))


class ZdVerdict(NamedTuple):
    d: int
    recurrent: bool
    partial_sums: dict
    tail_bound: float | None
    note: str


def zd_recurrence(d: int, checkpoints: Sequence[int] = (10, 100, 1000, 10_000)) -> ZdVerdict:
    """Recurrence of 0 for the walk whose coordinates are independent +-1 walks.

    U(0,0) = sum_k (C(2k,k) 4^-k)^d and C(2k,k) 4^-k ~ (pi k)^(-1/2), so the
    series diverges exactly when d <= 2. Partial sums are evidence only.
    For transient d the tail past the last checkpoint K is bounded by
    pi^(-d/2) K^(1-d/2) / (d/2 - 1), using C(2k,k) 4^-k <= (pi k)^(-1/2).
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    checkpoints = sorted(set(int(k) for k in checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive")
    sums = {}
    total = 1.0  # k = 0 term
    u = 1.0
    k = 0
    for K in checkpoints:
        while k < K:
            k += 1
            u *= (2 * k - 1) / (2 * k)
            total += u**d
        sums[K] = total
    recurrent = d <= 2
    tail = None
    if not recurrent:
        K = checkpoints[-1]
        tail = math.pi ** (-d / 2) * K ** (1 - d / 2) / (d / 2 - 1)
    note = (
        "recurrent: sum of k^(-d/2) diverges for d <= 2 (d = 2 diverges like log K / pi)"
        if recurrent
        else "transient: sum of k^(-d/2) converges for d >= 3"
    )
    return ZdVerdict(d, recurrent, sums, tail, note)


def _row_cumulative(q: StochasticMatrix) -> list[list[float]]:
    out = []
    for row in q.rows:
        acc = Fraction(0)
        cum = []
        for x in row:
            acc += x
            cum.append(float(acc))
        out.append(cum)
    return out


def simulate(q: StochasticMatrix, x0, steps: int, stream) -> list:
    """Trajectory X_0 = x0, ..., X_steps by cumulative-row inversion.

    One uniform per step is drawn from ``stream`` (see
    :class:`stochlab.monte_carlo.SeededStream`): with u in (0, 1] the next
    state is the first y_k with u <= Q(x, y_1) + ... + Q(x, y_k).
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    i = q.index(x0)
    cum = _row_cumulative(q)
    path = [i]
    if steps:
        us = 1.0 - stream.random(steps)
        for u in us:
            row = cum[i]
            # exact row sums make the last positive cumulative entry exactly 1.0
            i = bisect.bisect_left(row, u)
            path.append(i)
    return [q.states[k] for k in path]


def ehrenfest(k: int) -> StochasticMatrix:
    """k balls in two urns; state j = balls in the first urn."""
    if k < 1:
        raise ValueError("k must be positive")
    rows = []
    for j in range(k + 1):
        row = [Fraction(0)] * (k + 1)
        if j < k:
            row[j + 1] = Fraction(k - j, k)
        if j > 0:
            row[j - 1] = Fraction(j, k)
        rows.append(tuple(row))
    return StochasticMatrix(tuple(range(k + 1)), tuple(rows))


def ehrenfest_measure(k: int) -> dict:
    """Normalized binomial weights C(k, j) / 2^k."""
    return {j: Fraction(binomial(k, j), 2**k) for j in range(k + 1)}


def graph_walk(adjacency: Mapping[Hashable, Iterable]) -> StochasticMatrix:
    """Simple random walk on an undirected graph given by neighbor lists."""
    states = tuple(adjacency)
    nbrs = {v: set(adjacency[v]) for v in states}
    for v, ns in nbrs.items():
        if not ns:
            raise IsolatedVertex(f"vertex {v!r} has no neighbors")
        for u in ns:
            if u not in nbrs:
                raise UnknownState(f"neighbor {u!r} is not a vertex")
            if v not in nbrs[u]:
                raise ValueError(f"edge {v!r}-{u!r} is not symmetric")
    rows = tuple(
        tuple(Fraction(int(u in nbrs[v]), len(nbrs[v])) for u in states) for v in states
    )
    return StochasticMatrix(states, rows)


def degree_measure(adjacency: Mapping[Hashable, Iterable]) -> dict:
    return {v: Fraction(len(set(ns))) for v, ns in adjacency.items()}


def birth_death(p, m: int) -> StochasticMatrix:
    """Walk on 0..m with up-probability p, absorbed at 0 and m."""
    p = to_fraction(p)
    if m < 1:
        raise ValueError("m must be positive")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rows = []
    for j in range(m + 1):
        row = [Fraction(0)] * (m + 1)
        if j in (0, m):
            row[j] = Fraction(1)
        else:
            row[j + 1] += p
            row[j - 1] += 1 - p
        rows.append(tuple(row))
    return StochasticMatrix(tuple(range(m + 1)), tuple(rows))
