"""Discrete martingales on finite binary path trees, exactly.

A tree of depth N carries iid +-1 steps with up-probability p. The node at
level n with index i is the step prefix given by the n binary digits of i,
most significant first, where 1 means an up-step. The children of (n, i)
are (n+1, 2i) (down) and (n+1, 2i+1) (up), so F_n-measurability of a
process is structural: it is simply a value per level-n node.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Sequence

from .errors import BadBounds, BadInterval, NotMartingale, NotSubmartingale
from .exact_core import format_rational, to_fraction

MARTINGALE = "martingale"
SUBMARTINGALE = "submartingale"
SUPERMARTINGALE = "supermartingale"
NONE = "none"


@dataclass(frozen=True)
class PathTree:
    depth: int
    p: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "p", to_fraction(self.p))
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")

    @cached_property
    def _weights(self) -> list[list[Fraction]]:
        levels = [[Fraction(1)]]
        p, q = self.p, 1 - self.p
        for _ in range(self.depth):
            prev = levels[-1]
            nxt = []
            for w in prev:
                nxt.append(w * q)
                nxt.append(w * p)
            levels.append(nxt)
        return levels

    def weights(self, n: int) -> list[Fraction]:
        """P of each level-n node (summing to 1)."""
        return self._weights[n]

    @staticmethod
    def position(n: int, i: int) -> int:
        return 2 * i.bit_count() - n

    @staticmethod
    def steps(n: int, i: int) -> tuple[int, ...]:
        return tuple(1 if (i >> (n - 1 - k)) & 1 else -1 for k in range(n))

    @staticmethod
    def ancestor(n: int, i: int, m: int) -> int:
        """Index of the level-m prefix of node (n, i); requires m <= n."""
        return i >> (n - m)


@dataclass(frozen=True)
class AdaptedProcess:
    tree: PathTree
    levels: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.levels) != self.tree.depth + 1:
            raise ValueError("need one level per time 0..N")
        levels = []
        for n, row in enumerate(self.levels):
            if len(row) != 2**n:
                raise ValueError(f"level {n} must have {2**n} values")
            levels.append(tuple(to_fraction(v) for v in row))
        object.__setattr__(self, "levels", tuple(levels))

    @classmethod
    def from_function(cls, tree: PathTree, f: Callable[[int, tuple[int, ...]], object]) -> "AdaptedProcess":
        """X_n = f(n, (step_1, ..., step_n))."""
        return cls(tree, tuple(
            tuple(f(n, tree.steps(n, i)) for i in range(2**n)) for n in range(tree.depth + 1)
        ))

    @classmethod
    def from_position(cls, tree: PathTree, f: Callable[[int, int], object]) -> "AdaptedProcess":
        """X_n = f(n, S_n)."""
        return cls(tree, tuple(
            tuple(f(n, tree.position(n, i)) for i in range(2**n)) for n in range(tree.depth + 1)
        ))

    @property
    def depth(self) -> int:
        return self.tree.depth

    @cached_property
    def _one_step(self) -> tuple[tuple[Fraction, ...], ...]:
        p, q = self.tree.p, 1 - self.tree.p
        return tuple(
            tuple(q * nxt[2 * i] + p * nxt[2 * i + 1] for i in range(len(nxt) // 2))
            for nxt in self.levels[1:]
        )

    def one_step_conditional(self, n: int) -> list[Fraction]:
        """E[X_{n+1} | F_n] at every level-n node."""
        if not 0 <= n < self.depth:
            raise ValueError("need 0 <= n < depth")
        return list(self._one_step[n])

    def conditional(self, t: int, s: int) -> list[Fraction]:
        """E[X_t | F_s] at every level-s node (s <= t)."""
        if not 0 <= s <= t <= self.depth:
            raise ValueError("need 0 <= s <= t <= depth")
        p, q = self.tree.p, 1 - self.tree.p
        vals = list(self.levels[t])
        for _ in range(t - s):
            vals = [q * vals[2 * i] + p * vals[2 * i + 1] for i in range(len(vals) // 2)]
        return vals

    def expectation(self, n: int) -> Fraction:
        return sum((w * v for w, v in zip(self.tree.weights(n), self.levels[n])), Fraction(0))

    def paths(self) -> Iterable[tuple[Fraction, tuple[Fraction, ...]]]:
        """(weight, (X_0, ..., X_N)) for each leaf."""
        N = self.depth
        for leaf, w in enumerate(self.tree.weights(N)):
            yield w, tuple(self.levels[n][leaf >> (N - n)] for n in range(N + 1))

    def map(self, f: Callable[[Fraction], object]) -> "AdaptedProcess":
        return AdaptedProcess(self.tree, tuple(tuple(f(v) for v in row) for row in self.levels))

    def __sub__(self, other: "AdaptedProcess") -> "AdaptedProcess":
        return AdaptedProcess(self.tree, tuple(
            tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self.levels, other.levels)
        ))

    def __add__(self, other: "AdaptedProcess") -> "AdaptedProcess":
        return AdaptedProcess(self.tree, tuple(
            tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.levels, other.levels)
        ))

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "p": format_rational(self.tree.p),
            "levels": [[format_rational(v) for v in row] for row in self.levels],
        }


FUNCTIONALS: dict[str, Callable[[int, int], object]] = {
    "s": lambda n, s: s,
    "s2": lambda n, s: s * s,
    "s2_minus_n": lambda n, s: s * s - n,
    "abs_s": lambda n, s: abs(s),
}


def process_from_json(doc: dict) -> AdaptedProcess:
    """``{"depth": 8, "p": "1/2", "functional": "s2_minus_n"}`` or explicit ``levels``."""
    tree = PathTree(int(doc["depth"]), doc.get("p", "1/2"))
    if "levels" in doc:
        return AdaptedProcess(tree, tuple(tuple(row) for row in doc["levels"]))
    name = doc.get("functional", "s")
    try:
        f = FUNCTIONALS[name]
    except KeyError:
        raise ValueError(f"unknown functional {name!r}; choose from {sorted(FUNCTIONALS)}") from None
    return AdaptedProcess.from_position(tree, f)


def walk(tree: PathTree) -> AdaptedProcess:
    return AdaptedProcess.from_position(tree, FUNCTIONALS["s"])


def drifts(x: AdaptedProcess) -> list[Fraction]:
    """E[X_{n+1} | F_n] - X_n over all internal nodes."""
    out = []
    for n in range(x.depth):
        out.extend(c - v for c, v in zip(x.one_step_conditional(n), x.levels[n]))
    return out


def classify(x: AdaptedProcess) -> str:
    d = drifts(x)
    if all(v == 0 for v in d):
        return MARTINGALE
    if all(v >= 0 for v in d):
        return SUBMARTINGALE
    if all(v <= 0 for v in d):
        return SUPERMARTINGALE
    return NONE


def doob_decomposition(x: AdaptedProcess) -> tuple[AdaptedProcess, AdaptedProcess]:
    """Split X_n = X_0 + M_n + A_n with M a martingale and A predictable, increasing.

    A_n = sum_{k <= n} E[X_k - X_{k-1} | F_{k-1}], M_n = X_n - X_0 - A_n.
    """
    kind = classify(x)
    if kind not in (MARTINGALE, SUBMARTINGALE):
        raise NotSubmartingale(f"process is classified as {kind}")
    a_levels = [(Fraction(0),)]
    for n in range(1, x.depth + 1):
        drift = x.one_step_conditional(n - 1)
        prev_a = a_levels[-1]
        prev_x = x.levels[n - 1]
        step = [prev_a[j] + drift[j] - prev_x[j] for j in range(2 ** (n - 1))]
        a_levels.append(tuple(step[i >> 1] for i in range(2**n)))
    x0 = x.levels[0][0]
    m_levels = tuple(
        tuple(v - x0 - a for v, a in zip(row, arow)) for row, arow in zip(x.levels, a_levels)
    )
    return AdaptedProcess(x.tree, m_levels), AdaptedProcess(x.tree, tuple(a_levels))


def is_predictable(a: AdaptedProcess) -> bool:
    """A_n depends only on the first n-1 steps (siblings agree)."""
    return all(row[2 * j] == row[2 * j + 1] for row in a.levels[1:] for j in range(len(row) // 2))


def is_nondecreasing(a: AdaptedProcess) -> bool:
    return all(
        a.levels[n][i] >= a.levels[n - 1][i >> 1]
        for n in range(1, a.depth + 1) for i in range(2**n)
    )


@dataclass(frozen=True)
class StoppingTime:
    """Stop at the first level whose prefix is flagged; stop at N otherwise.

    Because the decision at time n reads only the level-n prefix,
    {T <= n} lies in F_n by construction.
    """

    tree: PathTree
    flags: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        if len(self.flags) != self.tree.depth + 1:
            raise ValueError("need one flag level per time 0..N")
        for n, row in enumerate(self.flags):
            if len(row) != 2**n:
                raise ValueError(f"flag level {n} must have {2**n} entries")
        object.__setattr__(self, "flags", tuple(tuple(bool(f) for f in row) for row in self.flags))

    @classmethod
    def constant(cls, tree: PathTree, t: int) -> "StoppingTime":
        if not 0 <= t <= tree.depth:
            raise ValueError("constant time must lie in [0, depth]")
        return cls(tree, tuple((n == t,) * 2**n for n in range(tree.depth + 1)))

    @classmethod
    def first_entry(cls, x: AdaptedProcess, predicate: Callable[[Fraction], bool]) -> "StoppingTime":
        """First n with predicate(X_n), capped at the tree depth."""
        return cls(x.tree, tuple(tuple(predicate(v) for v in row) for row in x.levels))

    @classmethod
    def first_hit(cls, x: AdaptedProcess, values: Iterable) -> "StoppingTime":
        targets = {to_fraction(v) for v in values}
        return cls.first_entry(x, lambda v: v in targets)

    def leaf_times(self) -> list[int]:
        """T evaluated on every leaf path."""
        N = self.tree.depth
        out = []
        for leaf in range(2**N):
            t = N
            for n in range(N + 1):
                if self.flags[n][leaf >> (N - n)]:
                    t = n
                    break
            out.append(t)
        return out

    def cap_mass(self) -> Fraction:
        """P[no flag is met by time N], i.e. the mass stopped only by the cap."""
        N = self.tree.depth
        w = self.tree.weights(N)
        out = Fraction(0)
        for leaf in range(2**N):
            if not any(self.flags[n][leaf >> (N - n)] for n in range(N + 1)):
                out += w[leaf]
        return out


def stopped_value(x: AdaptedProcess, t: StoppingTime) -> list[Fraction]:
    """X_T on every leaf."""
    N = x.depth
    return [x.levels[n][leaf >> (N - n)] for leaf, n in enumerate(t.leaf_times())]


def optional_stopping(x: AdaptedProcess, t: StoppingTime) -> Fraction:
    """Exact E[X_T] for a bounded stopping time T <= N."""
    if t.tree != x.tree:
        raise ValueError("process and stopping time live on different trees")
    w = x.tree.weights(x.depth)
    return sum((wi * v for wi, v in zip(w, stopped_value(x, t))), Fraction(0))


def gambler_ruin(p, k: int, m: int) -> Fraction:
    """P(walk with up-probability p started at k hits m before 0)."""
    p = to_fraction(p)
    if not 0 < p < 1:
        raise BadBounds("p must lie strictly between 0 and 1")
    if m < 1 or not 0 <= k <= m:
        raise BadBounds(f"need 0 <= k <= m and m >= 1, got k={k}, m={m}")
    q = 1 - p
    if p == q:
        return Fraction(k, m)
    r = q / p
    return (r**k - 1) / (r**m - 1)


def upcrossings(seq: Sequence, a, b) -> int:
    """Completed upcrossings of [a, b]: passages from <= a to >= b."""
    a, b = to_fraction(a), to_fraction(b)
    if a >= b:
        raise BadInterval(f"need a < b, got [{a}, {b}]")
    count = 0
    below = False
    for v in seq:
        if not below:
            if v <= a:
                below = True
        elif v >= b:
            count += 1
            below = False
    return count


class UpcrossingCheck(NamedTuple):
    expected_upcrossings: Fraction
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def upcrossing_check(x: AdaptedProcess, a, b) -> UpcrossingCheck:
    """(b - a) E[N_N([a, b], X)] against E[(X_N - a)^-]."""
    a, b = to_fraction(a), to_fraction(b)
    if a >= b:
        raise BadInterval(f"need a < b, got [{a}, {b}]")
    expected = Fraction(0)
    negpart = Fraction(0)
    for w, path in x.paths():
        expected += w * upcrossings(path, a, b)
        negpart += w * max(a - path[-1], Fraction(0))
    return UpcrossingCheck(expected, (b - a) * expected, negpart)


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    lhs: Fraction | float
    rhs: Fraction | float
    exact: bool

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs if self.exact else self.lhs <= self.rhs + 1e-12


def _abs_power(v: Fraction, p: Fraction):
    if p.denominator == 1:
        return abs(v) ** p.numerator
    return float(abs(v)) ** float(p)


def inequality_report(x: AdaptedProcess, lam, p_exp=Fraction(2), require_martingale: bool = True) -> list[InequalityCheck]:
    """Both sides of the maximal-type inequalities, computed on the tree.

    Submartingale inequalities: lambda P[max X_k >= lambda] <= E[X_N 1_A],
    lambda P[min X_k <= -lambda] <= E[X_N 1_{B^c}] - E[X_0] and
    lambda P[max |X_k| >= lambda] <= E[|X_0|] + 2 E[|X_N|]. Martingale only:
    lambda^2 P[max |X_k| >= lambda] <= E[X_N^2] and
    E[max |X_k|^p] <= q^p E[|X_N|^p]. For a submartingale that is not a
    martingale (allowed with ``require_martingale=False``) the L^p check is
    applied to X^+ instead.
    """
    lam = to_fraction(lam)
    p_exp = to_fraction(p_exp)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not p_exp > 1:
        raise ValueError("the L^p exponent must exceed 1")
    kind = classify(x)
    if kind != MARTINGALE and require_martingale:
        raise NotMartingale(f"process is classified as {kind}")
    if kind not in (MARTINGALE, SUBMARTINGALE):
        raise NotSubmartingale(f"process is classified as {kind}")
    q_exp = p_exp / (p_exp - 1)
    exact_lp = p_exp.denominator == 1

    zero = Fraction(0)
    p_max = p_min = p_absmax = zero
    e_xn_a = e_xn_bc = e_abs_x0 = e_abs_xn = e_xn2 = zero
    e_max_lp = e_xn_lp = 0 if exact_lp else 0.0
    is_mart = kind == MARTINGALE
    for w, path in x.paths():
        xn = path[-1]
        top, bottom = max(path), min(path)
        absmax = max(abs(v) for v in path)
        if top >= lam:
            p_max += w
            e_xn_a += w * xn
        if bottom <= -lam:
            p_min += w
        else:
            e_xn_bc += w * xn
        if absmax >= lam:
            p_absmax += w
        e_abs_x0 += w * abs(path[0])
        e_abs_xn += w * abs(xn)
        e_xn2 += w * xn * xn
        if is_mart:
            m_val, end_val = absmax, xn
        else:
            m_val, end_val = max(top, zero), max(xn, zero)
        wf = w if exact_lp else float(w)
        e_max_lp += wf * _abs_power(m_val, p_exp)
        e_xn_lp += wf * _abs_power(end_val, p_exp)
    e_x0 = x.levels[0][0]
    q_pow = q_exp**p_exp.numerator if exact_lp else float(q_exp) ** float(p_exp)

    checks = [
        InequalityCheck("submartingale_max", lam * p_max, e_xn_a, True),
        InequalityCheck("submartingale_min", lam * p_min, e_xn_bc - e_x0, True),
        InequalityCheck("maximal", lam * p_absmax, e_abs_x0 + 2 * e_abs_xn, True),
    ]
    if is_mart:
        checks.append(InequalityCheck("kolmogorov", lam**2 * p_absmax, e_xn2, True))
        checks.append(InequalityCheck("doob_lp", e_max_lp, q_pow * e_xn_lp, exact_lp))
    else:
        checks.append(InequalityCheck("doob_lp_positive_part", e_max_lp, q_pow * e_xn_lp, exact_lp))
    for c in checks:
        if not c.holds:
            raise AssertionError(f"{c.name} inequality violated: {c.lhs} > {c.rhs}")
    return checks
