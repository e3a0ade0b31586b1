"""Exact statistics of the simple +-1 random walk.

Conventions: S_0 = 0, S_k = X_1 + ... + X_k with X_j in {-1, +1}.
Queries that are impossible by parity return 0 rather than raising.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate, product

from .errors import HorizonTooLarge, IndexOutOfRange, NotMajority
from .exact_core import binomial, to_fraction

MAX_ENUMERATION_HORIZON = 24


@dataclass(frozen=True)
class WalkLaw:
    n: int
    p: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "p", to_fraction(self.p))
        if self.n < 0:
            raise ValueError("horizon must be nonnegative")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")

    def position_pmf(self, r: int) -> Fraction:
        return position_pmf(self.n, r, self.p)


@dataclass(frozen=True)
class Path:
    steps: tuple[int, ...]
    partials: tuple[int, ...]

    @classmethod
    def from_steps(cls, steps) -> "Path":
        steps = tuple(steps)
        if any(s not in (-1, 1) for s in steps):
            raise ValueError("steps must be +1 or -1")
        return cls(steps, (0, *accumulate(steps)))

    @property
    def end(self) -> int:
        return self.partials[-1]


def path_count(n: int, x: int) -> int:
    """N_{n,x}: number of paths from the origin to (n, x)."""
    if n < 0 or abs(x) > n or (n + x) % 2:
        return 0
    return binomial(n, (n + x) // 2)


def ballot_probability(p: int, q: int) -> Fraction:
    """P(the p-vote candidate leads strictly throughout a uniform count)."""
    if q < 0 or p <= q:
        raise NotMajority(f"need p > q >= 0, got p={p}, q={q}")
    return Fraction(p - q, p + q)


def reflection_count(a: int, alpha: int, b: int, beta: int) -> tuple[int, int]:
    """Paths from (a, alpha) to (b, beta): (touching the axis, all).

    Reflecting the initial segment up to the first zero maps touching paths
    bijectively onto paths from (a, -alpha) to (b, beta).
    """
    if not (b > a >= 0 and alpha > 0 and beta > 0):
        raise ValueError("need b > a >= 0 and positive alpha, beta")
    t = b - a
    return path_count(t, beta + alpha), path_count(t, beta - alpha)


def position_pmf(n: int, r: int, p=Fraction(1, 2)) -> Fraction:
    """P(S_n = r) for a walk with up-probability p."""
    p = to_fraction(p)
    count = path_count(n, r)
    if count == 0:
        return Fraction(0)
    ups = (n + r) // 2
    return count * p**ups * (1 - p) ** (n - ups)


def return_probability(nu: int) -> Fraction:
    """U_{2nu} = P(S_{2nu} = 0) = C(2nu, nu) 2^(-2nu)."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    return Fraction(binomial(2 * nu, nu), 4**nu)


def first_return_probability(nu: int) -> Fraction:
    """f_{2nu}: probability that the first return to 0 happens at 2nu."""
    if nu < 1:
        raise ValueError("first returns start at nu = 1")
    u = return_probability(nu)
    f = u / (2 * nu - 1)
    if f != return_probability(nu - 1) - u:
        raise AssertionError("first-return identities disagree")
    return f


def no_zero_probability(n: int, strictly_positive: bool = False) -> Fraction:
    """P(S_1 != 0, ..., S_{2n} != 0), halved when requiring S_k > 0."""
    u = return_probability(n)
    return u / 2 if strictly_positive and n > 0 else u


def last_visit_pmf(k: int, n: int) -> Fraction:
    """P(last zero of S_0..S_{2n} occurs at time 2k) = U_{2k} U_{2n-2k}."""
    if k < 0 or k > n:
        raise IndexOutOfRange(f"need 0 <= k <= n, got k={k}, n={n}")
    return return_probability(k) * return_probability(n - k)


def arcsine_pmf(n: int) -> list[Fraction]:
    return [last_visit_pmf(k, n) for k in range(n + 1)]


def enumerate_paths(n: int) -> list[Path]:
    """All 2^n paths of length n, in lexicographic order of steps."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_ENUMERATION_HORIZON:
        raise HorizonTooLarge(f"n={n} exceeds {MAX_ENUMERATION_HORIZON}")
    return [Path.from_steps(s) for s in product((-1, 1), repeat=n)]
