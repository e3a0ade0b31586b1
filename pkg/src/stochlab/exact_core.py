"""Exact rational arithmetic helpers and the counting layer.

Rationals are :class:`fractions.Fraction` throughout; counts are plain
Python ints (arbitrary precision). Nothing in this module rounds, except
:func:`stirling_bounds`, which uses outward-rounded interval arithmetic.
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from mpmath import iv
from mpmath.libmp import to_rational

from .errors import MissingSubset, OutOfRange, PartsMismatch

Rational = Fraction

STIRLING_DPS = 50


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` / decimal strings to a Fraction.

    Floats are refused: an exact result must never quietly inherit binary
    rounding error.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def format_rational(x: Fraction) -> str:
    """Canonical ``"p/q"`` form, always with an explicit denominator."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def binomial(n: int, k: int) -> int:
    """C(n, k), total over integers: 0 whenever k < 0 or k > n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def multinomial(n: int, parts: Iterable[int]) -> int:
    parts = list(parts)
    if any(r < 0 for r in parts):
        raise ValueError("parts must be nonnegative")
    if sum(parts) != n:
        raise PartsMismatch(f"parts sum to {sum(parts)}, expected {n}")
    out = math.factorial(n)
    for r in parts:
        out //= math.factorial(r)
    return out


def sampling_counts(n: int, r: int) -> tuple[int, int]:
    """Ordered samples of size r from n items: (with, without) replacement."""
    if n < 0 or r < 0:
        raise ValueError("n and r must be nonnegative")
    return n**r, math.perm(n, r) if r <= n else 0


def occupancy_count(r: int, n: int) -> int:
    """Distinguishable placements of r indistinguishable balls in n cells."""
    if n < 1:
        raise ValueError("need at least one cell")
    if r < 0:
        raise ValueError("r must be nonnegative")
    return binomial(n + r - 1, r)


def _iv_to_fraction(x, upper: bool) -> Fraction:
    lo, hi = x._mpi_
    p, q = to_rational(hi if upper else lo)
    return Fraction(p, q)


def stirling_bounds(n: int) -> tuple[Fraction, Fraction]:
    """Rigorous bracket for n! from the two-sided Stirling estimate.

    n! = sqrt(2 pi) n^(n+1/2) exp(-n + theta/(12n)) with
    1 - 1/(12n+1) <= theta <= 1. Both ends are evaluated in interval
    arithmetic at 50 digits and the outer endpoints are returned, so the
    bracket holds despite rounding.
    """
    if n < 1:
        raise ValueError("n must be positive")
    ctx = iv
    old = ctx.dps
    ctx.dps = STIRLING_DPS
    try:
        kappa = ctx.sqrt(2 * ctx.pi)
        nn = ctx.mpf(n)
        power = ctx.exp((nn + ctx.mpf(1) / 2) * ctx.log(nn))
        theta_lo = 1 - ctx.mpf(1) / (12 * n + 1)
        lower = kappa * power * ctx.exp(-nn + theta_lo / (12 * nn))
        upper = kappa * power * ctx.exp(-nn + ctx.mpf(1) / (12 * nn))
        return _iv_to_fraction(lower, upper=False), _iv_to_fraction(upper, upper=True)
    finally:
        ctx.dps = old


def _normalize_subset(key) -> frozenset:
    s = frozenset(key)
    if not s:
        raise ValueError("subsets must be nonempty")
    return s


def union_probability(intersection_probs: Mapping) -> Fraction:
    """P(A_1 u ... u A_N) by inclusion-exclusion.

    ``intersection_probs`` maps each nonempty subset of the event indices
    (any iterable of ints) to P of the intersection of those events. The
    index set is taken to be the union of the keys.
    """
    probs = {_normalize_subset(k): to_fraction(v) for k, v in intersection_probs.items()}
    if not probs:
        raise MissingSubset("no events supplied")
    indices = sorted(frozenset().union(*probs))
    for p in probs.values():
        if not 0 <= p <= 1:
            raise OutOfRange(f"probability {p} outside [0, 1]")
    total = Fraction(0)
    for r in range(1, len(indices) + 1):
        s_r = Fraction(0)
        for combo in combinations(indices, r):
            try:
                s_r += probs[frozenset(combo)]
            except KeyError:
                raise MissingSubset(f"missing probability for subset {combo}") from None
        total += s_r if r % 2 else -s_r
    if not 0 <= total <= 1:
        raise OutOfRange(f"inclusion-exclusion gave {total}; inputs are inconsistent")
    return total


def matching_inputs(N: int) -> dict[frozenset, Fraction]:
    """Intersection probabilities for 'card i lands in place i' events."""
    if N < 1:
        raise ValueError("N must be positive")
    fact_n = math.factorial(N)
    out = {}
    for r in range(1, N + 1):
        p = Fraction(math.factorial(N - r), fact_n)
        for combo in combinations(range(1, N + 1), r):
            out[frozenset(combo)] = p
    return out


def matching_probability(N: int) -> Fraction:
    """P(a uniform permutation of N items has at least one fixed point)."""
    if N < 1:
        raise ValueError("N must be positive")
    total = Fraction(0)
    for r in range(1, N + 1):
        term = Fraction(1, math.factorial(r))
        total += term if r % 2 else -term
    return total
