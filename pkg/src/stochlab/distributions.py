"""Named probability laws with closed-form pmf/pdf, cdf, moments and CFs.

Parameters given as ints, Fractions or strings are held exactly, so the
discrete laws with rational parameters return exact Fractions. Floats are
accepted too and simply propagate as floats.

Geometric uses P[X = k] = (1 - p) p^k on k = 0, 1, ... (heads before the
first tail); :meth:`Geometric.first_success` builds the shifted form
(1 - r) r^(n-1) on n = 1, 2, ...
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Real
from typing import ClassVar, NamedTuple, Sequence

import numpy as np

from .errors import (
    BadRate,
    DimensionMismatch,
    MomentUndefined,
    NoClosedForm,
    Unsupported,
    UnsupportedPoint,
)
from .exact_core import format_rational

Number = Fraction | float

ZETA_EM_CUTOFF = 12
ZETA_EM_TERMS = 8
# B_2, B_4, ..., B_16
_BERNOULLI_EVEN = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
]


def _num(x) -> Number:
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(x, (Fraction, float)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Real):
        return float(x)
    raise TypeError(f"not a number: {x!r}")


def _as_int_point(x) -> int:
    """Integer value of a lattice point, or UnsupportedPoint."""
    if isinstance(x, bool):
        raise UnsupportedPoint("booleans are not lattice points")
    if isinstance(x, Integral):
        return int(x)
    if isinstance(x, (Fraction, float)) and float(x).is_integer():
        return int(x)
    raise UnsupportedPoint(f"{x!r} is not an integer point")


def _exp(x: Number) -> float:
    return math.exp(float(x))


def zeta_tail(s: float, m: int) -> float:
    """sum_{n >= m} n^(-s) by Euler-Maclaurin at the cut m (m >= 1)."""
    s = float(s)
    total = m ** (1 - s) / (s - 1) + 0.5 * m ** (-s)
    rising = s
    for j, b in enumerate(_BERNOULLI_EVEN, start=1):
        # rising = s (s+1) ... (s + 2j - 2)
        total += float(b) / math.factorial(2 * j) * rising * m ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return total


def riemann_zeta(s: float) -> float:
    """zeta(s) for real s > 1, absolute error below 1e-12."""
    s = float(s)
    if s <= 1:
        raise ValueError("zeta(s) diverges for s <= 1")
    head = math.fsum(n ** (-s) for n in range(1, ZETA_EM_CUTOFF))
    return head + zeta_tail(s, ZETA_EM_CUTOFF)


class Distribution:
    """Common interface; concrete laws are the frozen dataclasses below."""

    tag: ClassVar[str]
    discrete: ClassVar[bool]

    def pmf(self, x) -> Number:
        raise UnsupportedPoint(f"{self.tag} has no probability mass function")

    def pdf(self, x) -> float:
        raise UnsupportedPoint(f"{self.tag} has no density")

    def mass_or_density(self, x) -> Number:
        return self.pmf(x) if self.discrete else self.pdf(x)

    def cdf(self, t) -> Number:
        raise NotImplementedError

    def jump(self, a) -> Number:
        """F(a) - F(a-), i.e. P[X = a]."""
        if not self.discrete:
            return 0.0
        try:
            return self.pmf(a)
        except UnsupportedPoint:
            return Fraction(0)

    def mean(self) -> Number:
        raise NotImplementedError

    def variance(self) -> Number:
        raise NotImplementedError

    def char_fn(self, xi: float) -> complex:
        raise NotImplementedError

    def is_nonnegative(self) -> bool:
        return True

    def params(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        out = {"tag": self.tag}
        for k, v in self.params().items():
            if isinstance(v, Fraction):
                out[k] = format_rational(v)
            elif isinstance(v, float):
                out[k] = repr(v)
            elif isinstance(v, tuple):
                out[k] = [format_rational(x) if isinstance(x, Fraction) else repr(x) for x in v]
            else:
                out[k] = v
        return out


def _check_prob(p, *, allow_one=True):
    if not (0 <= p <= 1) or (not allow_one and p == 1):
        raise ValueError(f"probability parameter {p} out of range")


@dataclass(frozen=True)
class Bernoulli(Distribution):
    p: Number
    tag: ClassVar[str] = "bernoulli"
    discrete: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "p", _num(self.p))
        _check_prob(self.p)

    def pmf(self, x):
        k = _as_int_point(x)
        if k == 1:
            return self.p
        if k == 0:
            return 1 - self.p
        return Fraction(0) if isinstance(self.p, Fraction) else 0.0

    def cdf(self, t):
        if t < 0:
            return Fraction(0)
        return 1 - self.p if t < 1 else Fraction(1)

    def mean(self):
        return self.p

    def variance(self):
        return self.p * (1 - self.p)

    def char_fn(self, xi):
        p = float(self.p)
        return 1 - p + p * cmath.exp(1j * xi)

    def params(self):
        return {"p": self.p}


@dataclass(frozen=True)
class Binomial(Distribution):
    n: int
    p: Number
    tag: ClassVar[str] = "binomial"
    discrete: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "p", _num(self.p))
        object.__setattr__(self, "n", int(self.n))
        if self.n < 1:
            raise ValueError("binomial needs n >= 1")
        _check_prob(self.p)

    def pmf(self, x):
        k = _as_int_point(x)
        if not 0 <= k <= self.n:
            return Fraction(0) if isinstance(self.p, Fraction) else 0.0
        return math.comb(self.n, k) * self.p**k * (1 - self.p) ** (self.n - k)

    def cdf(self, t):
        if t < 0:
            return Fraction(0)
        top = min(self.n, math.floor(t))
        return sum((self.pmf(k) for k in range(top + 1)), Fraction(0))

    def mean(self):
        return self.n * self.p

    def variance(self):
        return self.n * self.p * (1 - self.p)

    def char_fn(self, xi):
        p = float(self.p)
        return (1 - p + p * cmath.exp(1j * xi)) ** self.n

    def params(self):
        return {"n": self.n, "p": self.p}


@dataclass(frozen=True)
class Geometric(Distribution):
    p: Number
    shift: int = 0
    tag: ClassVar[str] = "geometric"
    discrete: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "p", _num(self.p))
        _check_prob(self.p, allow_one=False)
        if self.shift not in (0, 1):
            raise ValueError("shift must be 0 or 1")

    @classmethod
    def first_success(cls, r) -> "Geometric":
        """Law of the index of the first tail: (1 - r) r^(n-1), n >= 1."""
        return cls(r, shift=1)

    def pmf(self, x):
        k = _as_int_point(x) - self.shift
        if k < 0:
            return Fraction(0) if isinstance(self.p, Fraction) else 0.0
        return (1 - self.p) * self.p**k

    def cdf(self, t):
        k = math.floor(t) - self.shift
        if k < 0:
            return Fraction(0)
        return 1 - self.p ** (k + 1)

    def mean(self):
        return self.p / (1 - self.p) + self.shift

    def variance(self):
        return self.p / (1 - self.p) ** 2

    def char_fn(self, xi):
        p = float(self.p)
        return cmath.exp(1j * xi * self.shift) * (1 - p) / (1 - p * cmath.exp(1j * xi))

    def params(self):
        return {"p": self.p, "shift": self.shift}


@dataclass(frozen=True)
class Poisson(Distribution):
    lam: Number
    tag: ClassVar[str] = "poisson"
    discrete: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "lam", _num(self.lam))
        if not self.lam > 0:
            raise ValueError("Poisson rate must be positive")

    def pmf(self, x):
        k = _as_int_point(x)
        if k < 0:
            return 0.0
        lam = float(self.lam)
        return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))

    def cdf(self, t):
        if t < 0:
            return 0.0
        top = math.floor(t)
        lam = float(self.lam)
        terms = []
        term = math.exp(-lam)
        for k in range(top + 1):
            terms.append(term)
            if k > lam and term < 1e-300:
                break
            term *= lam / (k + 1)
        return min(1.0, math.fsum(terms))

    def mean(self):
        return self.lam

    def variance(self):
        return self.lam

    def char_fn(self, xi):
        return cmath.exp(-float(self.lam) * (1 - cmath.exp(1j * xi)))

    def params(self):
        return {"lambda": self.lam}


@dataclass(frozen=True)
class DiscreteUniform(Distribution):
    support: tuple
    tag: ClassVar[str] = "discrete_uniform"
    discrete: ClassVar[bool] = True

    def __post_init__(self):
        values = tuple(sorted(set(_num(v) for v in self.support)))
        if not values:
            raise ValueError("support must be nonempty")
        object.__setattr__(self, "support", values)

    def pmf(self, x):
        if isinstance(x, bool) or not isinstance(x, (int, Fraction, float)):
            raise UnsupportedPoint(f"{x!r} is not a number")
        return Fraction(int(x in self.support), len(self.support))

    def cdf(self, t):
        return Fraction(sum(1 for v in self.support if v <= t), len(self.support))

    def mean(self):
        return sum(self.support, Fraction(0)) / len(self.support)

    def variance(self):
        m = self.mean()
        return sum(((v - m) ** 2 for v in self.support), Fraction(0)) / len(self.support)

    def char_fn(self, xi):
        return sum(cmath.exp(1j * xi * float(v)) for v in self.support) / len(self.support)

    def is_nonnegative(self):
        return self.support[0] >= 0

    def params(self):
        return {"support": self.support}


def rademacher() -> DiscreteUniform:
    """Uniform law on {-1, +1}."""
    return DiscreteUniform((-1, 1))


@dataclass(frozen=True)
class Zeta(Distribution):
    s: Number
    tag: ClassVar[str] = "zeta"
    discrete: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "s", _num(self.s))
        if not self.s > 1:
            raise ValueError("zeta law needs s > 1")

    @property
    def normalizer(self) -> float:
        return riemann_zeta(self.s)

    def pmf(self, x):
        k = _as_int_point(x)
        if k < 1:
            return 0.0
        return k ** (-float(self.s)) / self.normalizer

    def cdf(self, t):
        if t == math.inf:
            return 1.0
        top = math.floor(t)
        if top < 1:
            return 0.0
        s = float(self.s)
        z = self.normalizer
        if top < 1000:
            return min(1.0, math.fsum(k ** (-s) for k in range(1, top + 1)) / z)
        return 1.0 - zeta_tail(s, top + 1) / z

    def mean(self):
        if self.s <= 2:
            raise MomentUndefined("zeta mean needs s > 2")
        return riemann_zeta(float(self.s) - 1) / self.normalizer

    def variance(self):
        if self.s <= 3:
            raise MomentUndefined("zeta variance needs s > 3")
        second = riemann_zeta(float(self.s) - 2) / self.normalizer
        return second - self.mean() ** 2

    def char_fn(self, xi):
        raise Unsupported("no closed-form characteristic function for the zeta law")

    def params(self):
        return {"s": self.s}


@dataclass(frozen=True)
class ContinuousUniform(Distribution):
    a: Number
    b: Number
    tag: ClassVar[str] = "uniform"
    discrete: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "a", _num(self.a))
        object.__setattr__(self, "b", _num(self.b))
        if not self.a < self.b:
            raise ValueError("need a < b")

    def pdf(self, x):
        x = float(x)
        return 1.0 / float(self.b - self.a) if float(self.a) <= x <= float(self.b) else 0.0

    def cdf(self, t):
        u = (float(t) - float(self.a)) / float(self.b - self.a)
        return min(1.0, max(0.0, u))

    def mean(self):
        return (self.a + self.b) / 2

    def variance(self):
        return (self.b - self.a) ** 2 / 12

    def char_fn(self, xi):
        if xi == 0:
            return 1 + 0j
        a, b = float(self.a), float(self.b)
        return (cmath.exp(1j * xi * b) - cmath.exp(1j * xi * a)) / (1j * xi * (b - a))

    def is_nonnegative(self):
        return self.a >= 0

    def params(self):
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class Exponential(Distribution):
    lam: Number
    tag: ClassVar[str] = "exponential"
    discrete: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "lam", _num(self.lam))
        if not self.lam > 0:
            raise ValueError("rate must be positive")

    def pdf(self, x):
        x = float(x)
        return float(self.lam) * math.exp(-float(self.lam) * x) if x >= 0 else 0.0

    def cdf(self, t):
        t = float(t)
        return -math.expm1(-float(self.lam) * t) if t > 0 else 0.0

    def survival(self, t) -> float:
        t = float(t)
        return math.exp(-float(self.lam) * t) if t > 0 else 1.0

    def mean(self):
        return 1 / self.lam

    def variance(self):
        return 1 / self.lam**2

    def char_fn(self, xi):
        lam = float(self.lam)
        return lam / (lam - 1j * xi)

    def params(self):
        return {"lambda": self.lam}


@dataclass(frozen=True)
class Gaussian(Distribution):
    m: Number
    var: Number
    tag: ClassVar[str] = "gaussian"
    discrete: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "m", _num(self.m))
        object.__setattr__(self, "var", _num(self.var))
        if not self.var > 0:
            raise ValueError("variance must be positive")

    @property
    def sd(self) -> float:
        return math.sqrt(float(self.var))

    def pdf(self, x):
        z = (float(x) - float(self.m)) / self.sd
        return math.exp(-0.5 * z * z) / (self.sd * math.sqrt(2 * math.pi))

    def cdf(self, t):
        return 0.5 * math.erfc(-(float(t) - float(self.m)) / (self.sd * math.sqrt(2)))

    def mean(self):
        return self.m

    def variance(self):
        return self.var

    def char_fn(self, xi):
        return cmath.exp(1j * float(self.m) * xi - 0.5 * float(self.var) * xi * xi)

    def is_nonnegative(self):
        return False

    def params(self):
        return {"m": self.m, "var": self.var}


_TAGS = {
    cls.tag: cls
    for cls in (Bernoulli, Binomial, Geometric, Poisson, DiscreteUniform, Zeta,
                ContinuousUniform, Exponential, Gaussian)
}
_JSON_KEYS = {"lambda": "lam", "sigma2": "var", "variance": "var"}


def from_json(doc: dict) -> Distribution:
    """Build a law from ``{"tag": "poisson", "lambda": "3/2"}`` style documents."""
    doc = dict(doc)
    if "tag" not in doc:
        raise ValueError('distribution description needs a "tag" field')
    tag = doc.pop("tag")
    if tag == "rademacher":
        return rademacher()
    try:
        cls = _TAGS[tag]
    except KeyError:
        raise ValueError(f"unknown distribution tag {tag!r}") from None
    kwargs = {_JSON_KEYS.get(k, k): v for k, v in doc.items()}
    if "support" in kwargs:
        kwargs["support"] = tuple(kwargs["support"])
    return cls(**kwargs)


# Module-level operations mirror the methods so callers can use either.

def mass_or_density(d: Distribution, x) -> Number:
    return d.mass_or_density(x)


def mean(d: Distribution) -> Number:
    return d.mean()


def variance(d: Distribution) -> Number:
    return d.variance()


def cdf(d: Distribution, t) -> Number:
    return d.cdf(t)


def jump(d: Distribution, a) -> Number:
    return d.jump(a)


def char_fn(d: Distribution, xi: float) -> complex:
    return d.char_fn(xi)


def convolve(d1: Distribution, d2: Distribution) -> Distribution:
    """Law of X + Y for independent X ~ d1, Y ~ d2, where a closed form exists."""
    if isinstance(d1, Poisson) and isinstance(d2, Poisson):
        return Poisson(d1.lam + d2.lam)
    if isinstance(d1, Gaussian) and isinstance(d2, Gaussian):
        return Gaussian(d1.m + d2.m, d1.var + d2.var)
    binom_like = (Bernoulli, Binomial)
    if isinstance(d1, binom_like) and isinstance(d2, binom_like) and d1.p == d2.p:
        n1 = d1.n if isinstance(d1, Binomial) else 1
        n2 = d2.n if isinstance(d2, Binomial) else 1
        return Binomial(n1 + n2, d1.p)
    raise NoClosedForm(f"no closed form for {d1.tag} + {d2.tag}")


def poisson_approx_error(n: int, lam) -> float:
    """sup over k <= n of |Binomial(n, lam/n)(k) - Poisson(lam)(k)|."""
    lam = _num(lam)
    if n < 1:
        raise ValueError("n must be positive")
    p = lam / n
    if p > 1:
        raise BadRate(f"lambda/n = {p} exceeds 1")
    target = Poisson(lam)
    if p == 1:
        # point mass at n
        return max(abs(float(k == n) - target.pmf(k)) for k in range(n + 1))
    binom = Binomial(n, p)
    return max(abs(float(binom.pmf(k)) - target.pmf(k)) for k in range(n + 1))


class TailBounds(NamedTuple):
    markov: Number | None
    chebyshev: Number
    exact_tail: Number
    exact_deviation_tail: Number


def tail_bounds(d: Distribution, a) -> TailBounds:
    """Markov and Chebyshev bounds next to the exact tails.

    exact_tail is P[X > a]; exact_deviation_tail is P[|X - E X| > a].
    The Markov bound is only reported for nonnegative laws.
    """
    a = _num(a)
    if not a > 0:
        raise ValueError("a must be positive")
    mu = d.mean()
    var = d.variance()
    markov = mu / a if d.is_nonnegative() else None
    chebyshev = var / a**2
    exact_tail = 1 - d.cdf(a)
    lo = mu - a
    exact_dev = 1 - d.cdf(mu + a) + (d.cdf(lo) - d.jump(lo))
    slack = 1e-12
    if markov is not None and exact_tail > markov + slack:
        raise AssertionError("Markov bound violated")
    if exact_dev > chebyshev + slack:
        raise AssertionError("Chebyshev bound violated")
    return TailBounds(markov, chebyshev, exact_tail, exact_dev)


@dataclass(frozen=True)
class GaussianVector:
    mean: tuple
    covariance: tuple

    def __post_init__(self):
        mu = tuple(_num(x) for x in self.mean)
        q = tuple(tuple(_num(x) for x in row) for row in self.covariance)
        if len(q) != len(mu) or any(len(row) != len(mu) for row in q):
            raise DimensionMismatch("covariance shape does not match mean")
        if any(q[i][j] != q[j][i] for i in range(len(mu)) for j in range(i)):
            raise ValueError("covariance must be symmetric")
        if mu and np.linalg.eigvalsh(self._float_cov(q)).min() < -1e-10:
            raise ValueError("covariance must be positive semidefinite")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", q)

    @staticmethod
    def _float_cov(q) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in q], dtype=float)

    @property
    def dim(self) -> int:
        return len(self.mean)

    def marginal(self, i: int) -> Gaussian:
        return Gaussian(self.mean[i], self.covariance[i][i])


def gaussian_vector_cf(v: GaussianVector, u: Sequence[float]) -> complex:
    """exp(i <u, mean> - <u, Q u> / 2)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (v.dim,):
        raise DimensionMismatch(f"u has shape {u.shape}, expected ({v.dim},)")
    mu = np.array([float(x) for x in v.mean])
    q = GaussianVector._float_cov(v.covariance)
    return cmath.exp(1j * float(u @ mu) - 0.5 * float(u @ q @ u))
