"""Seeded sampling and limit-theorem experiments.

Randomness comes from numpy's SeedSequence/PCG64: a stream is identified
by (seed, stream_id, child path) and children are derived through
SeedSequence spawn keys, so a replica's draws depend only on its index.
All pass/fail thresholds are fixed-seed regression bands, not hypothesis
tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .distributions import (
    Bernoulli,
    Binomial,
    ContinuousUniform,
    DiscreteUniform,
    Distribution,
    Exponential,
    Gaussian,
    Geometric,
    Poisson,
    Zeta,
    rademacher,
    zeta_tail,
)
from .errors import DegenerateVariance, UnsupportedDescriptor

CHECKPOINTS = (100, 1000, 10_000)
_DISCRETE_TAIL = 1e-16
_TABLE_LIMIT = 10**7
_ZETA_TABLE = 10**5


@dataclass(frozen=True)
class SeededStream:
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def split(self, child: int) -> "SeededStream":
        return SeededStream(self.seed, self.stream_id, (*self.path, child))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def random(self, count: int) -> np.ndarray:
        """``count`` uniforms on [0, 1), always the first draws of this stream."""
        return self.generator().random(count)


def _float_stat(x) -> str:
    return repr(float(x))


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    statistics: dict
    passed: bool
    tolerance: dict
    seed: int
    note: str = ""

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, dict):
                return {str(k): enc(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            if isinstance(v, bool) or v is None or isinstance(v, str):
                return v
            if isinstance(v, (int, np.integer)):
                return str(int(v))
            if isinstance(v, Fraction):
                return f"{v.numerator}/{v.denominator}"
            return _float_stat(v)

        out = {
            "name": self.name,
            "parameters": enc(self.parameters),
            "statistics": enc(self.statistics),
            "passed": self.passed,
            "tolerance": enc(self.tolerance),
            "seed": str(self.seed),
        }
        if self.note:
            out["note"] = self.note
        return out


def _discrete_table(d: Distribution) -> tuple[np.ndarray, np.ndarray]:
    """(support points, cumulative probabilities) covering all but ~1e-16 mass."""
    if isinstance(d, DiscreteUniform):
        pts = np.array([float(v) for v in d.support])
        cum = np.arange(1, len(pts) + 1) / len(pts)
        return pts, cum
    if isinstance(d, Bernoulli):
        return np.array([0.0, 1.0]), np.array([1 - float(d.p), 1.0])
    if isinstance(d, Binomial):
        pmf = np.array([float(d.pmf(i)) for i in range(d.n + 1)])
        return np.arange(d.n + 1, dtype=float), np.cumsum(pmf)
    if isinstance(d, Geometric):
        # survival p^(k+1) is closed form; stop once it drops below the tail cut
        lp = math.log(float(d.p))
        top = min(_TABLE_LIMIT, max(1, math.ceil(math.log(_DISCRETE_TAIL) / lp)))
        k = np.arange(top, dtype=float)
        return k + d.shift, -np.expm1((k + 1) * lp)
    if isinstance(d, Zeta):
        s_ = float(d.s)
        k = np.arange(1, _ZETA_TABLE + 1, dtype=float)
        return k, np.cumsum(k ** -s_) / d.normalizer
    if isinstance(d, Poisson):
        pts, cum = [], []
        k, acc = 0, 0.0
        stop = float(d.lam) + 60 * math.sqrt(float(d.lam)) + 60
        while acc < 1 - _DISCRETE_TAIL and k <= stop:
            acc += float(d.pmf(k))
            pts.append(float(k))
            cum.append(acc)
            k += 1
        return np.array(pts), np.array(cum)
    raise TypeError(f"not a tabulated discrete law: {d.tag}")


def _zeta_tail_quantile(d: Zeta, u: np.ndarray) -> np.ndarray:
    """Smallest k past the table with P[X > k] <= u, by vectorized bisection.

    The survival comes straight from the Euler-Maclaurin tail, so it stays
    accurate where 1 - cdf would cancel. The bracket starts around the
    leading-order inverse (u (s-1) zeta(s))^(-1/(s-1)).
    """
    s_, z = float(d.s), d.normalizer
    out = np.full(u.shape, np.inf)
    live = u > 0
    u = u[live]

    def survival(k):
        return zeta_tail(s_, k + 1.0) / z

    with np.errstate(over="ignore", divide="ignore"):
        guess = (u * (s_ - 1) * z) ** (-1 / (s_ - 1))
    finite = np.isfinite(guess) & (guess < 1e299)
    guess = np.where(finite, guess, 0.0)
    floor_ = float(_ZETA_TABLE)
    lo = np.where(finite, np.maximum(np.floor(guess / 2), floor_), floor_)
    hi = np.where(finite, np.maximum(np.ceil(2 * guess), lo + 1), np.inf)
    # survival(lo) > u must hold (true at the table edge)
    bad = (lo > floor_) & (survival(lo) <= u)
    while bad.any():
        lo[bad] = np.maximum(np.floor(lo[bad] / 2), floor_)
        bad = (lo > floor_) & (survival(lo) <= u)
    short = np.isfinite(hi) & (survival(hi) > u)
    while short.any():
        hi[short] *= 2
        short = np.isfinite(hi) & (hi < 1e300) & (survival(hi) > u)
    hi[hi >= 1e300] = np.inf
    todo = np.isfinite(hi) & (hi - lo > np.maximum(1.0, hi * 2**-52))
    while todo.any():
        mid = np.floor((lo[todo] + hi[todo]) / 2)
        above = survival(mid) > u[todo]
        lo[np.flatnonzero(todo)[above]] = mid[above]
        hi[np.flatnonzero(todo)[~above]] = mid[~above]
        todo = np.isfinite(hi) & (hi - lo > np.maximum(1.0, hi * 2**-52))
    out[live] = hi
    return out


def transform_uniforms(d: Distribution, u: np.ndarray, v: np.ndarray | None = None) -> np.ndarray:
    """Map uniforms to draws from ``d``.

    Discrete laws: X = first support point whose cdf reaches 1 - u (so u in
    (0, 1]). Exponential: -ln(1 - u) / lambda. Gaussian: with E = -ln(1 - u)
    exponential and V = v uniform, sqrt(E) cos(2 pi V) is N(0, 1/2); it is
    scaled by sqrt(2) sd and shifted by the mean.
    """
    if d.discrete:
        pts, cum = _discrete_table(d)
        idx = np.searchsorted(cum, 1.0 - u, side="left")
        out = pts[np.minimum(idx, len(pts) - 1)]
        if isinstance(d, Zeta):
            beyond = np.flatnonzero(idx >= len(pts))
            if beyond.size:
                out[beyond] = _zeta_tail_quantile(d, np.asarray(u, dtype=float)[beyond])
        return out
    if isinstance(d, ContinuousUniform):
        a, b = float(d.a), float(d.b)
        return a + (b - a) * u
    if isinstance(d, Exponential):
        return -np.log1p(-u) / float(d.lam)
    if isinstance(d, Gaussian):
        if v is None:
            raise ValueError("the Gaussian path needs a second uniform array")
        e = -np.log1p(-u)
        z = np.sqrt(e) * np.cos(2 * np.pi * v)
        return float(d.m) + math.sqrt(2.0) * d.sd * z
    raise TypeError(f"cannot sample {d.tag}")


def sample(d: Distribution, stream, count: int) -> np.ndarray:
    """``count`` iid draws from ``d``; deterministic per stream."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return np.empty(0)
    if isinstance(d, Gaussian):
        uv = stream.random(2 * count)
        return transform_uniforms(d, uv[:count], uv[count:])
    return transform_uniforms(d, stream.random(count))


def _vector_cdf(d: Distribution, x: np.ndarray) -> np.ndarray:
    """cdf evaluated elementwise, vectorized for the continuous laws."""
    if isinstance(d, ContinuousUniform):
        a, b = float(d.a), float(d.b)
        return np.clip((x - a) / (b - a), 0.0, 1.0)
    if isinstance(d, Exponential):
        return np.where(x > 0, -np.expm1(-float(d.lam) * np.maximum(x, 0)), 0.0)
    if isinstance(d, Gaussian):
        return normal_cdf((x - float(d.m)) / d.sd)
    uniq, inv = np.unique(x, return_inverse=True)
    vals = np.array([float(d.cdf(float(t))) for t in uniq])
    return vals[inv]


def _vector_jump(d: Distribution, x: np.ndarray) -> np.ndarray:
    if not d.discrete:
        return np.zeros_like(x, dtype=float)
    uniq, inv = np.unique(x, return_inverse=True)
    vals = np.array([float(d.jump(float(t))) for t in uniq])
    return vals[inv]


_erf = np.frompyfunc(math.erf, 1, 1)


def normal_cdf(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return 0.5 * (1.0 + _erf(z / math.sqrt(2.0)).astype(float))


def ks_statistic(samples: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup_x |F_n(x) - F(x)| for a continuous reference cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("need at least one sample")
    f = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ecdf_sup_distance(samples: Sequence[float], d: Distribution) -> float:
    """sup over sample points of both one-sided gaps |F_n(x) - F(x)|, |F_n(x-) - F(x-)|.

    Handles ties and atoms, so it is valid for discrete laws too.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("need at least one sample")
    pts = np.unique(x)
    right = np.searchsorted(x, pts, side="right") / n
    left = np.searchsorted(x, pts, side="left") / n
    f = _vector_cdf(d, pts)
    f_left = f - _vector_jump(d, pts)
    return float(max(np.max(np.abs(right - f)), np.max(np.abs(left - f_left))))


def _sigma(d: Distribution) -> float:
    return math.sqrt(float(d.variance()))


def lln_experiment(d: Distribution, n: int, stream: SeededStream) -> ExperimentReport:
    """Running means at checkpoints; passes iff the final gap is within 4 sigma / sqrt(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    mu = float(d.mean())
    sigma = _sigma(d)
    x = sample(d, stream, n)
    running = np.cumsum(x) / np.arange(1, n + 1)
    checkpoints = [k for k in CHECKPOINTS if k < n] + [n]
    deviations = {k: abs(float(running[k - 1]) - mu) for k in checkpoints}
    band = 4 * sigma / math.sqrt(n)
    final = deviations[n]
    return ExperimentReport(
        "lln",
        {"distribution": d.to_json(), "n": n},
        {"mean": mu, "running_mean": {k: float(running[k - 1]) for k in checkpoints},
         "deviation": deviations, "final_deviation": final},
        final <= band,
        {"band": band},
        stream.seed,
    )


def normalized_sums(d: Distribution, n: int, replicas: int, stream: SeededStream) -> np.ndarray:
    """(S_n - n E X) / (sigma sqrt n), one substream per replica."""
    mu = float(d.mean())
    sigma = _sigma(d)
    if sigma == 0:
        raise DegenerateVariance("the CLT needs positive variance")
    out = np.empty(replicas)
    for r in range(replicas):
        x = sample(d, stream.split(r), n)
        out[r] = (x.sum() - n * mu) / (sigma * math.sqrt(n))
    return out


def clt_experiment(d: Distribution, n: int, replicas: int, stream: SeededStream,
                   ks_tolerance: float | None = None) -> ExperimentReport:
    """KS distance between normalized sums and N(0, 1), plus sqrt(n) * KS."""
    if n < 1 or replicas < 1:
        raise ValueError("n and replicas must be positive")
    z = normalized_sums(d, n, replicas, stream)
    ks = ks_statistic(z, normal_cdf)
    tol = ks_tolerance if ks_tolerance is not None else 1.4 / math.sqrt(replicas) + 1.0 / math.sqrt(n)
    return ExperimentReport(
        "clt",
        {"distribution": d.to_json(), "n": n, "replicas": replicas},
        {"ks": ks, "sqrt_n_ks": math.sqrt(n) * ks},
        ks <= tol,
        {"ks": tol},
        stream.seed,
    )


def glivenko_cantelli(d: Distribution, n: int, stream: SeededStream) -> ExperimentReport:
    """sup |F_n - F| over sample points; passes iff within 4 / sqrt(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    x = sample(d, stream, n)
    sup = ecdf_sup_distance(x, d)
    band = 4 / math.sqrt(n)
    return ExperimentReport(
        "glivenko_cantelli",
        {"distribution": d.to_json(), "n": n},
        {"sup_distance": sup},
        sup <= band,
        {"band": band},
        stream.seed,
    )


def borel_cantelli_demo(n_max: int, stream) -> ExperimentReport:
    """For iid Exp(1), X_n / log n has limsup 1.

    Reports r_N = max_{2 <= n <= N} X_n / log n at N in {1e2, 1e3, 1e4, n_max}
    and the number of n with X_n > 1.5 log n. The finite-n pass band
    r_{n_max} in [1, 2] with fewer than 10 exceedances is a harness
    convention, since the statement itself is about the limit.
    """
    if n_max < 100:
        raise ValueError("n_max must be at least 100")
    x = -np.log1p(-np.asarray(stream.random(n_max), dtype=float))
    idx = np.arange(1, n_max + 1)
    ratio = x[1:] / np.log(idx[1:])
    running = np.maximum.accumulate(ratio)
    checkpoints = [k for k in CHECKPOINTS if k < n_max] + [n_max]
    r = {k: float(running[k - 2]) for k in checkpoints}
    exceed = {k: int(np.sum(x[1:k] > np.log(idx[1:k]))) for k in checkpoints}
    big = int(np.sum(ratio > 1.5))
    final = r[n_max]
    return ExperimentReport(
        "borel_cantelli",
        {"n_max": n_max},
        {"ratio": r, "exceed_log_count": exceed, "exceed_1.5_log_count": big},
        1.0 <= final <= 2.0 and big < 10,
        {"ratio_band": [1.0, 2.0], "max_1.5_exceedances": 9},
        getattr(stream, "seed", -1),
        note="finite-horizon shadow of an almost-sure limsup statement; the band is a convention",
    )


# --- random series ----------------------------------------------------------

@dataclass(frozen=True)
class PowerSequence:
    """a_n = n^(-alpha)."""

    alpha: float

    def terms(self, n: np.ndarray) -> np.ndarray:
        return n ** (-float(self.alpha))

    def squares_converge(self) -> bool:
        return 2 * float(self.alpha) > 1


@dataclass(frozen=True)
class GeometricSequence:
    """a_n = r^n."""

    r: float

    def terms(self, n: np.ndarray) -> np.ndarray:
        return float(self.r) ** n

    def squares_converge(self) -> bool:
        return abs(float(self.r)) < 1


@dataclass(frozen=True)
class HarmonicLogSequence:
    """a_n = (n log(n+1)^beta)^(-1/2); sum of squares converges iff beta > 1."""

    beta: float

    def terms(self, n: np.ndarray) -> np.ndarray:
        return 1.0 / np.sqrt(n * np.log(n + 1.0) ** float(self.beta))

    def squares_converge(self) -> bool:
        return float(self.beta) > 1


SEQUENCES = {"power": PowerSequence, "geometric": GeometricSequence, "harmonic_log": HarmonicLogSequence}
_SEQUENCE_KINDS = {cls: kind for kind, cls in SEQUENCES.items()}


def sequence_from_descriptor(desc) -> object:
    if isinstance(desc, (PowerSequence, GeometricSequence, HarmonicLogSequence)):
        return desc
    if isinstance(desc, dict):
        desc = dict(desc)
        kind = desc.pop("kind", None)
        if kind in SEQUENCES:
            return SEQUENCES[kind](**{k: float(v) for k, v in desc.items()})
    raise UnsupportedDescriptor(f"unsupported sequence descriptor {desc!r}")


def random_signs_verdict(descriptor, K: int, stream: SeededStream, seeds: int = 20) -> ExperimentReport:
    """Does sum a_n xi_n converge (xi iid signs)? Verdict from sum a_n^2.

    Evidence: for each of ``seeds`` substreams, |S_2K - S_K|; the maximal
    spread is small when the series converges.
    """
    seq = sequence_from_descriptor(descriptor)
    if K < 1:
        raise ValueError("K must be positive")
    n = np.arange(1, 2 * K + 1, dtype=float)
    a = seq.terms(n)
    signs = rademacher()
    spreads = []
    for s in range(seeds):
        xi = sample(signs, stream.split(s), 2 * K)
        spreads.append(abs(float(np.sum(a[K:] * xi[K:]))))
    tail_var = float(np.sum(a[K:] ** 2))
    converges = seq.squares_converge()
    return ExperimentReport(
        "random_signs",
        {"descriptor": {"kind": _SEQUENCE_KINDS[type(seq)], **vars(seq)}, "K": K, "seeds": seeds},
        {"verdict": "converges" if converges else "diverges", "max_spread": max(spreads),
         "spread_tail_variance": tail_var},
        True,
        {},
        stream.seed,
        note="verdict from the closed-form test on sum a_n^2; spreads are evidence only",
    )


@dataclass(frozen=True)
class RademacherScale:
    """X_n = n^(-alpha) xi_n with xi_n iid uniform signs."""

    alpha: float


@dataclass(frozen=True)
class ExponentialScale:
    """X_n = n^(-alpha) E_n with E_n iid Exp(1)."""

    alpha: float


@dataclass(frozen=True)
class ThreeSeriesVerdict:
    tail_series: bool
    mean_series: bool
    variance_series: bool

    @property
    def converges(self) -> bool:
        return self.tail_series and self.mean_series and self.variance_series

    def to_json(self) -> dict:
        return {
            "tail_series_converges": self.tail_series,
            "mean_series_converges": self.mean_series,
            "variance_series_converges": self.variance_series,
            "verdict": "converges" if self.converges else "diverges",
        }


def three_series_check(descriptor, k: float) -> ThreeSeriesVerdict:
    """Convergence of sum P[|X_n| > k], sum E[X_n^(k)], sum Var(X_n^(k)).

    X^(k) = X 1{|X| <= k}. Each family is a power scale b_n = n^(-alpha), so
    every series reduces to a comparison with a p-series or an
    exponentially small sequence.
    """
    if isinstance(descriptor, dict):
        desc = dict(descriptor)
        kind = desc.pop("kind", None)
        families = {"rademacher_scale": RademacherScale, "exponential_scale": ExponentialScale}
        if kind not in families:
            raise UnsupportedDescriptor(f"unsupported family {kind!r}")
        descriptor = families[kind](float(desc["alpha"]))
    k = float(k)
    if not k > 0:
        raise ValueError("k must be positive")
    if isinstance(descriptor, RademacherScale):
        alpha = descriptor.alpha
        # |X_n| = b_n is deterministic: P[|X_n| > k] = 1{b_n > k}
        if alpha > 0:
            tail, var = True, 2 * alpha > 1
        elif alpha == 0:
            # b_n = 1: either every term is truncated away or none is
            tail, var = k >= 1, k < 1
        else:
            tail, var = False, True
        # symmetric truncation: E[X^(k)] = 0
        return ThreeSeriesVerdict(tail, True, var)
    if isinstance(descriptor, ExponentialScale):
        alpha = descriptor.alpha
        if alpha <= 0:
            # P[|X_n| > k] = exp(-k n^alpha) does not tend to 0
            return ThreeSeriesVerdict(False, False, False)
        # exp(-k n^alpha) is summable; E[X^(k)] ~ b_n and Var ~ b_n^2 as b_n -> 0
        return ThreeSeriesVerdict(True, alpha > 1, 2 * alpha > 1)
    raise UnsupportedDescriptor(f"unsupported descriptor {descriptor!r}")


def martingale_increment_sums(n: int, replicas: int, stream: SeededStream, rule: str = "sign") -> np.ndarray:
    """S_n / sqrt(n) with X_k = xi_k * g(S_{k-1}) for a predictable sign g.

    rule "sign": g = sign(S_{k-1}) with sign(0) = +1; rule "identity": g = 1.
    Each replica draws its signs xi from its own substream exactly as
    :func:`normalized_sums` does for the uniform-sign law.
    """
    if rule not in ("sign", "identity"):
        raise ValueError("rule must be 'sign' or 'identity'")
    signs = rademacher()
    xi = np.empty((replicas, n))
    for r in range(replicas):
        xi[r] = sample(signs, stream.split(r), n)
    if rule == "identity":
        totals = xi.sum(axis=1)
    else:
        s = np.zeros(replicas)
        for k in range(n):
            g = np.where(s >= 0, 1.0, -1.0)
            s = s + xi[:, k] * g
        totals = s
    return totals / math.sqrt(n)


def martingale_clt_experiment(n: int, replicas: int, stream: SeededStream, rule: str = "sign",
                              ks_tolerance: float = 0.02) -> ExperimentReport:
    if n < 64:
        raise ValueError("n must be at least 64")
    z = martingale_increment_sums(n, replicas, stream, rule)
    ks = ks_statistic(z, normal_cdf)
    return ExperimentReport(
        "martingale_clt",
        {"n": n, "replicas": replicas, "rule": rule},
        {"ks": ks, "sqrt_n_ks": math.sqrt(n) * ks},
        ks <= ks_tolerance,
        {"ks": ks_tolerance},
        stream.seed,
    )
