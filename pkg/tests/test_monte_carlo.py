from fractions import Fraction
import math

import numpy as np
import pytest
from scipy import stats

from stochlab import distributions as D
from stochlab import monte_carlo as MC
from stochlab.errors import DegenerateVariance, UnsupportedDescriptor

N = 10**5
DKW_95 = 1.36 / math.sqrt(N)
# two-sided DKW band at confidence 99%: sqrt(ln(2 / 0.01) / (2 n))
DKW_99 = math.sqrt(math.log(200) / (2 * N))
DKW_SEEDS = range(20)

LAWS = [
    D.Bernoulli(Fraction(1, 3)),
    D.Binomial(7, Fraction(2, 5)),
    D.Geometric(Fraction(1, 2)),
    D.Geometric.first_success(Fraction(9, 10)),
    D.Poisson(3),
    D.rademacher(),
    D.DiscreteUniform((1, 2, 5)),
    D.Zeta(3),
    D.Zeta(Fraction(3, 2)),
    D.ContinuousUniform(0, 1),
    D.Exponential(2),
    D.Gaussian(1, 4),
]


def _label(d):
    params = []
    for k, v in sorted(d.to_json().items()):
        if k != "tag":
            params.extend(map(str, v) if isinstance(v, list) else [str(v)])
    return "-".join([d.tag, *params]).replace("/", "_").replace(" ", "")


class TinyUniforms:
    """Stream stub whose uniforms are all ~0, so every exponential is ~0."""

    seed = -1

    def random(self, count):
        return np.full(count, 1e-12)


def test_stream_reproducible_and_split():
    a = MC.SeededStream(9)
    assert np.array_equal(a.random(50), MC.SeededStream(9).random(50))
    assert not np.array_equal(a.random(50), MC.SeededStream(9, 1).random(50))
    assert not np.array_equal(a.split(0).random(50), a.split(1).random(50))
    assert np.array_equal(a.split(3).split(1).random(5), MC.SeededStream(9, 0, (3, 1)).random(5))
    # a prefix of a longer draw is the shorter draw
    assert np.array_equal(a.random(10), a.random(100)[:10])


def test_sample_examples():
    assert MC.sample(D.Bernoulli(Fraction(1, 2)), MC.SeededStream(0), 0).size == 0
    with pytest.raises(ValueError):
        MC.sample(D.Bernoulli(Fraction(1, 2)), MC.SeededStream(0), -1)
    m = MC.sample(D.Bernoulli(Fraction(1, 2)), MC.SeededStream(2024), N).mean()
    assert 0.495 <= m <= 0.505
    v = MC.sample(D.Gaussian(0, 1), MC.SeededStream(2024), N).var(ddof=1)
    assert 0.98 <= v <= 1.02


@pytest.mark.parametrize("d", LAWS, ids=_label)
def test_sampler_reproducible(d):
    x = MC.sample(d, MC.SeededStream(5, 2), 1000)
    assert np.array_equal(x, MC.sample(d, MC.SeededStream(5, 2), 1000))


@pytest.mark.parametrize("d", LAWS, ids=_label)
def test_sampler_dkw_band_99_percent_of_seeds(d):
    passes = sum(
        MC.ecdf_sup_distance(MC.sample(d, MC.SeededStream(s, 7), N), d) <= DKW_95 for s in DKW_SEEDS
    )
    assert passes >= math.ceil(0.99 * len(DKW_SEEDS))


@pytest.mark.parametrize("d", LAWS, ids=_label)
def test_sampler_within_99_percent_dkw_band(d):
    for s in DKW_SEEDS:
        assert MC.ecdf_sup_distance(MC.sample(d, MC.SeededStream(s, 7), N), d) <= DKW_99


def test_gaussian_path_is_sqrt_exponential_cosine():
    u = MC.SeededStream(11).random(2 * N)
    e, v = -np.log1p(-u[:N]), u[N:]
    half = np.sqrt(e) * np.cos(2 * np.pi * v)
    # N(0, 1/2) before scaling
    assert stats.kstest(half, stats.norm(scale=math.sqrt(0.5)).cdf).statistic <= DKW_95
    z = math.sqrt(2) * half
    assert np.allclose(MC.sample(D.Gaussian(0, 1), MC.SeededStream(11), N), z, rtol=0, atol=1e-15)
    for s in DKW_SEEDS:
        u = MC.SeededStream(s, 3).random(2 * N)
        z = math.sqrt(2) * np.sqrt(-np.log1p(-u[:N])) * np.cos(2 * np.pi * u[N:])
        assert MC.ecdf_sup_distance(z, D.Gaussian(0, 1)) <= DKW_99


def test_zeta_tail_draws_respect_quantile():
    d = D.Zeta(Fraction(3, 2))
    z = d.normalizer
    u = np.array([1e-3, 3e-4, 1e-6])
    for uu, k in zip(u, MC._zeta_tail_quantile(d, u)):
        assert D.zeta_tail(1.5, int(k) + 1) / z <= uu < D.zeta_tail(1.5, int(k)) / z


def _ks_bruteforce(x, cdf):
    x = sorted(x)
    n = len(x)
    best = 0.0
    for i, t in enumerate(x, start=1):
        f = cdf(t)
        best = max(best, i / n - f, f - (i - 1) / n)
    return best


def test_ks_statistic_against_oracles():
    z = MC.sample(D.Gaussian(0, 1), MC.SeededStream(1), 3000)
    ks = MC.ks_statistic(z, MC.normal_cdf)
    phi = lambda t: 0.5 * (1 + math.erf(t / math.sqrt(2)))
    assert abs(ks - _ks_bruteforce(z, phi)) < 1e-12
    assert abs(ks - stats.kstest(z, "norm").statistic) < 1e-12
    with pytest.raises(ValueError):
        MC.ks_statistic([], MC.normal_cdf)


def _ecdf_bruteforce(x, d):
    n = len(x)
    best = 0.0
    for t in set(x):
        right = sum(v <= t for v in x) / n
        left = sum(v < t for v in x) / n
        f = float(d.cdf(t))
        best = max(best, abs(right - f), abs(left - (f - float(D.jump(d, t)))))
    return best


@pytest.mark.parametrize("d", [D.Poisson(3), D.Binomial(7, Fraction(2, 5)), D.Exponential(2)], ids=_label)
def test_ecdf_sup_distance_against_bruteforce(d):
    x = MC.sample(d, MC.SeededStream(4), 400)
    assert abs(MC.ecdf_sup_distance(x, d) - _ecdf_bruteforce(list(x), d)) < 1e-12


def test_ecdf_single_point():
    assert MC.ecdf_sup_distance([0.3], D.ContinuousUniform(0, 1)) >= 0.5
    assert MC.ecdf_sup_distance([1.0], D.Bernoulli(Fraction(1, 2))) == 0.5


def test_lln_examples():
    const = MC.lln_experiment(D.DiscreteUniform((3,)), 2000, MC.SeededStream(0))
    assert all(v == 0 for v in const.statistics["deviation"].values())
    rep = MC.lln_experiment(D.Bernoulli(Fraction(1, 2)), N, MC.SeededStream(1))
    assert rep.passed and rep.statistics["final_deviation"] <= 0.0063
    assert sorted(rep.statistics["deviation"]) == [100, 1000, 10_000, N]
    rep = MC.lln_experiment(D.Exponential(1), N, MC.SeededStream(1))
    assert rep.passed and rep.statistics["final_deviation"] <= 0.0127
    again = MC.lln_experiment(D.Exponential(1), N, MC.SeededStream(1))
    assert again.to_json() == rep.to_json()


def test_lln_undefined_mean():
    from stochlab.errors import MomentUndefined
    with pytest.raises(MomentUndefined):
        MC.lln_experiment(D.Zeta(2), 100, MC.SeededStream(0))


def test_clt_gaussian_increments():
    for n in (1, 5, 40):
        rep = MC.clt_experiment(D.Gaussian(0, 1), n, 20_000, MC.SeededStream(42))
        assert rep.statistics["ks"] <= 1.4 / math.sqrt(20_000)


def test_clt_degenerate_and_reproducible():
    with pytest.raises(DegenerateVariance):
        MC.clt_experiment(D.DiscreteUniform((2,)), 10, 10, MC.SeededStream(0))
    a = MC.clt_experiment(D.rademacher(), 64, 500, MC.SeededStream(3))
    assert a.to_json() == MC.clt_experiment(D.rademacher(), 64, 500, MC.SeededStream(3)).to_json()


def test_replicas_use_their_own_substreams():
    # replica r depends on its index only, so a shorter run is a prefix
    s = MC.SeededStream(8)
    long = MC.normalized_sums(D.Exponential(1), 30, 200, s)
    short = MC.normalized_sums(D.Exponential(1), 30, 50, s)
    assert np.array_equal(long[:50], short)


@pytest.mark.parametrize("d", [D.ContinuousUniform(0, 1), D.Poisson(3)], ids=_label)
def test_glivenko_cantelli_examples(d):
    rep = MC.glivenko_cantelli(d, 10**4, MC.SeededStream(7))
    assert rep.passed and rep.statistics["sup_distance"] <= 0.02
    one = MC.glivenko_cantelli(D.ContinuousUniform(0, 1), 1, MC.SeededStream(7))
    assert one.statistics["sup_distance"] >= 0.5


def test_borel_cantelli_examples():
    rep = MC.borel_cantelli_demo(10**4, MC.SeededStream(5))
    counts = rep.statistics["exceed_log_count"]
    assert counts[100] <= counts[1000] <= counts[10_000]
    assert counts[10_000] > counts[100]
    stub = MC.borel_cantelli_demo(1000, TinyUniforms())
    assert not stub.passed
    with pytest.raises(ValueError):
        MC.borel_cantelli_demo(99, MC.SeededStream(0))


def test_borel_cantelli_expected_exceedances():
    # mean count of n <= N with X_n > log n is sum_{2 <= n <= N} 1/n
    reps = [MC.borel_cantelli_demo(10**4, MC.SeededStream(s)).statistics["exceed_log_count"][10_000]
            for s in range(40)]
    expected = sum(1 / n for n in range(2, 10**4))
    assert abs(np.mean(reps) - expected) < 4 * math.sqrt(expected / 40)


def test_random_signs_examples():
    st = MC.SeededStream(17)
    rep = MC.random_signs_verdict({"kind": "power", "alpha": 1}, 10**5, st)
    assert rep.statistics["verdict"] == "converges" and rep.statistics["max_spread"] <= 0.05
    assert rep.to_json()["parameters"]["descriptor"]["kind"] == "power"
    flat = MC.random_signs_verdict({"kind": "power", "alpha": 0}, 1000, st)
    assert flat.statistics["verdict"] == "diverges"
    root = MC.random_signs_verdict({"kind": "power", "alpha": 0.5}, 10**5, st)
    assert root.statistics["verdict"] == "diverges"
    assert abs(root.statistics["spread_tail_variance"] - math.log(2)) < 1e-4
    # the max of 20 |N(0, ln 2)| draws is well above the convergent spread
    assert root.statistics["max_spread"] > 0.3
    assert MC.random_signs_verdict({"kind": "geometric", "r": 0.5}, 100, st).statistics["verdict"] == "converges"
    assert MC.random_signs_verdict(MC.GeometricSequence(1.0), 100, st).statistics["verdict"] == "diverges"
    assert MC.random_signs_verdict({"kind": "harmonic_log", "beta": 2}, 100, st).statistics["verdict"] == "converges"
    assert MC.random_signs_verdict({"kind": "harmonic_log", "beta": 1}, 100, st).statistics["verdict"] == "diverges"
    with pytest.raises(UnsupportedDescriptor):
        MC.random_signs_verdict({"kind": "fibonacci"}, 100, st)


def test_three_series_examples():
    assert MC.three_series_check({"kind": "rademacher_scale", "alpha": 1}, 1).converges
    v = MC.three_series_check({"kind": "rademacher_scale", "alpha": 0}, 0.5)
    assert not v.tail_series and not v.converges
    v = MC.three_series_check({"kind": "rademacher_scale", "alpha": 0.5}, 1)
    assert v.tail_series and v.mean_series and not v.variance_series
    assert MC.three_series_check(MC.ExponentialScale(2), 1).converges
    assert not MC.three_series_check(MC.ExponentialScale(0.75), 1).converges
    with pytest.raises(UnsupportedDescriptor):
        MC.three_series_check({"kind": "cauchy_scale", "alpha": 1}, 1)
    with pytest.raises(ValueError):
        MC.three_series_check(MC.RademacherScale(1), 0)


def test_martingale_clt_identity_rule_is_the_iid_clt():
    st = MC.SeededStream(42)
    mart = MC.martingale_clt_experiment(64, 2000, st, rule="identity")
    iid = MC.clt_experiment(D.rademacher(), 64, 2000, st)
    assert mart.statistics == iid.statistics


def test_martingale_clt_sign_rule_preserves_conditional_moments():
    # g in {+1, -1} is predictable, so increments stay iid signs
    z = MC.martingale_increment_sums(64, 4000, MC.SeededStream(6), "sign") * 8
    assert np.all(np.abs(z) <= 64) and np.all((z.astype(int) % 2) == 0)
    with pytest.raises(ValueError):
        MC.martingale_increment_sums(64, 10, MC.SeededStream(6), "cube")
    with pytest.raises(ValueError):
        MC.martingale_clt_experiment(32, 10, MC.SeededStream(6))


def test_martingale_clt_scaling():
    st = MC.SeededStream(42)
    small = MC.martingale_clt_experiment(64, 20_000, st).statistics["ks"]
    big = MC.martingale_clt_experiment(1024, 20_000, st).statistics["ks"]
    assert big < small


def test_martingale_clt_ks_at_1024():
    rep = MC.martingale_clt_experiment(1024, 20_000, MC.SeededStream(42))
    assert rep.statistics["ks"] <= 0.02
