from fractions import Fraction
import math

from hypothesis import given, settings, strategies as st
import mpmath
import numpy as np
import pytest

from stochlab import distributions as D
from stochlab.errors import BadRate, DimensionMismatch, MomentUndefined, NoClosedForm, Unsupported

LAWS = [
    D.Bernoulli(Fraction(1, 3)),
    D.Binomial(7, Fraction(2, 5)),
    D.Geometric(Fraction(1, 2)),
    D.Geometric.first_success(Fraction(1, 3)),
    D.Poisson(Fraction(3, 2)),
    D.DiscreteUniform((-1, 0, 2, 5)),
    D.rademacher(),
    D.ContinuousUniform(-1, 3),
    D.Exponential(2),
    D.Gaussian(1, 4),
]
CF_LAWS = LAWS + [D.Zeta(4)]
GRID = np.linspace(-20, 20, 161)


def _support_sum(d, top=400):
    return math.fsum(float(d.pmf(k)) for k in range(-10, top))


def test_mass_examples():
    assert abs(D.Poisson(1).pmf(0) - 0.367879) < 1e-6
    p = Fraction(2, 7)
    assert D.Binomial(5, p).pmf(5) == p**5
    assert D.Geometric(Fraction(1, 2)).pmf(2) == Fraction(1, 8)
    assert D.mass_or_density(D.Exponential(1), 0) == 1


def test_mean_examples():
    assert D.Binomial(10, Fraction(1, 2)).mean() == 5
    assert D.Exponential(2).mean() == Fraction(1, 2)
    g = D.Geometric(Fraction(1, 2))
    assert g.mean() == 1
    assert abs(math.fsum(k * float(g.pmf(k)) for k in range(200)) - 1) < 1e-12


def test_variance_examples():
    p = Fraction(1, 3)
    assert D.Bernoulli(p).variance() == p * (1 - p)
    assert D.Gaussian(3, Fraction(5, 2)).variance() == Fraction(5, 2)
    assert D.DiscreteUniform((7,)).variance() == 0


def test_cdf_and_jump_examples():
    e = D.Exponential(1)
    assert D.jump(e, 0.7) == 0
    assert D.jump(D.Bernoulli(Fraction(1, 3)), 1) == Fraction(1, 3)
    assert abs(e.cdf(math.log(2)) - 0.5) < 1e-12


def test_cf_examples():
    for d in CF_LAWS[:-1]:
        assert abs(d.char_fn(0.0) - 1) < 1e-12
    assert abs(D.Gaussian(0, 1).char_fn(1.0) - math.exp(-0.5)) < 1e-12
    assert abs(D.Poisson(1).char_fn(math.pi) - math.exp(-2)) < 1e-12
    with pytest.raises(Unsupported):
        D.Zeta(4).char_fn(1.0)


@pytest.mark.parametrize("d", [l for l in LAWS if l.discrete], ids=lambda d: d.tag)
def test_pmf_sums_to_one(d):
    assert abs(_support_sum(d) - 1) < 1e-12


def test_finite_support_sums_exactly():
    assert sum(D.Binomial(9, Fraction(1, 7)).pmf(k) for k in range(10)) == 1
    assert sum(D.Bernoulli(Fraction(4, 9)).pmf(k) for k in (0, 1)) == 1
    assert sum(D.DiscreteUniform((1, 4, 9)).pmf(k) for k in (1, 4, 9)) == 1


@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.tag)
def test_cdf_monotone_with_limits(d):
    ts = np.linspace(-50, 50, 2001)
    vals = [float(d.cdf(float(t))) for t in ts]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    assert float(d.cdf(-1e6)) < 1e-6
    assert float(d.cdf(1e6)) > 1 - 1e-6


@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.tag)
def test_cf_hermitian_and_bounded(d):
    for xi in GRID:
        phi = d.char_fn(float(xi))
        assert abs(phi) <= 1 + 1e-12
        assert abs(d.char_fn(-float(xi)) - phi.conjugate()) < 1e-12


@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.tag)
def test_cf_moments_by_differentiation(d):
    # fourth-order central stencils
    h = 1e-2
    f = [d.char_fn(k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h**2)
    mean = float(d.mean())
    second = float(d.variance()) + mean**2
    assert abs(d1 - 1j * mean) < 1e-6
    assert abs(d2 + second) < 1e-6


def test_exponential_memoryless():
    e = D.Exponential(Fraction(3, 2))
    for a in (0.1, 0.5, 2.0):
        for b in (0.3, 1.0, 4.0):
            assert abs(e.survival(a + b) - e.survival(a) * e.survival(b)) < 1e-12


def test_zeta_against_mpmath():
    for s in (1.5, 2, 3.25, 5):
        assert abs(D.riemann_zeta(s) - float(mpmath.zeta(s))) < 1e-12
    z = D.Zeta(4)
    assert abs(z.mean() - float(mpmath.zeta(3) / mpmath.zeta(4))) < 1e-12
    assert abs(z.cdf(5000) - float(1 - mpmath.zeta(4, 5001) / mpmath.zeta(4))) < 1e-12
    with pytest.raises(MomentUndefined):
        D.Zeta(2).mean()
    with pytest.raises(MomentUndefined):
        D.Zeta(3).variance()


def test_geometric_conventions():
    g0 = D.Geometric(Fraction(1, 3))
    g1 = D.Geometric.first_success(Fraction(1, 3))
    for k in range(6):
        assert g1.pmf(k + 1) == g0.pmf(k)
    assert g1.mean() == g0.mean() + 1
    assert g1.variance() == g0.variance()
    with pytest.raises(ValueError):
        D.Geometric(1)


def test_convolve_examples():
    assert D.convolve(D.Poisson(1), D.Poisson(2)) == D.Poisson(3)
    assert D.convolve(D.Gaussian(0, 1), D.Gaussian(1, 3)) == D.Gaussian(1, 4)
    with pytest.raises(NoClosedForm):
        D.convolve(D.Poisson(1), D.Exponential(1))


def test_bernoulli_binomial_convolution_by_pmf():
    for n in range(1, 7):
        for p in (Fraction(1, 3), Fraction(3, 4)):
            b, x = D.Bernoulli(p), D.Binomial(n, p)
            s = D.convolve(b, x)
            assert s == D.Binomial(n + 1, p)
            for k in range(n + 2):
                direct = b.pmf(0) * x.pmf(k) + b.pmf(1) * x.pmf(k - 1)
                assert s.pmf(k) == direct


@given(st.fractions(Fraction(1, 10), 5), st.fractions(Fraction(1, 10), 5))
@settings(max_examples=50)
def test_convolution_cf_product(l1, l2):
    p1, p2 = D.Poisson(l1), D.Poisson(l2)
    g1, g2 = D.Gaussian(l1, l2), D.Gaussian(-l2, l1)
    for d1, d2 in ((p1, p2), (g1, g2)):
        s = D.convolve(d1, d2)
        for xi in GRID[::8]:
            assert abs(s.char_fn(float(xi)) - d1.char_fn(float(xi)) * d2.char_fn(float(xi))) < 1e-12


def test_poisson_approx_error():
    assert D.poisson_approx_error(10, 1) > D.poisson_approx_error(100, 1)
    direct = max(abs(float(q) - D.Poisson(1).pmf(k)) for k, q in enumerate((0, 1)))
    assert D.poisson_approx_error(1, 1) == direct
    # lambda = n forces p = 1: point mass at n
    assert abs(D.poisson_approx_error(3, 3) - max(
        abs(float(k == 3) - D.Poisson(3).pmf(k)) for k in range(4))) < 1e-15
    with pytest.raises(BadRate):
        D.poisson_approx_error(2, 3)


def test_tail_bounds_examples():
    tb = D.tail_bounds(D.Exponential(1), 2)
    assert abs(tb.exact_tail - math.exp(-2)) < 1e-12 and tb.markov == Fraction(1, 2)
    d = D.Poisson(4)
    assert D.tail_bounds(d, 3).markov >= 1
    tb = D.tail_bounds(D.Bernoulli(Fraction(1, 2)), Fraction(2, 5))
    assert tb.chebyshev == Fraction(25, 16) and tb.exact_deviation_tail == 1
    assert D.tail_bounds(D.Gaussian(0, 1), 1).markov is None


def test_gaussian_vector_cf():
    v = D.GaussianVector((0, 0), ((1, 0), (0, 1)))
    assert D.gaussian_vector_cf(v, (0.0, 0.0)) == 1
    assert abs(D.gaussian_vector_cf(v, (1.0, 0.0)) - math.exp(-0.5)) < 1e-12
    w = D.GaussianVector((1, -2, Fraction(1, 2)), ((2, 0, 0), (0, 3, 0), (0, 0, Fraction(1, 4))))
    u = (0.3, -1.1, 2.0)
    prod = 1
    for i, ui in enumerate(u):
        prod *= w.marginal(i).char_fn(ui)
    assert abs(D.gaussian_vector_cf(w, u) - prod) < 1e-12
    with pytest.raises(DimensionMismatch):
        D.gaussian_vector_cf(v, (1.0,))
    with pytest.raises(ValueError):
        D.GaussianVector((0, 0), ((1, 2), (2, 1)))


@pytest.mark.parametrize("d", LAWS + [D.Zeta(Fraction(5, 2))], ids=lambda d: d.tag)
def test_json_roundtrip(d):
    assert D.from_json(d.to_json()) == d


def test_json_aliases():
    assert D.from_json({"tag": "poisson", "lambda": "3/2"}) == D.Poisson(Fraction(3, 2))
    assert D.from_json({"tag": "gaussian", "m": "0", "sigma2": "2"}) == D.Gaussian(0, 2)
    assert D.from_json({"tag": "rademacher"}) == D.rademacher()
    with pytest.raises(ValueError):
        D.from_json({"tag": "cauchy"})
    with pytest.raises(ValueError):
        D.from_json({"lambda": 1})


def test_parameter_validation():
    for bad in (lambda: D.Bernoulli(Fraction(3, 2)), lambda: D.Poisson(0),
                lambda: D.ContinuousUniform(2, 1), lambda: D.Exponential(-1),
                lambda: D.Gaussian(0, -1), lambda: D.Zeta(1), lambda: D.DiscreteUniform(())):
        with pytest.raises(ValueError):
            bad()
