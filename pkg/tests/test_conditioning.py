from fractions import Fraction
import math

from hypothesis import given, settings, strategies as st
import pytest

from stochlab import conditioning as C
from stochlab.distributions import GaussianVector
from stochlab.errors import SingularBlock, SingularCovariance, ZeroEvidence

DIE = C.FiniteProbSpace.uniform(range(1, 7))
PARITY = C.Partition(({2, 4, 6}, {1, 3, 5}))


@st.composite
def spaces(draw, max_size=12):
    n = draw(st.integers(1, max_size))
    raw = draw(st.lists(st.integers(0, 5), min_size=n, max_size=n))
    if sum(raw) == 0:
        raw[0] = 1
    total = sum(raw)
    return C.FiniteProbSpace(tuple(range(n)), tuple(Fraction(w, total) for w in raw))


@st.composite
def nested_partitions(draw, space):
    """(fine, coarse): fine labels each outcome, coarse merges fine labels."""
    n = len(space.outcomes)
    labels = draw(st.lists(st.integers(0, 4), min_size=n, max_size=n))
    merge = draw(st.lists(st.integers(0, 2), min_size=5, max_size=5))

    def build(key):
        groups = {}
        for o, lab in zip(space.outcomes, labels):
            groups.setdefault(key(lab), set()).add(o)
        return C.Partition(tuple(groups.values()))

    return build(lambda l: l), build(lambda l: merge[l])


def _rv(draw, space):
    vals = draw(st.lists(st.fractions(-10, 10, max_denominator=6),
                         min_size=len(space.outcomes), max_size=len(space.outcomes)))
    return dict(zip(space.outcomes, vals))


def test_atoms_examples():
    a = C.atoms(DIE, [{1, 3, 5}])
    assert set(a.blocks) == {frozenset({1, 3, 5}), frozenset({2, 4, 6})}
    assert C.atoms(DIE, []).blocks == (frozenset(range(1, 7)),)
    four = C.FiniteProbSpace.uniform(range(1, 5))
    assert set(C.atoms(four, [{1, 2}, {2, 3}]).blocks) == {frozenset({i}) for i in range(1, 5)}


def test_cond_expectation_examples():
    y = {w: Fraction(w) for w in DIE.outcomes}
    ce = C.cond_expectation(y, PARITY, DIE)
    assert all(ce[w] == (4 if w % 2 == 0 else 3) for w in DIE.outcomes)
    const = {w: Fraction(7, 2) for w in DIE.outcomes}
    assert C.cond_expectation(const, PARITY, DIE) == const
    assert C.cond_expectation(y, C.partition_of(DIE, y), DIE) == y


def test_projection_reports():
    y = {w: Fraction(w * w) for w in DIE.outcomes}
    for part in (PARITY, C.Partition.trivial(DIE), C.Partition.finest(DIE)):
        report = C.verify_projection(y, part, DIE)
        assert report.ok and report.mean_residual == 0
    trivial = C.cond_expectation(y, C.Partition.trivial(DIE), DIE)
    assert set(trivial.values()) == {DIE.expectation(y)}
    assert C.cond_expectation(y, C.Partition.finest(DIE), DIE) == y


def test_null_blocks_get_zero():
    space = C.FiniteProbSpace(("a", "b", "c"), (Fraction(1, 2), Fraction(1, 2), Fraction(0)))
    part = C.Partition(({"a", "b"}, {"c"}))
    ce = C.cond_expectation({"a": 1, "b": 3, "c": 100}, part, space)
    assert ce == {"a": 2, "b": 2, "c": 0}


@given(st.data())
@settings(max_examples=150)
def test_tower_linearity_jensen_positivity(data):
    space = data.draw(spaces())
    fine, coarse = data.draw(nested_partitions(space))
    assert coarse.is_coarser_than(fine)
    y, z = _rv(data.draw, space), _rv(data.draw, space)
    e = lambda v, g: C.cond_expectation(v, g, space)
    assert e(e(y, fine), coarse) == e(y, coarse)
    a, b = Fraction(3, 2), Fraction(-2, 7)
    lin = {o: a * y[o] + b * z[o] for o in space.outcomes}
    ey, ez, el = e(y, fine), e(z, fine), e(lin, fine)
    assert all(el[o] == a * ey[o] + b * ez[o] for o in space.outcomes)
    sq = e({o: y[o] ** 2 for o in space.outcomes}, fine)
    assert all(ey[o] ** 2 <= sq[o] for o in space.outcomes)
    pos = e({o: abs(y[o]) for o in space.outcomes}, fine)
    assert all(v >= 0 for v in pos.values())


def test_bayes_examples():
    assert C.bayes([Fraction(1, 2)] * 2, [1, 0]) == [1, 0]
    assert C.bayes([Fraction(1, 2)] * 2, [Fraction(1, 3), Fraction(2, 3)]) == [Fraction(1, 3), Fraction(2, 3)]
    prior = [Fraction(1, 4), Fraction(3, 4)]
    assert C.bayes(prior, [1, 1]) == prior
    with pytest.raises(ZeroEvidence):
        C.bayes(prior, [0, 0])


def test_bayes_against_explicit_space():
    # urn n chosen w.p. prior[n]; A = "draw a red ball", red fraction = likelihood[n]
    prior = [Fraction(1, 6), Fraction(1, 3), Fraction(1, 2)]
    reds = [(1, 4), (2, 3), (0, 5)]
    outcomes, weights = [], []
    for n, (r, tot) in enumerate(reds):
        for ball in range(tot):
            outcomes.append((n, ball, ball < r))
            weights.append(prior[n] / tot)
    space = C.FiniteProbSpace(tuple(outcomes), tuple(weights))
    a = {o for o in outcomes if o[2]}
    direct = [space.probability({o for o in a if o[0] == n}) / space.probability(a) for n in range(3)]
    assert C.bayes(prior, [Fraction(r, t) for r, t in reds]) == direct


def test_poisson_thinning_examples():
    e_s, e_x = C.poisson_thinning(2, Fraction(1, 2))
    assert e_x(5) == 6
    e_s, e_x = C.poisson_thinning(3, 1)
    assert e_s(4) == 4 and e_x(4) == 4


def test_poisson_thinning_against_truncated_joint():
    lam, p = 1.0, 1 / 3
    top = 40
    px = [math.exp(-lam) * lam**k / math.factorial(k) for k in range(top + 1)]
    joint = {(x, s): px[x] * math.comb(x, s) * p**s * (1 - p) ** (x - s)
             for x in range(top + 1) for s in range(x + 1)}
    e_s, e_x = C.poisson_thinning(1, Fraction(1, 3))
    for s in range(8):
        num = sum(x * w for (x, t), w in joint.items() if t == s)
        den = sum(w for (x, t), w in joint.items() if t == s)
        assert abs(num / den - float(e_x(s))) < 1e-8
    for x in range(12):
        mean = sum(s * joint[(x, s)] for s in range(x + 1)) / px[x]
        assert abs(mean - float(e_s(x))) < 1e-8


def test_best_affine_predictor_examples():
    z = C.best_affine_predictor([1], [[2]], 0, [0])
    assert z.coefficients == (Fraction(1, 2),) and z.intercept == 0
    z = C.best_affine_predictor([0, 0], [[1, 0], [0, 1]], 5, [1, 2])
    assert z.coefficients == (0, 0) and z.intercept == 5
    z = C.best_affine_predictor([1, 2], [[1, 0], [0, 4]], 0, [0, 0])
    assert z.coefficients == (1, Fraction(1, 2)) and not z.non_unique


def test_best_affine_predictor_singular():
    # Y_2 = 2 Y_1: consistent, minimum-norm answer
    z = C.best_affine_predictor([1, 2], [[1, 2], [2, 4]], 0, [0, 0])
    assert z.non_unique and z.coefficients == (Fraction(1, 5), Fraction(2, 5))
    with pytest.raises(SingularCovariance):
        C.best_affine_predictor([1, 0], [[1, 2], [2, 4]], 0, [0, 0])


def test_best_affine_predictor_minimizes_mean_square():
    # small explicit joint law of (X, Y1, Y2)
    pts = [((1, 0, 1), Fraction(1, 4)), ((2, 1, 0), Fraction(1, 4)),
           ((0, 1, 1), Fraction(1, 3)), ((3, 2, 1), Fraction(1, 6))]
    mean = [sum(w * p[i] for p, w in pts) for i in range(3)]
    cov = [[sum(w * (p[i] - mean[i]) * (p[j] - mean[j]) for p, w in pts) for j in range(3)] for i in range(3)]
    z = C.best_affine_predictor(cov[0][1:], [row[1:] for row in cov[1:]], mean[0], mean[1:])

    def mse(c0, c1, c2):
        return sum(w * (p[0] - c0 - c1 * p[1] - c2 * p[2]) ** 2 for p, w in pts)

    best = mse(z.intercept, *z.coefficients)
    eps = Fraction(1, 100)
    for d in ((eps, 0, 0), (0, eps, 0), (0, 0, eps), (-eps, eps, -eps)):
        assert best < mse(z.intercept + d[0], z.coefficients[0] + d[1], z.coefficients[1] + d[2])


def test_gaussian_condition_examples():
    rho = Fraction(1, 2)
    g = C.gaussian_condition([[1, rho], [rho, 1]], 0, [1])
    assert g.coefficients == (rho,) and g.residual_variance == Fraction(3, 4)
    g = C.gaussian_condition(GaussianVector((0, 0), ((1, 0), (0, 1))), 0, [1])
    assert g.coefficients == (0,) and g.residual_variance == 1
    third = Fraction(1, 3)
    q = [[1, third, 0], [third, 1, 0], [0, 0, 1]]
    assert C.gaussian_condition(q, 0, [1, 2]).coefficients == (third, 0)
    with pytest.raises(SingularBlock):
        C.gaussian_condition([[1, 1, 1], [1, 1, 1], [1, 1, 1]], 0, [1, 2])
    with pytest.raises(ValueError):
        C.gaussian_condition(GaussianVector((1, 0), ((1, 0), (0, 1))), 0, [1])


@given(st.fractions(Fraction(1, 10), 5), st.fractions(-3, 3), st.fractions(Fraction(1, 10), 5))
def test_gaussian_condition_matches_affine_predictor(vy, cxy, vx):
    if cxy**2 > vx * vy:
        cxy = 0
    g = C.gaussian_condition([[vx, cxy], [cxy, vy]], 0, [1])
    z = C.best_affine_predictor([cxy], [[vy]], 0, [0])
    assert g.coefficients == z.coefficients


def test_space_validation_and_json():
    with pytest.raises(ValueError):
        C.FiniteProbSpace((1, 2), (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        C.Partition(({1, 2}, {2, 3}))
    with pytest.raises(ValueError):
        PARITY.validate(C.FiniteProbSpace.uniform(range(1, 8)))
    assert C.FiniteProbSpace.from_json(DIE.to_json()) == DIE
    assert C.Partition.from_indices(DIE, PARITY.to_indices(DIE)) == PARITY
