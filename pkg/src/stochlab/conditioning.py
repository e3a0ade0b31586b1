"""Conditional expectation on finite probability spaces.

Every finite sigma-algebra is generated by its atoms, so conditioning on a
sigma-algebra reduces to averaging over the blocks of a partition. All
values are exact Fractions. Blocks of probability zero receive the value 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

from . import linalg
from .distributions import GaussianVector
from .errors import SingularBlock, SingularCovariance, ZeroEvidence
from .exact_core import to_fraction

RandomVariable = Mapping[Hashable, Fraction]


@dataclass(frozen=True)
class FiniteProbSpace:
    outcomes: tuple
    weights: tuple

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        weights = tuple(to_fraction(w) for w in self.weights)
        if len(outcomes) != len(weights):
            raise ValueError("one weight per outcome")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("outcomes must be distinct")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        if sum(weights) != 1:
            raise ValueError(f"weights sum to {sum(weights)}, not 1")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, outcomes: Iterable) -> "FiniteProbSpace":
        outcomes = tuple(outcomes)
        return cls(outcomes, (Fraction(1, len(outcomes)),) * len(outcomes))

    @property
    def prob(self) -> dict:
        return dict(zip(self.outcomes, self.weights))

    def probability(self, event: Iterable) -> Fraction:
        p = self.prob
        return sum((p[w] for w in set(event)), Fraction(0))

    def expectation(self, y: RandomVariable) -> Fraction:
        return sum((w * to_fraction(y[o]) for o, w in zip(self.outcomes, self.weights)), Fraction(0))

    def to_json(self) -> dict:
        from .exact_core import format_rational
        return {"outcomes": list(self.outcomes), "weights": [format_rational(w) for w in self.weights]}

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteProbSpace":
        return cls(tuple(doc["outcomes"]), tuple(doc["weights"]))


@dataclass(frozen=True)
class Partition:
    blocks: tuple[frozenset, ...]

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        if any(not b for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        seen: set = set()
        for b in blocks:
            if seen & b:
                raise ValueError("partition blocks overlap")
            seen |= b
        object.__setattr__(self, "blocks", blocks)

    def validate(self, space: FiniteProbSpace) -> None:
        covered = frozenset().union(*self.blocks)
        if covered != frozenset(space.outcomes):
            raise ValueError("partition does not cover the outcome space")

    def block_of(self, outcome) -> frozenset:
        for b in self.blocks:
            if outcome in b:
                return b
        raise KeyError(outcome)

    def is_coarser_than(self, other: "Partition") -> bool:
        """True when every block of ``other`` sits inside a block of self."""
        return all(any(b <= c for c in self.blocks) for b in other.blocks)

    @classmethod
    def trivial(cls, space: FiniteProbSpace) -> "Partition":
        return cls((frozenset(space.outcomes),))

    @classmethod
    def finest(cls, space: FiniteProbSpace) -> "Partition":
        return cls(tuple(frozenset([o]) for o in space.outcomes))

    def to_indices(self, space: FiniteProbSpace) -> list[list[int]]:
        pos = {o: i for i, o in enumerate(space.outcomes)}
        return [sorted(pos[o] for o in b) for b in self.blocks]

    @classmethod
    def from_indices(cls, space: FiniteProbSpace, blocks: Sequence[Sequence[int]]) -> "Partition":
        part = cls(tuple(frozenset(space.outcomes[i] for i in b) for b in blocks))
        part.validate(space)
        return part


def atoms(space: FiniteProbSpace, generators: Sequence[Iterable]) -> Partition:
    """Atoms of the sigma-algebra generated by ``generators``.

    Outcomes are grouped by their membership pattern across the generators;
    blocks are ordered by first appearance in ``space.outcomes``.
    """
    gens = [frozenset(g) for g in generators]
    universe = set(space.outcomes)
    for g in gens:
        if not g <= universe:
            raise ValueError("generator contains unknown outcomes")
    groups: dict[tuple, list] = {}
    for o in space.outcomes:
        groups.setdefault(tuple(o in g for g in gens), []).append(o)
    return Partition(tuple(frozenset(v) for v in groups.values()))


def partition_of(space: FiniteProbSpace, x: RandomVariable) -> Partition:
    """Atoms of sigma(X): level sets of X."""
    groups: dict = {}
    for o in space.outcomes:
        groups.setdefault(x[o], []).append(o)
    return Partition(tuple(frozenset(v) for v in groups.values()))


def cond_expectation(y: RandomVariable, part: Partition, space: FiniteProbSpace) -> dict:
    """E[Y | sigma(part)] as an outcome -> Fraction map."""
    part.validate(space)
    prob = space.prob
    out = {}
    for block in part.blocks:
        mass = sum((prob[o] for o in block), Fraction(0))
        if mass == 0:
            value = Fraction(0)
        else:
            value = sum((prob[o] * to_fraction(y[o]) for o in block), Fraction(0)) / mass
        for o in block:
            out[o] = value
    return {o: out[o] for o in space.outcomes}


@dataclass(frozen=True)
class ProjectionReport:
    block_residuals: tuple[Fraction, ...]
    mean_residual: Fraction

    @property
    def ok(self) -> bool:
        return self.mean_residual == 0 and all(r == 0 for r in self.block_residuals)


def verify_projection(y: RandomVariable, part: Partition, space: FiniteProbSpace) -> ProjectionReport:
    """Residuals E[Y 1_A] - E[Yhat 1_A] per block A, and E[Y] - E[Yhat]."""
    yhat = cond_expectation(y, part, space)
    prob = space.prob
    residuals = []
    for block in part.blocks:
        lhs = sum((prob[o] * to_fraction(y[o]) for o in block), Fraction(0))
        rhs = sum((prob[o] * yhat[o] for o in block), Fraction(0))
        residuals.append(lhs - rhs)
    report = ProjectionReport(tuple(residuals), space.expectation(y) - space.expectation(yhat))
    if not report.ok:
        raise AssertionError("conditional expectation failed the projection identity")
    return report


def bayes(prior: Sequence, likelihood: Sequence) -> list[Fraction]:
    """Posterior P[E_n | A] from priors P[E_n] and likelihoods P[A | E_n]."""
    prior = [to_fraction(x) for x in prior]
    likelihood = [to_fraction(x) for x in likelihood]
    if len(prior) != len(likelihood):
        raise ValueError("prior and likelihood lengths differ")
    if sum(prior) != 1 or any(x < 0 for x in prior):
        raise ValueError("prior must be a probability vector")
    if any(not 0 <= x <= 1 for x in likelihood):
        raise ValueError("likelihoods must lie in [0, 1]")
    joint = [p * l for p, l in zip(prior, likelihood)]
    evidence = sum(joint, Fraction(0))
    if evidence == 0:
        raise ZeroEvidence("the observed event has probability zero")
    return [j / evidence for j in joint]


class Affine(NamedTuple):
    """The map x -> slope * x + intercept."""

    slope: Fraction
    intercept: Fraction

    def __call__(self, x):
        return self.slope * x + self.intercept


def poisson_thinning(lam, p) -> tuple[Affine, Affine]:
    """X ~ Poisson(lam), S | X ~ Binomial(X, p).

    Returns (E[S | X], E[X | S]) as affine maps: pX and S + lam (1 - p).
    """
    lam, p = to_fraction(lam), to_fraction(p)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return Affine(p, Fraction(0)), Affine(Fraction(1), lam * (1 - p))


@dataclass(frozen=True)
class AffinePredictor:
    intercept: Fraction
    coefficients: tuple
    non_unique: bool = False

    def predict(self, y: Sequence):
        return self.intercept + sum(a * v for a, v in zip(self.coefficients, y))


def best_affine_predictor(cov_xy: Sequence, cov_y: Sequence[Sequence], mean_x, mean_y: Sequence) -> AffinePredictor:
    """Least-squares affine predictor of X from Y_1..Y_n.

    Solves K_Y alpha = Cov(X, Y). A singular K_Y with a consistent system
    yields the minimum-norm alpha flagged ``non_unique``.
    """
    cov_xy = [to_fraction(x) for x in cov_xy]
    k = [[to_fraction(x) for x in row] for row in cov_y]
    mean_y = [to_fraction(x) for x in mean_y]
    mean_x = to_fraction(mean_x)
    n = len(cov_xy)
    if len(k) != n or any(len(row) != n for row in k) or len(mean_y) != n:
        raise ValueError("dimension mismatch between covariances and means")
    if any(k[i][j] != k[j][i] for i in range(n) for j in range(i)):
        raise ValueError("covariance of Y must be symmetric")
    try:
        alpha, unique = linalg.min_norm_solve(k, cov_xy)
    except linalg.SingularMatrix:
        raise SingularCovariance("K_Y is singular and the normal equations are inconsistent") from None
    intercept = mean_x - sum((a * m for a, m in zip(alpha, mean_y)), Fraction(0))
    return AffinePredictor(intercept, tuple(alpha), non_unique=not unique)


class GaussianConditioning(NamedTuple):
    coefficients: tuple
    residual_variance: Fraction


def gaussian_condition(joint, target_index: int, given_indices: Sequence[int]) -> GaussianConditioning:
    """E[X_t | X_g] = sum lambda_j X_j for a centered Gaussian vector.

    ``joint`` is a GaussianVector (mean must be zero) or a bare covariance
    matrix. Exact when the covariance entries are exact.
    """
    if isinstance(joint, GaussianVector):
        if any(m != 0 for m in joint.mean):
            raise ValueError("gaussian_condition expects a centered vector; subtract the mean first")
        q = joint.covariance
    else:
        q = joint
    q = [[x if isinstance(x, float) else to_fraction(x) for x in row] for row in q]
    g = list(given_indices)
    t = target_index
    if t in g:
        raise ValueError("target cannot be among the given indices")
    block = [[q[i][j] for j in g] for i in g]
    rhs = [q[i][t] for i in g]
    try:
        lam = linalg.solve(block, rhs) if g else []
    except linalg.SingularMatrix:
        raise SingularBlock("covariance block of the conditioning variables is singular") from None
    resid = q[t][t] - sum((l * r for l, r in zip(lam, rhs)), Fraction(0))
    return GaussianConditioning(tuple(lam), resid)
