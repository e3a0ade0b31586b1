"""Domain errors raised across stochlab.

Every error carries its class name as the machine-readable code the CLI
reports, so the names here are part of the public surface.
"""


class StochLabError(ValueError):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# exact_core
class PartsMismatch(StochLabError):
    pass


class MissingSubset(StochLabError):
    pass


class OutOfRange(StochLabError):
    pass


# walks
class NotMajority(StochLabError):
    pass


class IndexOutOfRange(StochLabError):
    pass


class HorizonTooLarge(StochLabError):
    pass


# distributions
class UnsupportedPoint(StochLabError):
    pass


class MomentUndefined(StochLabError):
    pass


class Unsupported(StochLabError):
    pass


class NoClosedForm(StochLabError):
    pass


class BadRate(StochLabError):
    pass


class DimensionMismatch(StochLabError):
    pass


# conditioning
class ZeroEvidence(StochLabError):
    pass


class SingularCovariance(StochLabError):
    pass


class SingularBlock(StochLabError):
    pass


# martingales
class NotSubmartingale(StochLabError):
    pass


class NotMartingale(StochLabError):
    pass


class BadBounds(StochLabError):
    pass


class BadInterval(StochLabError):
    pass


# chains
class NotIrreducible(StochLabError):
    pass


class UnknownState(StochLabError):
    pass


class IsolatedVertex(StochLabError):
    pass


# monte_carlo
class DegenerateVariance(StochLabError):
    pass


class UnsupportedDescriptor(StochLabError):
    pass
