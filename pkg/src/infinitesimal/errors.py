"""Exception hierarchy shared by all modules."""


class ModelError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(ModelError):
    """A computation could not be carried out (extinction, overflow...)."""


class ZeroMass(NumericalError):
    def __init__(self, message="distribution has zero mass", step=None):
        if step is not None:
            message = f"{message} (generation {step})"
        super().__init__(message)
        self.step = step


class Overflow(NumericalError):
    pass


class GridMismatch(ModelError):
    pass


class SupportViolation(NumericalError):
    pass


class NonPositiveVariance(ModelError):
    pass


class NegativeAlpha(ModelError):
    pass


class InvalidLowerSeed(ModelError):
    pass


class EtaOutOfRange(ModelError):
    pass


class ParameterRangeError(ModelError):
    pass


class InsufficientPoints(ModelError):
    pass


class NonPositiveError(ModelError):
    pass


class InvalidGeometry(ModelError):
    pass


class RootHasNoChild(ModelError):
    pass


class LeafHasNoParents(ModelError):
    pass


class NotALeaf(ModelError):
    pass


class HeightMismatch(ModelError):
    pass


class DegenerateCovariance(NumericalError):
    pass


class ZeroDensityAtLeaf(NumericalError):
    pass


class TreeTooLarge(ModelError):
    pass


class ConfigError(ModelError):
    pass
