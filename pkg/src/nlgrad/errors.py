"""Exception hierarchy shared by all nlgrad modules."""


class NlgradError(Exception):
    """Base class for every error raised by nlgrad."""


class ValidationError(NlgradError, ValueError):
    """Bad user input (kernel parameters, grid shape, config keys)."""


class UnsupportedDim(ValidationError):
    pass


class OutOfRangeDelta(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class HorizonTooLarge(ValidationError):
    pass


class UnresolvedHorizon(ValidationError):
    pass


class ConfigParse(ValidationError):
    pass


class NumericalError(NlgradError, ArithmeticError):
    """A numerical procedure did not reach its tolerance."""


class NormalizationFailure(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class ZeroProfile(NumericalError):
    pass


class SingularSymbol(NumericalError):
    pass


class LineSearchFailure(NumericalError):
    pass


class ExperimentFailure(NumericalError):
    pass
