"""Exception types raised across the pipeline."""


class Wsn3dError(Exception):
    """Base class for all package errors."""


class EmptyPeakSet(Wsn3dError, ValueError):
    pass


class InvalidRange(Wsn3dError, ValueError):
    pass


class KTooLarge(Wsn3dError, ValueError):
    pass


class SingularGram(Wsn3dError, ArithmeticError):
    pass


class EigenFailure(Wsn3dError, ArithmeticError):
    pass


class TooManyNodes(Wsn3dError, ValueError):
    pass


class EmptyContour(Wsn3dError):
    """The watershed produced no contour pixels, so no breach graph exists."""
