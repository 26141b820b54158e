"""Exception hierarchy shared by all fplab modules."""


class FplabError(Exception):
    """Base class for every error raised by fplab."""


class InvalidFormat(FplabError, ValueError):
    pass


class TooLarge(FplabError, ValueError):
    pass


class UlpUndefined(FplabError, ValueError):
    pass


class LengthMismatch(FplabError, ValueError):
    pass


class ShapeMismatch(FplabError, ValueError):
    pass


class DomainError(FplabError, ValueError):
    pass


class RelativeUndefined(FplabError, ZeroDivisionError):
    pass


class SingularMatrix(FplabError, ArithmeticError):
    pass


class ZeroPivot(FplabError, ArithmeticError):
    pass


class UnsupportedNorm(FplabError, ValueError):
    pass


class ConversionOverflow(FplabError, OverflowError):
    """Narrowing conversion to a fixed-width integer left the target range."""


class DuplicateNodes(FplabError, ValueError):
    pass


class DegreeZero(FplabError, ValueError):
    pass


class MultipleRoot(FplabError, ArithmeticError):
    pass


class ZeroRoot(FplabError, ArithmeticError):
    pass


class PerturbationTooLarge(FplabError, ValueError):
    pass
