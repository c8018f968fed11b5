"""Exception hierarchy shared by all spinframe modules."""


class SpinframeError(Exception):
    """Base class for every error raised deliberately by this package."""


class InvalidInputError(SpinframeError, ValueError):
    pass


class CapExceededError(InvalidInputError):
    """Requested spin count exceeds the configured dense-representation cap."""


class UnsupportedDimensionError(InvalidInputError):
    pass


class UndefinedAngleError(InvalidInputError):
    pass


class EnumerationTooLargeError(InvalidInputError):
    def __init__(self, count, cap):
        super().__init__(f"pair enumeration would produce {count} pairs (cap {cap})")
        self.count = count
        self.cap = cap


class IncomparableSignaturesError(InvalidInputError):
    pass


class NumericalConsistencyError(SpinframeError, ArithmeticError):
    pass


class ParseError(InvalidInputError):
    """Base class for document parsing failures."""


class MalformedDocumentError(ParseError):
    pass


class LengthMismatchError(ParseError):
    pass


class NormViolationError(ParseError):
    pass
