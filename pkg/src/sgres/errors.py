"""Exception hierarchy shared by every sgres module."""


class SGResError(Exception):
    """Base class for all library errors."""


class ParseError(SGResError):
    """Malformed expression text.

    ``offset`` is the byte offset of the offending token in the UTF-8
    encoding of the input.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    pass


class ArityError(ParseError):
    pass


class DomainError(SGResError):
    """Evaluation left the domain of a subexpression (1/0, log of x <= 0, ...)."""

    def __init__(self, message, subexpression=None):
        super().__init__(message)
        self.subexpression = subexpression


class HomogeneityError(SGResError):
    def __init__(self, message, component=None, measured_degree=None):
        super().__init__(message)
        self.component = component
        self.measured_degree = measured_degree


class CompatibilityError(SGResError):
    def __init__(self, message, index=None, deviation=None):
        super().__init__(message)
        self.index = index
        self.deviation = deviation


class MissingComponentError(SGResError):
    pass


class NonIntegerOrderError(SGResError):
    pass


class BranchError(SGResError):
    """A non-integer power was requested of a component that is not positive."""


class FinitePartError(SGResError):
    """The regularized radial integral does not exist as specified."""


class DerivativeDataRequired(SGResError):
    """The angular term needs the z-derivative of a subleading power component."""


class NonEllipticError(SGResError):
    pass


class EigenConvergenceError(SGResError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class OracleInstabilityError(SGResError):
    """No trustworthy eigenvalue range could be established."""

    def __init__(self, message, disagreements=None):
        super().__init__(message)
        self.disagreements = disagreements or []


class FitError(SGResError):
    pass


class ConfigError(SGResError):
    pass
