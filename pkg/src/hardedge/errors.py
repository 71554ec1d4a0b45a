"""Exception hierarchy shared by all modules."""


class HardEdgeError(Exception):
    """Base class; `exit_code` is what the CLI returns when it escapes."""

    exit_code = 3


class ValidationError(HardEdgeError, ValueError):
    exit_code = 2


class AdmissibilityError(ValidationError):
    pass


class GeometryError(ValidationError):
    pass


class ModeMismatch(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class PathError(ValidationError):
    pass


class BranchError(ValidationError):
    pass


class PoleError(HardEdgeError, ArithmeticError):
    exit_code = 2


class ConvergenceError(HardEdgeError):
    pass


class NonConvergence(ConvergenceError):
    pass


class ToleranceError(HardEdgeError):
    pass


class SignViolation(HardEdgeError):
    def __init__(self, msg, zeta=None):
        super().__init__(msg)
        self.zeta = zeta


class ConsistencyError(HardEdgeError):
    pass


class FitError(HardEdgeError):
    pass
