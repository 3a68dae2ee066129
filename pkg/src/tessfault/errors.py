"""Exception hierarchy shared by every module."""


class TessfaultError(Exception):
    """Base class for all library errors."""


class SphericalUnsupported(TessfaultError, ValueError):
    pass


class BudgetExceeded(TessfaultError):
    pass


class CollapseError(TessfaultError):
    """A spherical build closed up before reaching the requested generation."""


class UnknownVertex(TessfaultError, KeyError):
    pass


class NotApplicable(TessfaultError, ValueError):
    pass


class WrongFamily(NotApplicable):
    pass


class NotInvariant(TessfaultError):
    pass


class WeakeningNotApplicable(NotApplicable):
    pass


class OutsidePositiveRegion(WeakeningNotApplicable):
    pass


class BoundaryVertex(TessfaultError, ValueError):
    pass


class ShapeMismatch(TessfaultError, ValueError):
    pass


class DomainError(TessfaultError, ValueError):
    pass


class InsufficientMargin(TessfaultError, ValueError):
    pass


class FaceDegreeNot4(TessfaultError, ValueError):
    pass


class ConditionViolated(TessfaultError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BalanceViolated(TessfaultError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class RootNotInError(TessfaultError, ValueError):
    pass
