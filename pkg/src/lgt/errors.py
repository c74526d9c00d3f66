"""Exception types raised across the toolkit."""


class LGTError(ValueError):
    """Base class for all toolkit errors."""


class NonIntegrableTail(LGTError):
    pass


class NonIntegrableAtZero(NonIntegrableTail):
    pass


class NonIntegrableAtInfinity(NonIntegrableTail):
    pass


class NonFinite(LGTError):
    pass


class UnknownTail(LGTError):
    pass


class AdmissibilityFailed(LGTError):
    pass


class GrowthConditionViolated(LGTError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class WeightSyntaxError(LGTError):
    pass
