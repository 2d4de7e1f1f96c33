"""Exception types shared across the package."""


class CcrbError(Exception):
    """Base class for all package errors."""


class DimMismatch(CcrbError, ValueError):
    pass


class NonFinite(CcrbError, ValueError):
    pass


class NotSymmetric(CcrbError, ValueError):
    pass


class NotPsd(CcrbError, ValueError):
    pass


class NotProjector(CcrbError, ValueError):
    pass


class NotOnSet(CcrbError, ValueError):
    pass


class NotNested(CcrbError, ValueError):
    """Column space of the first matrix is not inside that of the second."""


class RankTolAmbiguous(CcrbError, ValueError):
    """Numerical rank of a fixed-rank point cannot be decided at the tolerance."""


class NoRetraction(CcrbError, NotImplementedError):
    pass


class NoProjection(CcrbError, NotImplementedError):
    pass


class NotInCone(CcrbError, ValueError):
    pass


class SingularJ(CcrbError, ValueError):
    pass


class DegenerateInput(CcrbError, ValueError):
    pass


class ConfigError(CcrbError, ValueError):
    """Bad experiment configuration. ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
