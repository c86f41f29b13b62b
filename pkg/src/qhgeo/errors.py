"""Exception types raised across the toolkit."""


class QhGeoError(Exception):
    """Base class for all toolkit errors."""


class InvalidDomainError(QhGeoError, ValueError):
    pass


class PointOutsideDomainError(QhGeoError, ValueError):
    pass


class ContainmentError(QhGeoError, ValueError):
    """A curve leaves the domain."""


class NonFiniteDensityError(QhGeoError, ValueError):
    pass


class EmptyGraphError(QhGeoError, RuntimeError):
    pass


class DisconnectedPairError(QhGeoError, RuntimeError):
    pass


class DegenerateCurveError(QhGeoError, ValueError):
    pass


class InvalidParameterError(QhGeoError, ValueError):
    pass


class InvalidMatrixError(QhGeoError, ValueError):
    pass


class GapBoundTooSmallError(QhGeoError, ValueError):
    pass


class PreconditionError(QhGeoError, ValueError):
    """Domain classification tags do not satisfy a pipeline precondition."""


class ConfigError(QhGeoError, ValueError):
    pass
