"""Exception hierarchy shared by every module of the package."""


class AggSpecError(Exception):
    """Base class for all errors raised by aggspec."""


class InvalidGeometryError(AggSpecError, ValueError):
    pass


class InvalidDipoleError(AggSpecError, ValueError):
    pass


class InvalidAngleError(AggSpecError, ValueError):
    pass


class InvalidFlatteningError(AggSpecError, ValueError):
    pass


class SingularGeometryError(AggSpecError, ValueError):
    """Two monomers sit on top of each other, so the coupling diverges."""


class SolverError(AggSpecError, RuntimeError):
    pass


class UnsupportedParityError(AggSpecError, ValueError):
    pass


class ZeroReferenceCouplingError(AggSpecError, ValueError):
    pass


class InvalidBroadeningError(AggSpecError, ValueError):
    pass


class InvalidCouplingError(AggSpecError, ValueError):
    pass


class GridError(AggSpecError, ValueError):
    pass


class GridTooNarrowError(GridError):
    """The energy grid does not enclose the spectral support with enough margin."""


class SupportBoundaryError(GridError):
    pass


class LineshapeTableError(AggSpecError, ValueError):
    pass


class ScenarioParseError(AggSpecError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ScenarioValidationError(AggSpecError, ValueError):
    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message)
