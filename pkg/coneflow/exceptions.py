from typing import Optional, Sequence


class ConeFlowError(Exception):
    """Base class for all coneflow errors."""


class ChartDomainError(ConeFlowError, ValueError):
    """Evaluation at a degenerate chart point (a pole of the spherical chart)."""


class ChartDegeneracyError(ConeFlowError, ValueError):
    """The metric computed from a chart is not positive definite (mesh folding)."""


class InvalidGeometryError(ConeFlowError, ValueError):
    """Body and outer curves cross, or leave the allowed band of the sphere."""


class InvalidStateError(ConeFlowError, ValueError):
    """Non-physical state: non-positive density or internal energy, negative c^2."""

    def __init__(self, message: str, cells: Optional[Sequence] = None):
        super().__init__(message)
        self.cells = [] if cells is None else list(cells)


class DegenerateDirectionError(ConeFlowError, ValueError):
    """The direction chosen as time-like is characteristic (zero denominator)."""


class ContractViolationError(ConeFlowError, ValueError):
    """A caller broke an argument contract, e.g. passed an unnormalized direction."""


class SolverFailureError(ConeFlowError, RuntimeError):
    def __init__(self, message: str, cell=None, solution=None):
        super().__init__(message)
        self.cell = cell
        self.solution = solution


class DivergenceError(SolverFailureError):
    """Residual grew past the divergence factor of the reference residual."""


class NoAttachedSolutionError(ConeFlowError, ValueError):
    """No attached (weak) conical shock exists for the given Mach number and cone."""


class UnconvergedSolutionError(ConeFlowError, ValueError):
    pass


class VerificationFailure(ConeFlowError, AssertionError):
    pass


class ConfigError(ConeFlowError, ValueError):
    """Config parse or validation failure; message is anchored as path:line."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        if path is not None:
            anchor = f"{path}:{line}: " if line is not None else f"{path}: "
            message = anchor + message
        super().__init__(message)
