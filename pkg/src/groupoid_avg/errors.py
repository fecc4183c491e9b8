"""
Exception types raised by the toolkit.

Axiom violations found by the ``validate``/``check_*`` helpers are reported as
data; the exceptions below are for inputs that cannot be processed at all.
"""

from typing import Any, Optional


class GroupoidError(ValueError):
    """Invalid groupoid construction input (bad table, action law, ids)."""
    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class StarvedOrbitError(GroupoidError):
    """A cut-off function vanishes on a whole orbit."""
    def __init__(self, message: str, orbit: Any = None):
        super().__init__(message, witness=orbit)
        self.orbit = orbit


class MetricError(ValueError):
    """A Gram matrix is not symmetric positive definite."""
    def __init__(self, message: str, obj: Optional[int] = None):
        super().__init__(message)
        self.obj = obj


class ShapeError(ValueError):
    """Matrix shapes do not match the bundle dimensions."""
    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class SingularMapError(ValueError):
    """An arrow map is singular or too ill-conditioned to invert."""
    def __init__(self, message: str, arrow: Optional[int] = None):
        super().__init__(message)
        self.arrow = arrow


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""
    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class ScenarioError(ValueError):
    """A scenario or artifact file cannot be parsed or resolved."""
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        if path is not None:
            where = f"{path}:{line}" if line is not None else path
            message = f"{where}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class GateRefusedError(PreconditionError):
    """The near-representation gate failed and no override was given."""
    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report
