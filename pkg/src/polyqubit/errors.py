class PolyqubitError(Exception):
    """Base class for errors raised by this package."""


class DomainError(PolyqubitError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class StructureError(PolyqubitError, ValueError):
    """Shapes, dimensions or subsystem layouts are inconsistent."""


class ContractError(PolyqubitError, ValueError):
    """An input violates a numerical precondition (Hermiticity, trace, ...)."""


class SizingError(PolyqubitError, ValueError):
    """A tensor product would exceed the configured Hilbert dimension cap."""


class IntegrationError(PolyqubitError, RuntimeError):
    """Time integration lost norm beyond the abort threshold."""

    def __init__(self, message, norm_error=None, suggested_dt=None):
        super().__init__(message)
        self.norm_error = norm_error
        self.suggested_dt = suggested_dt
