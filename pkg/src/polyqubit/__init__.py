"""Simulation and verification tools for polyqubit encodings in trapped ions."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ContractError,
    DomainError,
    IntegrationError,
    PolyqubitError,
    SizingError,
    StructureError,
)
from .polyenc import PolyEncoding  # noqa: E402

__all__ = [
    "ContractError",
    "DomainError",
    "IntegrationError",
    "PolyEncoding",
    "PolyqubitError",
    "SizingError",
    "StructureError",
    "__version__",
]
