"""Spectral symmetries of second-order difference operators on lattices."""

__version__ = "0.1.0"

from .window import Field, LatticeError, Window
from .stencil import StencilOperator, interior_equal

__all__ = [
    "Field",
    "LatticeError",
    "StencilOperator",
    "Window",
    "interior_equal",
    "__version__",
]
