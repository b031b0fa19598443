"""Exact Tate cohomology rings and chain-level power operations for small finite groups."""

__version__ = "0.1.0"

from .errors import (
    ClassError,
    GroupTableError,
    ModuleError,
    ResolutionError,
    SolveError,
    TateopsError,
    WindowError,
)
from .fplin import Fp

__all__ = [
    "ClassError",
    "Fp",
    "GroupTableError",
    "ModuleError",
    "ResolutionError",
    "SolveError",
    "TateopsError",
    "WindowError",
    "__version__",
]
