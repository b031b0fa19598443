"""Exception types shared across the package."""


class TateopsError(Exception):
    """Base class for all package errors."""


class GroupTableError(TateopsError):
    """Multiplication table violates a group axiom, or a table file is malformed."""


class ModuleError(TateopsError):
    """A module action or an equivariant map is inconsistent."""


class ResolutionError(TateopsError):
    """Resolution construction failed or was requested for an invalid input."""


class WindowError(ResolutionError):
    """A requested degree lies outside the computed window."""


class ClassError(TateopsError):
    """A cohomology class label or expression cannot be resolved."""


class SolveError(TateopsError):
    """An exact linear system has no solution where one was required."""


class MissingImageError(TateopsError):
    """An operation table has no closed form for a requested generator."""
