"""Exception hierarchy for the derived representation engine"""

from typing import Optional, Tuple


class DRepError(Exception):
    """Base class for every error raised by the engine."""


class DSLSyntaxError(DRepError):
    """Malformed presentation or representation file."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(f"{location}{message}")


class PresentationError(DRepError):
    """Generators or differentials that do not form a valid presentation."""


class ResolutionError(DRepError):
    """The resolution property fails on a block."""

    def __init__(self, message: str, block: Optional[Tuple[int, int]] = None):
        self.block = block
        if block is not None:
            message = f"block (n={block[0]}, w={block[1]}): {message}"
        super().__init__(message)


class BoundsError(DRepError):
    """A request reaches past the bounds a structure was built to."""


class ResourceError(DRepError):
    """Estimated memory use exceeds the configured budget."""


class RepresentationError(DRepError):
    """A representation point that does not satisfy the defining relations."""


class LiftError(DRepError):
    """A lift through the periodicity complexes has no solution."""

    def __init__(self, message: str, block: Optional[Tuple[int, int]] = None):
        self.block = block
        if block is not None:
            message = f"block (n={block[0]}, w={block[1]}): {message}"
        super().__init__(message)
