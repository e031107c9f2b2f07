"""Shared types and enums"""

from enum import Enum


class Flavor(Enum):
    """Multiplication flavor of a presentation"""
    NONCOMMUTATIVE = "nc"
    COMMUTATIVE = "comm"


class GeneratorKind(Enum):
    """Role of a generator"""
    ALGEBRA = "algebra"
    BIMODULE = "bimodule"


class PivotPolicy(Enum):
    """Pivot selection during exact elimination"""
    SMALLEST_ENTRY = "smallest_entry"   # smallest |numerator * denominator|, ties by lowest column
    FIRST_NONZERO = "first_nonzero"     # column sweep, first row carrying a nonzero


class CellStatus(Enum):
    """Validity of one homology table cell"""
    EXACT = "exact"
    STABILIZED = "stabilized"
    INVALID = "invalid"
