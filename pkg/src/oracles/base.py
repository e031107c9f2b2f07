"""Shared plumbing for the brute-force oracles"""

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, List, Mapping, Sequence

import sympy
from sympy.polys.matrices import DomainMatrix

from ..core.utils.errors import ResourceError

# Dense matrices only; anything larger belongs to the engine
MAX_DENSE_SIZE = 4000


@dataclass
class OracleResult:
    """One oracle answer with enough context to reproduce it"""
    oracle: str
    inputs_digest: str
    value: Any
    method: str
    witness: Any = None

    def __str__(self) -> str:
        return f"{self.oracle}[{self.inputs_digest[:8]}] = {self.value} ({self.method})"


def digest(*parts: Any) -> str:
    return hashlib.sha256(repr(parts).encode('utf-8')).hexdigest()


def check_size(size: int, label: str) -> None:
    if size > MAX_DENSE_SIZE:
        raise ResourceError(f"{label}: {size} basis elements exceed the dense oracle limit {MAX_DENSE_SIZE}")


def exact(value: Any) -> sympy.Expr:
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    return sympy.sympify(value)


def dense_rank(columns: Sequence[Mapping[int, Any]], n_rows: int) -> int:
    """Rank of the matrix whose columns are the given sparse vectors"""
    if not columns or n_rows == 0:
        return 0
    M = sympy.zeros(n_rows, len(columns))
    for c, column in enumerate(columns):
        for r, value in column.items():
            M[r, c] = exact(value)
    return DomainMatrix.from_Matrix(M).to_field().rank()


def to_sympy(rows: List[List[Any]]) -> sympy.Matrix:
    return sympy.Matrix([[exact(v) for v in row] for row in rows])
