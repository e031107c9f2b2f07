"""Exact sparse linear algebra over the rationals"""

from .sparse_matrix import (
    Reduction, SparseRationalMatrix, Vector, ensure_within_budget, memory_budget_mb, rank,
    rank_of_vectors, reduce,
)

__all__ = [
    'Reduction', 'SparseRationalMatrix', 'Vector', 'ensure_within_budget', 'memory_budget_mb',
    'rank', 'rank_of_vectors', 'reduce',
]
