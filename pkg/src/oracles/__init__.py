"""
Independent Oracles

Brute-force recomputations (dense sympy ranks, naive enumeration) used by the
test suite to cross-check the engine. They share only the algebra and linear
algebra kernels with `src.core`.
"""

from .base import OracleResult, to_sympy
from .enumeration import enumerate_block, oracle_homology_by_enumeration
from .hochschild import GradedQuotient, oracle_hochschild_cochains
from .invariants import averaging_projector, oracle_cyclic_invariants

__all__ = [
    'OracleResult', 'to_sympy',
    'enumerate_block', 'oracle_homology_by_enumeration',
    'GradedQuotient', 'oracle_hochschild_cochains',
    'averaging_projector', 'oracle_cyclic_invariants',
]
