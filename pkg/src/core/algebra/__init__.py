"""Graded algebra kernel: polynomials with Koszul signs and Leibniz differentials"""

from .generators import Alphabet, Generator, Word
from .polynomials import (
    CommMonomial, CommPoly, NCPoly, Poly, format_poly, mul, normalize_factors, normalize_monomial,
)
from .presentation import (
    AlgebraPresentation, DGPresentation, DSquaredReport, apply_d, apply_derivation, check_d_squared,
)
from .bimodule import BimodulePoly, FreeBimodule

__all__ = [
    'Alphabet', 'Generator', 'Word',
    'CommMonomial', 'CommPoly', 'NCPoly', 'Poly', 'format_poly', 'mul',
    'normalize_factors', 'normalize_monomial',
    'AlgebraPresentation', 'DGPresentation', 'DSquaredReport',
    'apply_d', 'apply_derivation', 'check_d_squared',
    'BimodulePoly', 'FreeBimodule',
]
