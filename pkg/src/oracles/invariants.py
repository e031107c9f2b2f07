"""Signed-cyclic invariants of A^(tensor n) through the averaging projector"""

import itertools
from typing import Tuple

import sympy

from .base import OracleResult, check_size, digest


def _rotate(word: Tuple[int, ...]) -> Tuple[int, ...]:
    return (word[-1],) + word[:-1]


def averaging_projector(dim: int, n: int) -> sympy.Matrix:
    """(1/n) sum_k t^k with t(a_1..a_n) = (-1)^(n-1) (a_n, a_1, .., a_(n-1)); rows and columns in lex order"""
    words = list(itertools.product(range(dim), repeat=n))
    check_size(len(words), f"A^(tensor {n})")
    index = {w: i for i, w in enumerate(words)}
    sign = -1 if (n - 1) % 2 else 1
    P = sympy.zeros(len(words), len(words))
    for col, word in enumerate(words):
        current, factor = word, 1
        for _ in range(n):
            P[index[current], col] += sympy.Rational(factor, n)
            current, factor = _rotate(current), factor * sign
    return P


def oracle_cyclic_invariants(A, n: int) -> OracleResult:
    """Rank of the averaging projector on A^(tensor n); the witness is the projector itself"""
    if n < 1:
        raise ValueError(f"Tensor length must be positive, got {n}")
    P = averaging_projector(A.dim, n)
    inputs = digest(getattr(A, 'name', ''), A.dim, n)
    return OracleResult('cyclic_invariants', inputs, P.rank(), 'dense averaging projector', witness=P)
