"""Homology of a weight-homogeneous DG presentation by naive monomial enumeration"""

import logging
from typing import Dict, List, Sequence, Tuple

from ..core.algebra.generators import Alphabet
from ..core.algebra.polynomials import CommPoly, NCPoly, normalize_factors
from ..core.algebra.presentation import DGPresentation, apply_d
from ..core.utils.types import Flavor
from .base import OracleResult, check_size, dense_rank, digest

logger = logging.getLogger(__name__)


def _factor_lists(alphabet: Alphabet, n: int, w: int, commutative: bool) -> List[Tuple[str, ...]]:
    gens = list(alphabet)
    found: List[Tuple[str, ...]] = []

    def walk(start: int, prefix: List[str], deg: int, weight: int) -> None:
        if deg == n and weight == w:
            found.append(tuple(prefix))
            return
        if deg > n or weight >= w:
            return
        for idx in range(start, len(gens)):
            gen = gens[idx]
            prefix.append(gen.name)
            # commutative: nondecreasing indices, odd generators at most once
            nxt = (idx + 1 if gen.is_odd else idx) if commutative else 0
            walk(nxt, prefix, deg + gen.homdeg, weight + gen.weight)
            prefix.pop()

    walk(0, [], 0, 0)
    return found


def enumerate_block(P: DGPresentation, n: int, w: int) -> List[object]:
    """Monomial basis of degree n and weight w, built without the engine's block code"""
    commutative = P.flavor is Flavor.COMMUTATIVE
    basis = []
    for factors in _factor_lists(P.alphabet, n, w, commutative):
        if commutative:
            _, monomial = normalize_factors(factors, P.alphabet)
            basis.append(monomial)
        else:
            basis.append(factors)
    check_size(len(basis), f"block ({n}, {w})")
    return basis


def _monomial(P: DGPresentation, key) -> object:
    if P.flavor is Flavor.COMMUTATIVE:
        return CommPoly(P.alphabet, {key: 1})
    return NCPoly({key: 1})


def _differential_rank(P: DGPresentation, source: Sequence[object], target: Sequence[object]) -> int:
    index: Dict[object, int] = {key: i for i, key in enumerate(target)}
    columns = []
    for key in source:
        image = apply_d(P, _monomial(P, key))
        column = {}
        for term, coeff in image.items():
            if term not in index:
                raise ValueError("differential is not weight-homogeneous; the enumeration oracle needs d to preserve weight")
            column[index[term]] = coeff
        columns.append(column)
    return dense_rank(columns, len(target))


def oracle_homology_by_enumeration(P: DGPresentation, n: int, w: int) -> OracleResult:
    """dim H_n at weight w = |block| - rank d_n - rank d_(n+1), dense ranks over Q"""
    if n < 0 or w < 0:
        raise ValueError(f"Degree and weight must be non-negative, got ({n}, {w})")
    block = enumerate_block(P, n, w)
    below = enumerate_block(P, n - 1, w) if n > 0 else []
    above = enumerate_block(P, n + 1, w)
    outgoing = _differential_rank(P, block, below) if below else 0
    incoming = _differential_rank(P, above, block) if above and block else 0
    dim = len(block) - outgoing - incoming
    logger.debug(f"Enumeration oracle ({n}, {w}): block {len(block)}, rank out {outgoing}, rank in {incoming}")
    inputs = digest(P.name, tuple(P.alphabet.names), n, w)
    return OracleResult('homology_by_enumeration', inputs, dim, 'monomial enumeration, dense sympy rank',
                        witness={'block': len(block), 'rank_out': outgoing, 'rank_in': incoming})
