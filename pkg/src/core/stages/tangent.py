"""Stage 8: Derived Tangent Complexes (Der(R, End V) at a representation point)"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..algebra.presentation import AlgebraPresentation, DGPresentation
from ..linalg.sparse_matrix import SparseRationalMatrix, reduce
from ..utils.errors import PresentationError, RepresentationError
from ..utils.types import Flavor
from .representation import Matrix, RepresentationPoint, evaluate_word, validate_point

logger = logging.getLogger(__name__)

# (generator, i, j): the coordinate delta(generator)_ij
Coordinate = Tuple[str, int, int]


@dataclass
class TangentComplex:
    """Cochains C^n = Hom(degree-n generators, M_d) with delta -> delta o d evaluated at rho"""
    d: int
    coordinates: Dict[int, List[Coordinate]] = field(default_factory=dict)
    differentials: Dict[int, SparseRationalMatrix] = field(default_factory=dict)
    dims: List[int] = field(default_factory=list)

    @property
    def cochain_dims(self) -> List[int]:
        return [len(self.coordinates.get(n, [])) for n in range(len(self.dims))]

    def to_dict(self) -> Dict:
        return {'d': self.d, 'cochain_dims': self.cochain_dims, 'homology_dims': self.dims}

    def __str__(self) -> str:
        cells = "  ".join(f"H{n}={dim}" for n, dim in enumerate(self.dims))
        return f"Tangent complex at d={self.d}: {cells}"


class TangentBuilder:
    """Assembles the derivation complex of R into End V through rho"""

    def __init__(self, R: DGPresentation, point: RepresentationPoint):
        if R.flavor is not Flavor.NONCOMMUTATIVE:
            raise PresentationError("Tangent complexes are built from a noncommutative resolution")
        self.R = R
        self.point = point
        self.d = point.d
        self._words: Dict[Tuple[str, ...], Matrix] = {}

    def rho(self, word) -> Matrix:
        """rho extended to words: degree-0 letters through the point, any higher letter kills the word"""
        word = tuple(word)
        if word not in self._words:
            if any(self.R.alphabet.homdeg(name) for name in word):
                value = [[Fraction(0)] * self.d for _ in range(self.d)]
            else:
                missing = [name for name in word if name not in self.point.matrices]
                if missing:
                    raise RepresentationError(f"No matrix for degree-0 generator(s) {missing}")
                value = evaluate_word(word, self.point.matrices, self.d)
            self._words[word] = value
        return self._words[word]

    def coordinates(self, n: int) -> List[Coordinate]:
        return [(g.name, i, j) for g in self.R.alphabet.of_degree(n) for i in range(self.d) for j in range(self.d)]

    def differential(self, n: int) -> SparseRationalMatrix:
        """C^n -> C^(n+1): (D delta)(g) = delta(d g) for every degree-(n+1) generator g"""
        source = self.coordinates(n)
        target = self.coordinates(n + 1)
        index = {c: k for k, c in enumerate(target)}
        columns: List[Dict[int, Fraction]] = [{} for _ in source]
        position = {c: k for k, c in enumerate(source)}
        for gen in self.R.alphabet.of_degree(n + 1):
            for word, coeff in self.R.d_of(gen.name).items():
                for slot, letter in enumerate(word):
                    if self.R.alphabet.homdeg(letter) != n:
                        continue
                    left = self.rho(word[:slot])
                    right = self.rho(word[slot + 1:])
                    if not any(any(row) for row in left) or not any(any(row) for row in right):
                        continue
                    # delta = E_kl at `letter`: contributes left[:, k] * right[l, :]
                    for k in range(self.d):
                        for l in range(self.d):
                            column = columns[position[(letter, k, l)]]
                            for i in range(self.d):
                                if not left[i][k]:
                                    continue
                                for j in range(self.d):
                                    value = coeff * left[i][k] * right[l][j]
                                    if value:
                                        row = index[(gen.name, i, j)]
                                        column[row] = column.get(row, 0) + value
        return SparseRationalMatrix.from_columns(len(target), columns)


def tangent_complex(A: AlgebraPresentation, R: DGPresentation, d: int, point: RepresentationPoint,
                    n_max: Optional[int] = None) -> TangentComplex:
    """Homology dims of Der(R, M_d) in degrees 0..n_max (default: top generator degree + 1)"""
    if point.d != d:
        raise RepresentationError(f"Representation point has size {point.d}, expected {d}")
    validate_point(A, point)
    builder = TangentBuilder(R, point)
    top = R.max_homdeg() + 1 if n_max is None else n_max
    complex_ = TangentComplex(d)
    ranks: Dict[int, int] = {}
    for n in range(top + 1):
        complex_.coordinates[n] = builder.coordinates(n)
        complex_.differentials[n] = builder.differential(n)
        ranks[n] = reduce(complex_.differentials[n]).rank
    for n in range(top + 1):
        incoming = ranks.get(n - 1, 0)
        complex_.dims.append(len(complex_.coordinates[n]) - ranks[n] - incoming)
    logger.debug(f"Tangent cochain dims {complex_.cochain_dims}, ranks {ranks}")
    return complex_
