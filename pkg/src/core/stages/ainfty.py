"""Stage 5: A-infinity Components (quotient algebra, contracting homotopy, twisting cochain)"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..algebra.polynomials import NCPoly, format_poly, mul
from ..algebra.presentation import DGPresentation, apply_d
from ..linalg.sparse_matrix import Reduction, SparseRationalMatrix, Vector, reduce
from ..utils.errors import BoundsError, PresentationError, ResolutionError
from ..utils.types import Flavor, PivotPolicy
from .cyclic import FinDimAlgebra
from .homology import BlockHomology

logger = logging.getLogger(__name__)

Word = Tuple[str, ...]


class QuotientAlgebra:
    """
    A = R_0 / d(R_1), computed weight block by weight block.

    Words of each block are ordered lex-largest first; the non-pivot columns
    of the row-reduced relation matrix are the normal words. pi is the normal
    form, f_1 the inclusion of normal words into R_0.
    """

    def __init__(self, R: DGPresentation, w_max: int):
        if R.flavor is not Flavor.NONCOMMUTATIVE:
            raise PresentationError("A-infinity components need a noncommutative resolution")
        if not R.is_weight_homogeneous():
            raise ResolutionError(
                f"differential of {R.name or 'resolution'} is not weight-homogeneous; "
                f"reassign weights to build the quotient")
        self.R = R
        self.w_max = w_max
        self.blocks = BlockHomology(R, pivot_policy=PivotPolicy.FIRST_NONZERO)
        self._columns: Dict[int, List[Word]] = {}
        self._column_index: Dict[int, Dict[Word, int]] = {}
        self._reductions: Dict[int, Reduction] = {}
        self.basis: List[Word] = []
        for w in range(w_max + 1):
            self._reduce_block(w)
        self.index: Dict[Word, int] = {word: i for i, word in enumerate(self.basis)}
        self.unit = self.index[()]
        self._fin_dim: Optional[FinDimAlgebra] = None
        logger.debug(f"Quotient of {R.name or 'R'} up to weight {w_max}: {len(self.basis)} normal words")

    @classmethod
    def from_resolution(cls, R: DGPresentation, w_max: int) -> "QuotientAlgebra":
        return cls(R, w_max)

    def _reduce_block(self, w: int) -> None:
        alphabet = self.R.alphabet
        words = sorted(self.blocks.block(0, w).basis, key=alphabet.word_key, reverse=True)
        index = {word: i for i, word in enumerate(words)}
        rows = []
        for source in self.blocks.block(1, w).basis:
            image = self.blocks.d_monomial(source)
            rows.append({index[k]: c for k, c in image.items()})
        reduction = reduce(SparseRationalMatrix.from_rows(len(words), rows), PivotPolicy.FIRST_NONZERO)
        pivots = set(reduction.image_pivot_columns)
        normal = [words[i] for i in range(len(words)) if i not in pivots]
        self._columns[w] = words
        self._column_index[w] = index
        self._reductions[w] = reduction
        self.basis.extend(sorted(normal, key=alphabet.word_key))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def weight(self, i: int) -> int:
        return self.R.alphabet.word_weight(self.basis[i])

    def normal_form(self, p: NCPoly) -> Vector:
        """pi: degree-0 element of R -> coordinates on the normal-word basis"""
        alphabet = self.R.alphabet
        by_weight: Dict[int, Vector] = {}
        for word, coeff in p.items():
            if alphabet.word_homdeg(word):
                raise PresentationError("pi is only defined on degree 0")
            w = alphabet.word_weight(word)
            if w > self.w_max:
                raise BoundsError(f"word of weight {w} beyond the quotient bound {self.w_max}")
            vec = by_weight.setdefault(w, {})
            col = self._column_index[w][word]
            vec[col] = vec.get(col, 0) + coeff
        out: Vector = {}
        for w, vec in by_weight.items():
            reduced = self._reductions[w].reduce_vector(vec)
            for col, c in reduced.items():
                out[self.index[self._columns[w][col]]] = c
        return out

    def section(self, i: int) -> NCPoly:
        """f_1 on a basis element"""
        return NCPoly({self.basis[i]: 1})

    def lift(self, vec: Vector) -> NCPoly:
        return NCPoly({self.basis[i]: c for i, c in vec.items()})

    def multiply_basis(self, i: int, j: int) -> Vector:
        word = self.basis[i] + self.basis[j]
        if self.R.alphabet.word_weight(word) > self.w_max:
            return {}
        return self.normal_form(NCPoly({word: 1}))

    def to_fin_dim(self) -> FinDimAlgebra:
        """Weight-truncated A as structure constants on the normal words"""
        if self._fin_dim is None:
            structure = {}
            for i in range(self.dim):
                for j in range(self.dim):
                    product = self.multiply_basis(i, j)
                    if product:
                        structure[(i, j)] = product
            names = ["*".join(word) or "1" for word in self.basis]
            weights = [self.weight(i) for i in range(self.dim)]
            self._fin_dim = FinDimAlgebra(names, structure, unit=self.unit, weights=weights,
                                          name=f"{self.R.name or 'A'}_<={self.w_max}")
        return self._fin_dim

    def element(self, text_word: Sequence[str]) -> int:
        """Basis index of a normal word given by generator names"""
        word = tuple(text_word)
        if word not in self.index:
            raise PresentationError(f"{'*'.join(word) or '1'} is not a normal word of the quotient")
        return self.index[word]


class ContractingHomotopy:
    """
    h: R_n -> R_{n+1} on weight blocks with d h + h d = id - f_1 pi.

    h(m) solves d z = m - f_1 pi(m) - h(d m) with the deterministic solver
    of the (n+1, w) -> (n, w) block; h(1) = 0.
    """

    def __init__(self, A: QuotientAlgebra, n_max: int, w_max: int,
                 pivot_policy: PivotPolicy = PivotPolicy.SMALLEST_ENTRY):
        self.A = A
        self.R = A.R
        self.n_max = n_max
        self.w_max = min(w_max, A.w_max)
        self.pivot_policy = pivot_policy
        self.blocks = BlockHomology(A.R, pivot_policy=pivot_policy)
        self._solvers: Dict[Tuple[int, int], Reduction] = {}
        self._values: Dict[Word, NCPoly] = {}

    def _solver(self, n: int, w: int) -> Reduction:
        key = (n, w)
        if key not in self._solvers:
            M = self.blocks.differential_matrix(n + 1, w, 0)
            self._solvers[key] = reduce(M, self.pivot_policy)
        return self._solvers[key]

    def on_word(self, word: Word) -> NCPoly:
        if word in self._values:
            return self._values[word]
        alphabet = self.R.alphabet
        n, w = alphabet.word_homdeg(word), alphabet.word_weight(word)
        if n > self.n_max or w > self.w_max:
            raise BoundsError(f"homotopy requested at (n={n}, w={w}) beyond ({self.n_max}, {self.w_max})")
        m = NCPoly({word: 1})
        if n == 0:
            target = m - self.A.lift(self.A.normal_form(m))
        else:
            target = m - self.apply(apply_d(self.R, m))
        value = NCPoly()
        if target:
            block = self.blocks.block(n, w)
            x = self._solver(n, w).solve({block.index[k]: c for k, c in target.items()})
            if x is None:
                raise ResolutionError("cycle is not a boundary: the resolution property fails", block=(n, w))
            sources = self.blocks.block(n + 1, w).basis
            value = NCPoly({sources[i]: c for i, c in x.items()})
        self._values[word] = value
        return value

    def apply(self, p: NCPoly) -> NCPoly:
        result = NCPoly()
        for word, coeff in p.items():
            result.add_scaled(self.on_word(word), coeff)
        return result

    __call__ = apply

    def build(self) -> "ContractingHomotopy":
        """Solve every block up to the bounds; raises ResolutionError on the first failing block"""
        for n in range(self.n_max + 1):
            for w in range(self.w_max + 1):
                for word in self.blocks.block(n, w).basis:
                    self.on_word(word)
        logger.debug(f"Homotopy solved on {len(self._values)} words")
        return self

    def residual(self, n: int, w: int) -> Dict[Word, NCPoly]:
        """Nonzero values of d h + h d + f_1 pi - id on block (n, w)"""
        failures = {}
        for word in self.blocks.block(n, w).basis:
            m = NCPoly({word: 1})
            total = apply_d(self.R, self.on_word(word))
            if n > 0:
                total = total + self.apply(apply_d(self.R, m))
            else:
                total = total + self.A.lift(self.A.normal_form(m))
            total = total - m
            if total:
                failures[word] = total
        return failures


def build_homotopy(R: DGPresentation, n_max: int, w_max: int,
                   pivot_policy: PivotPolicy = PivotPolicy.SMALLEST_ENTRY) -> ContractingHomotopy:
    return ContractingHomotopy(QuotientAlgebra.from_resolution(R, w_max), n_max, w_max, pivot_policy).build()


class AInftyMorphism:
    """
    Components f_n: A^(tensor n) -> R of degree n-1, indexed by words of
    basis indices of A.

    f_1 is the section; for n >= 2, f_n = h(sum_i (-1)^(i-1) f_{n-1}(.., a_i a_{i+1}, ..)
    + sum_i (-1)^i f_i(a_1..a_i) f_{n-i}(a_{i+1}..a_n)); f_n vanishes when an argument is 1.
    """

    def __init__(self, homotopy: ContractingHomotopy, n_max: int, w_max: int):
        self.homotopy = homotopy
        self.A = homotopy.A
        self.algebra = homotopy.A.to_fin_dim()
        self.n_max = n_max
        self.w_max = min(w_max, homotopy.w_max)
        self._values: Dict[Tuple[int, ...], NCPoly] = {}
        self._zeroed: set = set()

    def _check_bounds(self, word: Sequence[int]) -> None:
        n = len(word)
        if n < 1:
            raise ValueError("components take at least one argument")
        if n > self.n_max:
            raise BoundsError(f"f_{n} requested beyond n_max={self.n_max}")
        weight = self.algebra.word_weight(word)
        if weight > self.w_max:
            raise BoundsError(f"f_{n} requested at weight {weight} beyond w_max={self.w_max}")

    def component(self, word: Sequence[int]) -> NCPoly:
        word = tuple(word)
        self._check_bounds(word)
        n = len(word)
        if n == 1:
            return NCPoly() if n in self._zeroed else self.A.section(word[0])
        if n in self._zeroed or any(a == self.A.unit for a in word):
            return NCPoly()
        if word not in self._values:
            self._values[word] = self.homotopy.apply(self.rhs(word))
        return self._values[word]

    __call__ = component

    def evaluate(self, vectors: Sequence[Vector]) -> NCPoly:
        """Multilinear extension of f_n to arguments given as coordinate vectors"""
        result = NCPoly()
        for choice in itertools.product(*[list(v.items()) for v in vectors]):
            coeff = Fraction(1)
            for _, c in choice:
                coeff *= c
            result.add_scaled(self.component(tuple(i for i, _ in choice)), coeff)
        return result

    def rhs(self, word: Sequence[int]) -> NCPoly:
        n = len(word)
        basis = [{a: Fraction(1)} for a in word]
        result = NCPoly()
        for i in range(n - 1):
            product = self.algebra.multiply(basis[i], basis[i + 1])
            if product:
                contracted = basis[:i] + [product] + basis[i + 2:]
                result.add_scaled(self.evaluate(contracted), -1 if i % 2 else 1)
        for i in range(1, n):
            left = self.component(word[:i])
            right = self.component(word[i:])
            if left and right:
                result.add_scaled(mul(left, right), -1 if i % 2 else 1)
        return result

    def words(self, n: int, max_weight: Optional[int] = None) -> List[Tuple[int, ...]]:
        """Argument words of n non-unit basis elements with total weight <= max_weight"""
        limit = self.w_max if max_weight is None else max_weight
        nonunit = [i for i in range(self.algebra.dim) if i != self.A.unit]
        found = []

        def walk(prefix: Tuple[int, ...], weight: int) -> None:
            if len(prefix) == n:
                found.append(prefix)
                return
            for i in nonunit:
                wi = self.algebra.weight(i)
                if weight + wi <= limit:
                    walk(prefix + (i,), weight + wi)

        walk((), 0)
        return found

    def solve(self) -> "AInftyMorphism":
        for n in range(2, self.n_max + 1):
            for word in self.words(n):
                self.component(word)
        logger.debug(f"Solved {len(self._values)} A-infinity component values")
        return self

    def zeroed(self, n: int) -> "AInftyMorphism":
        """Copy with f_n forced to zero (negative controls)"""
        clone = AInftyMorphism(self.homotopy, self.n_max, self.w_max)
        clone._values = {k: v for k, v in self._values.items() if len(k) < n}
        clone._zeroed = set(self._zeroed) | {n}
        return clone


def solve_components(homotopy: ContractingHomotopy, n_max: int, w_max: int) -> AInftyMorphism:
    return AInftyMorphism(homotopy, n_max, w_max).solve()


@dataclass
class TwistingReport:
    """Blockwise check of d f_n = (bar side) and pi f_1 = id"""
    checked: int = 0
    failures: List[Tuple[int, Tuple[int, ...], str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def first_failure_degree(self) -> Optional[int]:
        return min((n for n, _, _ in self.failures), default=None)

    def to_dict(self) -> Dict:
        return {
            'passed': self.passed,
            'checked': self.checked,
            'failures': [{'n': n, 'word': list(w), 'residual': r} for n, w, r in self.failures],
        }

    def __str__(self) -> str:
        if self.passed:
            return f"twisting cochain equation holds on {self.checked} words"
        n, word, residual = self.failures[0]
        return f"{len(self.failures)} failures; first at n={n} on {word}: {residual}"


def check_twisting(f: AInftyMorphism, n_max: int, w_max: int) -> TwistingReport:
    """Re-check pi f_1 = id and d f_n = bar side on every word within the bounds"""
    report = TwistingReport()
    A = f.A
    for i in range(A.dim):
        if A.weight(i) > w_max:
            continue
        report.checked += 1
        if A.normal_form(f.component((i,))) != {i: 1}:
            report.failures.append((1, (i,), "pi f_1 != id"))
    for n in range(2, n_max + 1):
        for word in f.words(n, w_max):
            report.checked += 1
            residual = apply_d(A.R, f.component(word)) - f.rhs(word)
            if residual:
                report.failures.append((n, word, format_poly(residual, A.R.alphabet)))
    if report.failures:
        logger.warning(f"⚠ Twisting cochain check failed on {len(report.failures)} words")
    return report
