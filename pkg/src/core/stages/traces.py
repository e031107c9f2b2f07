"""Stage 6: Trace Maps (T_n on cyclic chains, ch_2, noncommutative trace, GL invariance)"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from ..algebra.polynomials import CommPoly, NCPoly, format_poly, mul
from ..algebra.presentation import apply_d
from ..linalg.sparse_matrix import SparseRationalMatrix, Vector
from ..utils.errors import BoundsError, RepresentationError
from ..utils.types import PivotPolicy
from .ainfty import AInftyMorphism, ContractingHomotopy
from .cyclic import CyclicChain, CyclicComplex
from .homology import BlockHomology
from .representation import RepresentationFunctor, entry_name

logger = logging.getLogger(__name__)

Matrix = List[List[Fraction]]


class TraceMaps:
    """T_n: CC_n(A) -> R_V through the components f_{n+1} and the functor (-)_V"""

    def __init__(self, f: AInftyMorphism, functor: RepresentationFunctor):
        self.f = f
        self.functor = functor
        self.algebra = f.algebra
        self.cyclic = CyclicComplex(f.algebra)
        self.target = BlockHomology(functor.abelianized)
        self._values: Dict[Tuple[int, ...], CommPoly] = {}

    def on_word(self, word: Sequence[int]) -> CommPoly:
        """sum_i sum_k (-1)^(nk) f_{n+1}(a_k, .., a_n, a_0, .., a_{k-1})_ii for a word of length n+1"""
        word = tuple(word)
        if word not in self._values:
            n = len(word) - 1
            total = NCPoly()
            for k in range(n + 1):
                rotated = word[k:] + word[:k]
                total.add_scaled(self.f.component(rotated), -1 if (n * k) % 2 else 1)
            self._values[word] = self.functor.trace(total)
        return self._values[word]

    def on_chain(self, chain: CyclicChain) -> CommPoly:
        result = CommPoly(self.functor.abelianized.alphabet)
        for word, coeff in chain.terms.items():
            result.add_scaled(self.on_word(word), coeff)
        return result

    __call__ = on_chain

    def matrix(self, n: int, w: int) -> SparseRationalMatrix:
        """T_n from the weight-w cyclic block into the (n, w) block of R_V"""
        block = self.target.block(n, w)
        columns = []
        for word in self.cyclic.basis(n, w):
            value = self.on_word(word)
            columns.append({block.index[k]: c for k, c in value.items()})
        return SparseRationalMatrix.from_columns(block.dim, columns)

    def chain_map_residual(self, n: int, w: int) -> Dict[Tuple[int, ...], CommPoly]:
        """Nonzero columns of d T_n - T_{n-1} b on the weight-w cyclic block"""
        residuals = {}
        RV = self.functor.abelianized
        b = self.cyclic.b(n, w)
        sources = self.cyclic.basis(n, w)
        targets = self.cyclic.basis(n - 1, w)
        for col, word in enumerate(sources):
            lhs = apply_d(RV, self.on_word(word))
            rhs = CyclicChain(n - 1, {targets[r]: c for r, c in b.column(col).items()})
            residual = lhs - self.on_chain(rhs)
            if residual:
                residuals[word] = residual
        return residuals


def trace_chain(f: AInftyMorphism, functor: RepresentationFunctor, n: int, chain: CyclicChain) -> CommPoly:
    if chain.n != n:
        raise ValueError(f"chain of degree {chain.n} passed as degree {n}")
    return TraceMaps(f, functor).on_chain(chain)


def ch2_trace(f: AInftyMorphism, functor: RepresentationFunctor, pair: Tuple[int, int]) -> CommPoly:
    """
    sum_i (w(a, b) - w(b, a))_ii with w(a, b) = h'(f_1(ab) - f_1(a) f_1(b)),
    h' an independently solved homotopy (first-nonzero pivots).
    """
    a, b = pair
    A = f.A
    if A.unit in (a, b):
        return CommPoly(functor.abelianized.alphabet)
    homotopy = ContractingHomotopy(A, n_max=0, w_max=f.w_max, pivot_policy=PivotPolicy.FIRST_NONZERO)
    weight = f.algebra.weight(a) + f.algebra.weight(b)
    if weight > homotopy.w_max:
        raise BoundsError(f"ch_2 requested at weight {weight} beyond {homotopy.w_max}")

    def omega(u: int, v: int) -> NCPoly:
        product = A.lift(f.algebra.multiply({u: Fraction(1)}, {v: Fraction(1)}))
        return homotopy.apply(product - mul(A.section(u), A.section(v)))

    return functor.trace(omega(a, b) - omega(b, a))


def ntrace(f: AInftyMorphism, functor: RepresentationFunctor, a: Vector) -> NCPoly:
    """Noncommutative trace sum_i f_1(a)_ii in the matrix reduction R~"""
    return functor.nc_trace(f.A.lift(a))


# --- GL(V) invariance ----------------------------------------------------------


def _fraction(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def _det_and_inverse(g: Matrix) -> Tuple[Fraction, Optional[Matrix]]:
    M = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in g])
    det = M.det()
    if det == 0:
        return Fraction(0), None
    inv = M.inv()
    return _fraction(det), [[_fraction(inv[i, j]) for j in range(inv.cols)] for i in range(inv.rows)]


def sample_gl(d: int, rng: random.Random, entry_bound: int = 3) -> Tuple[Matrix, Matrix]:
    """Integer matrix with entries in [-entry_bound, entry_bound], resampled until invertible"""
    attempts = 0
    while True:
        g = [[Fraction(rng.randint(-entry_bound, entry_bound)) for _ in range(d)] for _ in range(d)]
        det, inverse = _det_and_inverse(g)
        if inverse is not None:
            if attempts:
                logger.debug(f"Resampled {attempts} singular matrices")
            return g, inverse
        attempts += 1


def conjugation_substitution(functor: RepresentationFunctor, g: Matrix, g_inv: Matrix) -> Dict[str, CommPoly]:
    """x_i_j -> (g^-1 X g)_ij for every base generator x, as linear forms in R_V"""
    alphabet = functor.abelianized.alphabet
    d = functor.d
    images = {}
    for gen in functor.source.generators:
        for i in range(d):
            for j in range(d):
                terms = {}
                for k in range(d):
                    for l in range(d):
                        c = g_inv[i][k] * g[l][j]
                        if c:
                            name = entry_name(gen.name, k + 1, l + 1)
                            terms[name] = terms.get(name, 0) + c
                image = CommPoly(alphabet)
                for name, c in terms.items():
                    image.add_scaled(CommPoly.generator(alphabet, name), c)
                images[entry_name(gen.name, i + 1, j + 1)] = image
    return images


def substitute(p: CommPoly, images: Dict[str, CommPoly]) -> CommPoly:
    result = p.zero()
    for monomial, coeff in p.items():
        term = CommPoly.unit(p.alphabet)
        for name in monomial.factors():
            term = mul(term, images[name])
        result.add_scaled(term, coeff)
    return result


@dataclass
class GLReport:
    """Sampled conjugation checks: per sample, which values stayed fixed"""
    d: int
    samples: List[Matrix] = field(default_factory=list)
    fixed: List[List[bool]] = field(default_factory=list)
    control_moved: Optional[bool] = None

    @property
    def passed(self) -> bool:
        invariant = all(all(row) for row in self.fixed)
        return invariant and self.control_moved is not False

    def to_dict(self) -> Dict:
        return {
            'd': self.d,
            'passed': self.passed,
            'samples': [[[str(x) for x in row] for row in g] for g in self.samples],
            'fixed': self.fixed,
            'control_moved': self.control_moved,
        }

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"GL({self.d}) invariance over {len(self.samples)} samples: {status}"


def gl_invariance_check(values: Sequence[CommPoly], functor: RepresentationFunctor, samples: int = 10,
                        entry_bound: int = 3, seed: int = 0, control: Optional[str] = None) -> GLReport:
    """Every value is fixed by x_i_j -> (g^-1 X g)_ij for sampled g; control must move"""
    rng = random.Random(seed)
    report = GLReport(functor.d)
    alphabet = functor.abelianized.alphabet
    if control and control not in alphabet:
        raise RepresentationError(f"Unknown control generator '{control}' for d={functor.d}")
    marker = CommPoly.generator(alphabet, control) if control else None
    moved = False
    for _ in range(samples):
        g, g_inv = sample_gl(functor.d, rng, entry_bound)
        images = conjugation_substitution(functor, g, g_inv)
        report.samples.append(g)
        report.fixed.append([substitute(v, images) == v for v in values])
        if marker is not None and substitute(marker, images) != marker:
            moved = True
    if marker is not None:
        report.control_moved = moved
    if not report.passed:
        logger.warning(f"⚠ GL invariance failed: {report}")
    return report


@dataclass
class TraceReport:
    """Trace matrices per (n, w), chain-map residual counts and the GL sampling outcome"""
    matrices: Dict[Tuple[int, int], SparseRationalMatrix] = field(default_factory=dict)
    residuals: Dict[Tuple[int, int], Dict[str, str]] = field(default_factory=dict)
    gl: Optional[GLReport] = None

    @property
    def passed(self) -> bool:
        return not any(self.residuals.values()) and (self.gl is None or self.gl.passed)

    def to_dict(self) -> Dict:
        return {
            'passed': self.passed,
            'shapes': {f"{n},{w}": list(M.shape) for (n, w), M in sorted(self.matrices.items())},
            'residuals': {f"{n},{w}": r for (n, w), r in sorted(self.residuals.items()) if r},
            'gl': self.gl.to_dict() if self.gl else None,
        }

    def __str__(self) -> str:
        lines = [f"Trace chain map: {'PASS' if self.passed else 'FAIL'}"]
        for (n, w), M in sorted(self.matrices.items()):
            bad = len(self.residuals.get((n, w), {}))
            lines.append(f"  T_{n} at weight {w}: {M.n_cols} chains -> {M.n_rows} monomials, {bad} residual columns")
        if self.gl is not None:
            lines.append(f"  {self.gl}")
        return "\n".join(lines)


def default_control(functor: RepresentationFunctor) -> Optional[str]:
    """Entry (1, 2) of the first generator; None at d = 1 where conjugation is trivial"""
    if functor.d < 2:
        return None
    return entry_name(functor.source.generators[0].name, 1, 2)


def trace_report(f: AInftyMorphism, functor: RepresentationFunctor, n_max: int, w_max: int,
                 gl_samples: int = 0, entry_bound: int = 3, seed: int = 0,
                 control: Optional[str] = None) -> TraceReport:
    """T_n matrices for n <= n_max, w <= w_max, with d T_n = T_{n-1} b checked on each block"""
    maps = TraceMaps(f, functor)
    report = TraceReport()
    values: List[CommPoly] = []
    for n in range(n_max + 1):
        for w in range(w_max + 1):
            report.matrices[(n, w)] = maps.matrix(n, w)
            values.extend(maps.on_word(word) for word in maps.cyclic.basis(n, w))
            if n >= 1:
                residual = maps.chain_map_residual(n, w)
                report.residuals[(n, w)] = {
                    str(word): format_poly(r, functor.abelianized.alphabet) for word, r in residual.items()
                }
    if gl_samples:
        nonzero = [v for v in values if v]
        report.gl = gl_invariance_check(nonzero, functor, gl_samples, entry_bound, seed,
                                        control or default_control(functor))
    return report
