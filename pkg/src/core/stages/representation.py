"""Stage 2: Representation Functor (matrix reduction, abelianization, pushforwards)"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..algebra.bimodule import FreeBimodule
from ..algebra.generators import Alphabet, Generator
from ..algebra.polynomials import (
    CommPoly, NCPoly, Poly, accumulate, mul, multiply_monomials, normalize_factors, term_homdeg,
)
from ..algebra.presentation import AlgebraPresentation, DGPresentation, apply_derivation
from ..utils.constants import ENTRY_SEPARATOR, TRIE_AVAILABLE
from ..utils.errors import PresentationError, RepresentationError
from ..utils.types import Flavor

logger = logging.getLogger(__name__)

if TRIE_AVAILABLE:
    import pygtrie

Matrix = List[List[Fraction]]


class EntryNameRegistry:
    """
    User generator names, queried by prefix so each base's entry names
    `base_i_j` are only compared against names that start with `base_`.
    """

    def __init__(self, names: Iterable[str]):
        self._names = set(names)
        self._trie = None
        if TRIE_AVAILABLE:
            self._trie = pygtrie.CharTrie()
            for name in self._names:
                self._trie[name] = True

    def _candidates(self, base: str) -> List[str]:
        prefix = base + ENTRY_SEPARATOR
        if self._trie is not None:
            if not self._trie.has_subtrie(prefix):
                return []
            return list(self._trie.keys(prefix=prefix))
        return [n for n in self._names if n.startswith(prefix)]

    def check(self, base: str, d: int) -> None:
        candidates = set(self._candidates(base))
        if not candidates:
            return
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                entry = entry_name(base, i, j)
                if entry in candidates:
                    raise PresentationError(
                        f"Entry name '{entry}' for generator '{base}' collides with a declared generator"
                    )


def entry_name(base: str, i: int, j: int) -> str:
    return f"{base}{ENTRY_SEPARATOR}{i}{ENTRY_SEPARATOR}{j}"


def entry_generators(alphabet: Alphabet, d: int) -> List[Generator]:
    gens = []
    for gen in alphabet:
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                gens.append(Generator(entry_name(gen.name, i, j), gen.homdeg, gen.weight, gen.kind))
    return gens


def matrix_entry(p: NCPoly, i: int, j: int, d: int) -> NCPoly:
    """Entry (i, j) (1-based) of the matrix evaluation of p on universal matrices"""
    result = NCPoly()
    for word, coeff in p.items():
        k = len(word)
        if k == 0:
            if i == j:
                accumulate(result, (), coeff)
            continue
        for middle in itertools.product(range(1, d + 1), repeat=k - 1):
            path = (i,) + middle + (j,)
            entry_word = tuple(entry_name(g, path[s], path[s + 1]) for s, g in enumerate(word))
            accumulate(result, entry_word, coeff)
    return result


def abelianize_poly(p: NCPoly, alphabet: Alphabet) -> CommPoly:
    result = CommPoly(alphabet)
    for word, coeff in p.items():
        sign, monomial = normalize_factors(word, alphabet)
        if monomial is not None:
            accumulate(result, monomial, coeff * sign)
    return result


class RepresentationFunctor:
    """
    Matrix reduction R -> R~ and abelianization R~ -> R_V for V = Q^d.

    R~ is free on generators x_i_j (|x_i_j| = |x|, same weight) with
    d(x_i_j) the (i, j) entry of the matrix evaluation of d(x).
    """

    def __init__(self, R: DGPresentation, d: int, reserved: Iterable[str] = ()):
        if R.flavor is not Flavor.NONCOMMUTATIVE:
            raise PresentationError("matrix_reduce needs a noncommutative presentation")
        if d < 1:
            raise ValueError(f"Dimension must be positive, got {d}")
        self.source = R
        self.d = d
        registry = EntryNameRegistry(list(R.alphabet.names) + list(reserved))
        for gen in R.alphabet:
            registry.check(gen.name, d)
        self.entry_alphabet = Alphabet(entry_generators(R.alphabet, d))
        self._reduced: Optional[DGPresentation] = None
        self._abelianized: Optional[DGPresentation] = None

    @property
    def reduced(self) -> DGPresentation:
        if self._reduced is None:
            differential = {}
            for gen in self.source.generators:
                image = self.source.d_of(gen.name)
                if not image:
                    continue
                for i in range(1, self.d + 1):
                    for j in range(1, self.d + 1):
                        entry = matrix_entry(image, i, j, self.d)
                        if entry:
                            differential[entry_name(gen.name, i, j)] = entry
            name = f"{self.source.name}_d{self.d}_nc" if self.source.name else ""
            self._reduced = DGPresentation(self.entry_alphabet, differential, Flavor.NONCOMMUTATIVE, name)
        return self._reduced

    @property
    def abelianized(self) -> DGPresentation:
        if self._abelianized is None:
            self._abelianized = abelianize(self.reduced)
        return self._abelianized

    @property
    def alphabet(self) -> Alphabet:
        return self.entry_alphabet

    def entry(self, p: NCPoly, i: int, j: int) -> NCPoly:
        return matrix_entry(p, i, j, self.d)

    def entry_comm(self, p: NCPoly, i: int, j: int) -> CommPoly:
        return abelianize_poly(matrix_entry(p, i, j, self.d), self.entry_alphabet)

    def evaluate(self, p: NCPoly, commutative: bool = True) -> List[List[Poly]]:
        rows = []
        for i in range(1, self.d + 1):
            row = []
            for j in range(1, self.d + 1):
                row.append(self.entry_comm(p, i, j) if commutative else self.entry(p, i, j))
            rows.append(row)
        return rows

    def trace(self, p: NCPoly) -> CommPoly:
        """Tr of the matrix evaluation of p, in R_V"""
        total = NCPoly()
        for i in range(1, self.d + 1):
            total.add_scaled(matrix_entry(p, i, i, self.d), 1)
        return abelianize_poly(total, self.entry_alphabet)

    def nc_trace(self, p: NCPoly) -> NCPoly:
        total = NCPoly()
        for i in range(1, self.d + 1):
            total.add_scaled(matrix_entry(p, i, i, self.d), 1)
        return total

    def universal_matrices(self, commutative: bool = True) -> Dict[str, List[List[Poly]]]:
        out = {}
        for gen in self.source.generators:
            out[gen.name] = self.evaluate(NCPoly.generator(gen.name), commutative)
        return out


def matrix_reduce(R: DGPresentation, d: int) -> DGPresentation:
    return RepresentationFunctor(R, d).reduced


def abelianize(Rt: DGPresentation) -> DGPresentation:
    """Same generators, differentials re-normalized in the graded-commutative flavor"""
    if Rt.flavor is Flavor.COMMUTATIVE:
        return Rt
    alphabet = Rt.alphabet
    differential = {}
    for gen in alphabet:
        image = abelianize_poly(Rt.d_of(gen.name), alphabet)
        if image:
            differential[gen.name] = image
    name = Rt.name[:-3] if Rt.name.endswith("_nc") else Rt.name
    return DGPresentation(alphabet, differential, Flavor.COMMUTATIVE, name)


def universal_matrices(R: DGPresentation, d: int) -> Dict[str, List[List[Poly]]]:
    return RepresentationFunctor(R, d).universal_matrices()


def rep_equations(A: AlgebraPresentation, d: int) -> List[CommPoly]:
    """Nonzero entries of every relation evaluated on universal matrices"""
    alphabet = Alphabet(entry_generators(A.alphabet, d))
    equations = []
    for rel in A.relations:
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                entry = abelianize_poly(matrix_entry(rel, i, j, d), alphabet)
                if entry:
                    equations.append(entry)
    return equations


# --- representation points ---------------------------------------------------------

def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]


def _identity(d: int) -> Matrix:
    return [[Fraction(1 if i == j else 0) for j in range(d)] for i in range(d)]


def evaluate_word(word: Sequence[str], matrices: Mapping[str, Matrix], d: int) -> Matrix:
    result = _identity(d)
    for name in word:
        result = _mat_mul(result, matrices[name])
    return result


def evaluate_nc(p: NCPoly, matrices: Mapping[str, Matrix], d: int) -> Matrix:
    total = [[Fraction(0)] * d for _ in range(d)]
    for word, coeff in p.items():
        value = evaluate_word(word, matrices, d)
        for i in range(d):
            for j in range(d):
                total[i][j] += coeff * value[i][j]
    return total


@dataclass
class RepresentationPoint:
    """A point rho of Rep_V(A): one d x d rational matrix per algebra generator"""
    d: int
    matrices: Dict[str, Matrix]

    def __getitem__(self, name: str) -> Matrix:
        return self.matrices[name]

    def evaluate(self, p: NCPoly) -> Matrix:
        return evaluate_nc(p, self.matrices, self.d)

    def to_dict(self) -> Dict:
        return {
            'd': self.d,
            'matrices': {g: [[str(v) for v in row] for row in m] for g, m in self.matrices.items()},
        }

    @classmethod
    def zero(cls, A: AlgebraPresentation, d: int) -> "RepresentationPoint":
        return cls(d, {g.name: [[Fraction(0)] * d for _ in range(d)] for g in A.generators})


def evaluate_relations(A: AlgebraPresentation, point: RepresentationPoint) -> List[Matrix]:
    return [point.evaluate(rel) for rel in A.relations]


def validate_point(A: AlgebraPresentation, point: RepresentationPoint) -> RepresentationPoint:
    missing = [g.name for g in A.generators if g.name not in point.matrices]
    if missing:
        raise RepresentationError(f"No matrix given for generator(s) {missing}")
    extra = sorted(set(point.matrices) - set(A.alphabet.names))
    if extra:
        raise RepresentationError(f"Matrices given for unknown generator(s) {extra}")
    for name, m in point.matrices.items():
        if len(m) != point.d or any(len(row) != point.d for row in m):
            raise RepresentationError(f"Matrix for '{name}' is not {point.d}x{point.d}")
    for rel, value in zip(A.relations, evaluate_relations(A, point)):
        if any(v for row in value for v in row):
            raise RepresentationError(f"Relation does not vanish at the given point: {rel!r}")
    return point


def load_representation_point(text: str, A: AlgebraPresentation, d: Optional[int] = None) -> RepresentationPoint:
    from .dsl_parser import parse_rep_file

    matrices = parse_rep_file(text)
    sizes = {len(m) for m in matrices.values()}
    if len(sizes) > 1:
        raise RepresentationError(f"Matrices of different sizes {sorted(sizes)}")
    size = sizes.pop() if sizes else (d or 0)
    if d is not None and size != d:
        raise RepresentationError(f"Rep file has {size}x{size} matrices but --dim is {d}")
    return validate_point(A, RepresentationPoint(size, matrices))


# --- free bimodules ----------------------------------------------------------------

class ModulePoly(dict):
    """Element of a free module over R_V: (monomial, module generator) -> Fraction"""

    __slots__ = ()

    def add_scaled(self, other: Mapping, coeff) -> None:
        if not coeff:
            return
        for key, c in other.items():
            accumulate(self, key, c * coeff)

    def scaled(self, coeff) -> "ModulePoly":
        out = ModulePoly()
        out.add_scaled(self, coeff)
        return out

    def __add__(self, other: "ModulePoly") -> "ModulePoly":
        out = ModulePoly(self)
        out.add_scaled(other, 1)
        return out

    def __sub__(self, other: "ModulePoly") -> "ModulePoly":
        out = ModulePoly(self)
        out.add_scaled(other, -1)
        return out

    def coefficient_of(self, generator: str, alphabet: Alphabet) -> CommPoly:
        return CommPoly(alphabet, {m: c for (m, g), c in self.items() if g == generator})


def module_times(f: CommPoly, generator: str) -> ModulePoly:
    out = ModulePoly()
    for m, c in f.items():
        accumulate(out, (m, generator), c)
    return out


def module_left_multiply(f: CommPoly, element: ModulePoly) -> ModulePoly:
    out = ModulePoly()
    alphabet = f.alphabet
    for (m2, g), c2 in element.items():
        for m1, c1 in f.items():
            sign, m = multiply_monomials(m1, m2, alphabet)
            if m is not None:
                accumulate(out, (m, g), c1 * c2 * sign)
    return out


class ModulePresentation:
    """Free DG module over a graded-commutative R_V, generators written on the right"""

    def __init__(self, ring: DGPresentation, generators: Sequence[Generator],
                 differential: Mapping[str, ModulePoly], name: str = ""):
        if ring.flavor is not Flavor.COMMUTATIVE:
            raise PresentationError("Module presentations live over graded-commutative rings")
        self.ring = ring
        self.module_alphabet = Alphabet(generators)
        self.name = name
        self._differential = {g: ModulePoly(p) for g, p in differential.items() if p}

    @property
    def generators(self) -> Tuple[Generator, ...]:
        return self.module_alphabet.generators

    @property
    def rank(self) -> int:
        return len(self.module_alphabet)

    def d_of(self, name: str) -> ModulePoly:
        self.module_alphabet[name]
        return ModulePoly(self._differential.get(name, {}))

    def d(self, element: ModulePoly) -> ModulePoly:
        """d(f e) = d(f) e + (-1)^|f| f d(e)"""
        alphabet = self.ring.alphabet
        out = ModulePoly()
        for (m, g), c in element.items():
            f = CommPoly(alphabet, {m: c})
            df = self.ring.d(f)
            if df:
                out.add_scaled(module_times(df, g), 1)
            de = self._differential.get(g)
            if de:
                sign = -1 if term_homdeg(m, alphabet) % 2 else 1
                out.add_scaled(module_left_multiply(f, de), sign)
        return out

    def check_d_squared(self) -> Dict[str, ModulePoly]:
        failures = {}
        for gen in self.generators:
            residual = self.d(self.d_of(gen.name))
            if residual:
                failures[gen.name] = residual
        return failures


def bimodule_entries(M: FreeBimodule, d: int, functor: Optional[RepresentationFunctor] = None) -> ModulePresentation:
    """
    Free R_V-module on entries m_i_j with the differential obtained by
    matrix evaluation of d(m): (U m V)_ij = sum_kl U_ik m_kl V_lj, and
    V_lj moves past m_kl with sign (-1)^(|v||m|).
    """
    functor = functor or RepresentationFunctor(M.ring, d, reserved=M.module_alphabet.names)
    rv = functor.abelianized
    alphabet = rv.alphabet
    module_gens = entry_generators(M.module_alphabet, d)
    differential: Dict[str, ModulePoly] = {}
    for gen in M.generators:
        image = M.d_of(gen.name)
        if not image:
            continue
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                element = ModulePoly()
                for (u, g, v), coeff in image.items():
                    deg_v = M.ring.alphabet.word_homdeg(v)
                    deg_m = M.module_alphabet.homdeg(g)
                    sign = -1 if (deg_v * deg_m) % 2 else 1
                    for k in range(1, d + 1):
                        for l in range(1, d + 1):
                            left = functor.entry_comm(NCPoly.monomial(u), i, k)
                            right = functor.entry_comm(NCPoly.monomial(v), l, j)
                            coeff_poly = mul(left, right)
                            if coeff_poly:
                                element.add_scaled(module_times(coeff_poly, entry_name(g, k, l)), coeff * sign)
                if element:
                    differential[entry_name(gen.name, i, j)] = element
    name = f"{M.name}_d{d}" if M.name else ""
    return ModulePresentation(rv, module_gens, differential, name)


# --- derivations -------------------------------------------------------------------

class Derivation:
    """A graded derivation of a free (NC or commutative) presentation, given on generators"""

    def __init__(self, alphabet: Alphabet, images: Mapping[str, Poly], degree: int, flavor: Flavor):
        self.alphabet = alphabet
        self.degree = degree
        self.flavor = flavor
        self.images: Dict[str, Poly] = {}
        for name, image in images.items():
            gen = alphabet[name]
            if not image:
                continue
            expected = gen.homdeg + degree
            for key in image:
                if term_homdeg(key, alphabet) != expected:
                    raise PresentationError(
                        f"Degree-inhomogeneous assignment: D({name}) needs degree {expected}, "
                        f"found a term of degree {term_homdeg(key, alphabet)}"
                    )
            self.images[name] = image

    def zero(self) -> Poly:
        return NCPoly() if self.flavor is Flavor.NONCOMMUTATIVE else CommPoly(self.alphabet)

    def on_generator(self, name: str) -> Poly:
        self.alphabet[name]
        return self.images.get(name, self.zero())

    def apply(self, p: Poly) -> Poly:
        return apply_derivation(self.alphabet, self.images, self.degree, p)

    def __call__(self, p: Poly) -> Poly:
        return self.apply(p)

    def bracket(self, other: "Derivation") -> "Derivation":
        """[D1, D2] = D1 D2 - (-1)^(|D1||D2|) D2 D1"""
        sign = -1 if (self.degree * other.degree) % 2 else 1
        images = {}
        for gen in self.alphabet:
            value = self.apply(other.on_generator(gen.name))
            value.add_scaled(other.apply(self.on_generator(gen.name)), -sign)
            if value:
                images[gen.name] = value
        return Derivation(self.alphabet, images, self.degree + other.degree, self.flavor)

    def agrees_with(self, other: "Derivation") -> bool:
        return all(self.on_generator(g.name) == other.on_generator(g.name) for g in self.alphabet)


def derivation_pushforward(D: Derivation, functor: RepresentationFunctor) -> Derivation:
    """D_V(x_i_j) = entry (i, j) of the matrix evaluation of D(x), abelianized"""
    if D.flavor is not Flavor.NONCOMMUTATIVE:
        raise PresentationError("Pushforward starts from a derivation of the noncommutative presentation")
    alphabet = functor.entry_alphabet
    images = {}
    for gen in functor.source.generators:
        image = D.on_generator(gen.name)
        if not image:
            continue
        for i in range(1, functor.d + 1):
            for j in range(1, functor.d + 1):
                value = functor.entry_comm(image, i, j)
                if value:
                    images[entry_name(gen.name, i, j)] = value
    return Derivation(alphabet, images, D.degree, Flavor.COMMUTATIVE)


def differential_as_derivation(P: DGPresentation) -> Derivation:
    return Derivation(P.alphabet, P.differential, -1, P.flavor)
