"""DG presentations: generators, a degree -1 differential, Leibniz extension"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .generators import Alphabet, Generator
from .polynomials import (
    CommPoly, NCPoly, Poly, factors_of, format_poly, mul, poly_weights,
    same_flavor_monomial, term_homdeg, term_weight,
)
from ..utils.errors import PresentationError
from ..utils.types import Flavor

logger = logging.getLogger(__name__)


class DGPresentation:
    """
    Almost free DG algebra: free graded algebra on an ordered alphabet with a
    differential given on generators. Generators missing from the
    differential map to zero.
    """

    def __init__(self, generators: Iterable[Generator], differential: Optional[Mapping[str, Poly]] = None,
                 flavor: Flavor = Flavor.NONCOMMUTATIVE, name: str = ""):
        self.alphabet = generators if isinstance(generators, Alphabet) else Alphabet(generators)
        self.flavor = flavor
        self.name = name
        self._differential: Dict[str, Poly] = {}
        for gen_name, image in (differential or {}).items():
            gen = self.alphabet[gen_name]
            image = self._coerce(image)
            for key in image:
                for factor in factors_of(key):
                    self.alphabet[factor]
                if term_homdeg(key, self.alphabet) != gen.homdeg - 1:
                    raise PresentationError(
                        f"d({gen_name}) must have degree {gen.homdeg - 1}, "
                        f"found term of degree {term_homdeg(key, self.alphabet)}"
                    )
            if image:
                self._differential[gen_name] = image

    def _coerce(self, p: Poly) -> Poly:
        if self.flavor is Flavor.NONCOMMUTATIVE:
            if not isinstance(p, NCPoly):
                raise PresentationError("Noncommutative presentation needs NCPoly differentials: mixed flavors")
            return p
        if isinstance(p, CommPoly):
            return CommPoly(self.alphabet, p) if p.alphabet != self.alphabet else p
        raise PresentationError("Graded-commutative presentation needs CommPoly differentials: mixed flavors")

    # --- construction helpers -------------------------------------------------

    def zero(self) -> Poly:
        return NCPoly() if self.flavor is Flavor.NONCOMMUTATIVE else CommPoly(self.alphabet)

    def unit(self) -> Poly:
        return NCPoly.unit() if self.flavor is Flavor.NONCOMMUTATIVE else CommPoly.unit(self.alphabet)

    def gen(self, name: str) -> Poly:
        self.alphabet[name]
        return self.monomial((name,))

    def monomial(self, factors: Sequence[str], coeff=1) -> Poly:
        if self.flavor is Flavor.NONCOMMUTATIVE:
            return NCPoly.monomial(factors, coeff)
        return CommPoly.monomial(self.alphabet, factors, coeff)

    def coerce(self, p: Poly) -> Poly:
        return self._coerce(p)

    # --- structure --------------------------------------------------------------

    @property
    def generators(self) -> Tuple[Generator, ...]:
        return self.alphabet.generators

    @property
    def differential(self) -> Dict[str, Poly]:
        return dict(self._differential)

    def d_of(self, name: str) -> Poly:
        self.alphabet[name]
        return self._differential.get(name, self.zero())

    def max_homdeg(self) -> int:
        return self.alphabet.max_homdeg()

    def weight_profile(self) -> Dict[str, Tuple[int, int]]:
        """Per generator: (min, max) weight over the monomials of d(g)"""
        profile = {}
        for name, image in self._differential.items():
            weights = poly_weights(image, self.alphabet)
            profile[name] = (weights[0], weights[-1])
        return profile

    def is_weight_homogeneous(self) -> bool:
        return all(lo == hi == self.alphabet.weight(g) for g, (lo, hi) in self.weight_profile().items())

    def is_weight_nondecreasing(self) -> bool:
        return all(lo >= self.alphabet.weight(g) for g, (lo, _) in self.weight_profile().items())

    def weight_decreasing_generators(self) -> List[str]:
        return [g for g, (lo, _) in self.weight_profile().items() if lo < self.alphabet.weight(g)]

    def reweighted(self, weights: Mapping[str, int]) -> "DGPresentation":
        alphabet = self.alphabet.reweighted(dict(weights))
        if self.flavor is Flavor.COMMUTATIVE:
            differential = {g: CommPoly(alphabet, p) for g, p in self._differential.items()}
        else:
            differential = dict(self._differential)
        return DGPresentation(alphabet, differential, self.flavor, self.name)

    def d(self, p: Poly) -> Poly:
        return apply_d(self, p)

    def __repr__(self) -> str:
        return f"DGPresentation({self.name or '?'}, {self.flavor.value}, {len(self.alphabet)} generators)"


def apply_derivation(alphabet: Alphabet, images: Mapping[str, Poly], degree: int, p: Poly) -> Poly:
    """
    Graded Leibniz extension of a derivation of the given degree:
    D(f1...fk) = sum_j (-1)^(degree * |f1...f_{j-1}|) f1...D(fj)...fk
    """
    result = p.zero()
    for key, coeff in p.items():
        factors = factors_of(key)
        prefix_deg = 0
        for j, name in enumerate(factors):
            gen = alphabet[name]
            image = images.get(name)
            if image:
                sign = -1 if (degree * prefix_deg) % 2 else 1
                left = same_flavor_monomial(p, factors[:j])
                right = same_flavor_monomial(p, factors[j + 1:])
                result.add_scaled(mul(mul(left, image), right), coeff * sign)
            prefix_deg += gen.homdeg
    return result


def apply_d(P: DGPresentation, p: Poly) -> Poly:
    """The graded Leibniz extension of P's differential"""
    p = P.coerce(p)
    return apply_derivation(P.alphabet, P._differential, -1, p)


@dataclass
class DSquaredReport:
    """Outcome of check_d_squared"""
    passed: bool
    failures: Dict[str, Poly] = field(default_factory=dict)
    checked: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'passed': self.passed,
            'checked': list(self.checked),
            'failures': {g: format_poly(p) for g, p in self.failures.items()},
        }

    def __str__(self) -> str:
        if self.passed:
            return f"d^2 = 0 on all {len(self.checked)} generators"
        bad = ", ".join(f"d^2({g}) = {format_poly(p)}" for g, p in self.failures.items())
        return f"d^2 != 0: {bad}"


def check_d_squared(P: DGPresentation) -> DSquaredReport:
    """Whether d(d(g)) normalizes to 0 for every generator"""
    report = DSquaredReport(passed=True)
    for gen in P.generators:
        report.checked.append(gen.name)
        residual = apply_d(P, P.d_of(gen.name))
        if residual:
            report.failures[gen.name] = residual
            report.passed = False
    if not report.passed:
        logger.debug(f"check_d_squared failed on {list(report.failures)}")
    return report


class AlgebraPresentation:
    """A = k<generators> / (relations), all generators in degree 0"""

    def __init__(self, generators: Iterable[Generator], relations: Sequence[NCPoly] = (), name: str = ""):
        self.alphabet = generators if isinstance(generators, Alphabet) else Alphabet(generators)
        self.name = name
        for gen in self.alphabet:
            if gen.homdeg != 0:
                raise PresentationError(f"Algebra generator '{gen.name}' must have degree 0")
        cleaned = []
        for rel in relations:
            if not isinstance(rel, NCPoly):
                raise PresentationError("Relations must be noncommutative polynomials")
            for word in rel:
                for factor in word:
                    self.alphabet[factor]
            if rel:
                cleaned.append(rel)
        self.relations: Tuple[NCPoly, ...] = tuple(cleaned)

    @property
    def generators(self) -> Tuple[Generator, ...]:
        return self.alphabet.generators

    def relation_weights(self) -> List[Tuple[int, ...]]:
        return [tuple(sorted({term_weight(w, self.alphabet) for w in rel})) for rel in self.relations]

    def __repr__(self) -> str:
        return f"AlgebraPresentation({self.name or '?'}, {len(self.alphabet)} generators, {len(self.relations)} relations)"
