"""Free DG bimodules over a noncommutative presentation"""

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from .generators import Alphabet, Generator, Word
from .polynomials import NCPoly, Scalar, accumulate
from .presentation import DGPresentation, apply_d
from ..utils.errors import PresentationError
from ..utils.types import Flavor, GeneratorKind

# (left word, bimodule generator, right word)
BimoduleWord = Tuple[Word, str, Word]


class BimodulePoly(dict):
    """Element of a free bimodule: (left, generator, right) -> Fraction"""

    __slots__ = ()

    def __init__(self, terms: Union[Mapping, Iterable, None] = None):
        super().__init__()
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for (left, gen, right), coeff in items:
                accumulate(self, (tuple(left), gen, tuple(right)), Fraction(coeff))

    @classmethod
    def generator(cls, name: str, coeff: Scalar = 1) -> "BimodulePoly":
        return cls({((), name, ()): coeff})

    def add_scaled(self, other: Mapping, coeff: Scalar) -> None:
        if not coeff:
            return
        for key, c in other.items():
            accumulate(self, key, c * coeff)

    def __add__(self, other: "BimodulePoly") -> "BimodulePoly":
        result = BimodulePoly(self)
        result.add_scaled(other, 1)
        return result

    def __sub__(self, other: "BimodulePoly") -> "BimodulePoly":
        result = BimodulePoly(self)
        result.add_scaled(other, -1)
        return result

    def scaled(self, coeff: Scalar) -> "BimodulePoly":
        result = BimodulePoly()
        result.add_scaled(self, coeff)
        return result

    def __neg__(self) -> "BimodulePoly":
        return self.scaled(-1)

    def sandwich(self, left: NCPoly, right: NCPoly) -> "BimodulePoly":
        """left * self * right"""
        result = BimodulePoly()
        for (u, g, v), c in self.items():
            for lw, lc in left.items():
                for rw, rc in right.items():
                    accumulate(result, (lw + u, g, v + rw), c * lc * rc)
        return result

    def __repr__(self) -> str:
        parts = []
        for (u, g, v), c in self.items():
            parts.append(f"{c}*{'*'.join(u + (f'[{g}]',) + v)}")
        return "BimodulePoly(" + " + ".join(parts) + ")"


class FreeBimodule:
    """
    Free DG bimodule over R on generators m^b, with differential
    d(m^b) given as bimodule words and extended by
    d(u m v) = d(u) m v + (-1)^|u| u d(m) v + (-1)^(|u|+|m|) u m d(v).
    """

    def __init__(self, ring: DGPresentation, generators: Sequence[Generator],
                 differential: Optional[Mapping[str, BimodulePoly]] = None, name: str = ""):
        if ring.flavor is not Flavor.NONCOMMUTATIVE:
            raise PresentationError("Bimodules are defined over noncommutative presentations")
        self.ring = ring
        self.name = name
        gens = tuple(g if g.kind is GeneratorKind.BIMODULE
                     else Generator(g.name, g.homdeg, g.weight, GeneratorKind.BIMODULE) for g in generators)
        for g in gens:
            if g.name in ring.alphabet:
                raise PresentationError(f"Bimodule generator '{g.name}' clashes with a ring generator")
        self.module_alphabet = Alphabet(gens)
        self._differential: Dict[str, BimodulePoly] = {}
        for gen_name, image in (differential or {}).items():
            gen = self.module_alphabet[gen_name]
            for key in image:
                if self.word_homdeg(key) != gen.homdeg - 1:
                    raise PresentationError(f"d({gen_name}) must have degree {gen.homdeg - 1}")
            if image:
                self._differential[gen_name] = BimodulePoly(image)

    @property
    def generators(self) -> Tuple[Generator, ...]:
        return self.module_alphabet.generators

    def d_of(self, name: str) -> BimodulePoly:
        self.module_alphabet[name]
        return self._differential.get(name, BimodulePoly())

    def word_homdeg(self, key: BimoduleWord) -> int:
        u, g, v = key
        ring = self.ring.alphabet
        return ring.word_homdeg(u) + self.module_alphabet.homdeg(g) + ring.word_homdeg(v)

    def word_weight(self, key: BimoduleWord) -> int:
        u, g, v = key
        ring = self.ring.alphabet
        return ring.word_weight(u) + self.module_alphabet.weight(g) + ring.word_weight(v)

    def d(self, element: BimodulePoly) -> BimodulePoly:
        result = BimodulePoly()
        ring = self.ring
        for (u, g, v), c in element.items():
            du = apply_d(ring, NCPoly.monomial(u))
            dv = apply_d(ring, NCPoly.monomial(v))
            deg_u = ring.alphabet.word_homdeg(u)
            deg_m = self.module_alphabet.homdeg(g)
            core = BimodulePoly.generator(g)
            if du:
                result.add_scaled(core.sandwich(du, NCPoly.monomial(v)), c)
            dm = self._differential.get(g)
            if dm:
                sign = -1 if deg_u % 2 else 1
                result.add_scaled(dm.sandwich(NCPoly.monomial(u), NCPoly.monomial(v)), c * sign)
            if dv:
                sign = -1 if (deg_u + deg_m) % 2 else 1
                result.add_scaled(core.sandwich(NCPoly.monomial(u), dv), c * sign)
        return result
