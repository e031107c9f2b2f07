"""
Noncommutative and graded-commutative polynomials over the rationals.

NCPoly keys are words (tuples of generator names, kept verbatim).
CommPoly keys are CommMonomial normal forms: even generators with
exponents, then odd generators as a sorted subset; reordering into
normal form multiplies the coefficient by the Koszul sign.
"""

from collections import Counter
from fractions import Fraction
from typing import Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from .generators import Alphabet, Word
from ..utils.errors import PresentationError
from ..utils.types import Flavor

Scalar = Union[int, Fraction]


class CommMonomial(NamedTuple):
    """Normal-form monomial of the graded-commutative flavor"""
    evens: Tuple[Tuple[str, int], ...] = ()
    odds: Tuple[str, ...] = ()

    def factors(self) -> List[str]:
        expanded = [name for name, exp in self.evens for _ in range(exp)]
        expanded.extend(self.odds)
        return expanded

    def is_unit(self) -> bool:
        return not self.evens and not self.odds


UNIT_MONOMIAL = CommMonomial()


def accumulate(target: dict, key, coeff) -> None:
    if not coeff:
        return
    total = target.get(key, 0) + coeff
    if total:
        target[key] = total
    else:
        target.pop(key, None)


def koszul_sort(names: Sequence[str], alphabet: Alphabet) -> Tuple[int, Optional[Tuple[str, ...]]]:
    """Sort odd symbols into generator order; returns (sign, sorted) or (0, None) on a repeat"""
    idx = [alphabet.index(n) for n in names]
    if len(set(idx)) < len(idx):
        return 0, None
    inversions = 0
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                inversions += 1
    ordered = tuple(n for _, n in sorted(zip(idx, names)))
    return (-1 if inversions % 2 else 1), ordered


def normalize_factors(factors: Sequence[str], alphabet: Alphabet) -> Tuple[int, Optional[CommMonomial]]:
    """Normal form of a product of generators taken in the given order"""
    evens: Counter = Counter()
    odds: List[str] = []
    for name in factors:
        if alphabet.parity(name):
            odds.append(name)
        else:
            evens[name] += 1
    sign, ordered_odds = koszul_sort(odds, alphabet)
    if not sign:
        return 0, None
    ordered_evens = tuple(sorted(evens.items(), key=lambda item: alphabet.index(item[0])))
    return sign, CommMonomial(ordered_evens, ordered_odds)


def normalize_monomial(monomial: CommMonomial, alphabet: Alphabet) -> Tuple[int, Optional[CommMonomial]]:
    return normalize_factors(monomial.factors(), alphabet)


def multiply_monomials(m1: CommMonomial, m2: CommMonomial, alphabet: Alphabet) -> Tuple[int, Optional[CommMonomial]]:
    # Evens of m2 pass m1's odds for free; only the odd merge carries a sign
    if set(m1.odds) & set(m2.odds):
        return 0, None
    sign, odds = koszul_sort(m1.odds + m2.odds, alphabet)
    evens = Counter(dict(m1.evens))
    for name, exp in m2.evens:
        evens[name] += exp
    ordered = tuple(sorted(evens.items(), key=lambda item: alphabet.index(item[0])))
    return sign, CommMonomial(ordered, odds)


def monomial_key(monomial: CommMonomial, alphabet: Alphabet) -> Tuple:
    return (
        tuple((alphabet.index(n), e) for n, e in monomial.evens),
        tuple(alphabet.index(n) for n in monomial.odds),
    )


class NCPoly(dict):
    """Element of a free graded algebra: word -> Fraction, no zeros stored"""

    __slots__ = ()
    flavor = Flavor.NONCOMMUTATIVE

    def __init__(self, terms: Union[Mapping, Iterable, None] = None):
        super().__init__()
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for word, coeff in items:
                accumulate(self, tuple(word), Fraction(coeff))

    @classmethod
    def unit(cls, coeff: Scalar = 1) -> "NCPoly":
        return cls({(): coeff})

    @classmethod
    def generator(cls, name: str, coeff: Scalar = 1) -> "NCPoly":
        return cls({(name,): coeff})

    @classmethod
    def monomial(cls, factors: Sequence[str], coeff: Scalar = 1) -> "NCPoly":
        return cls({tuple(factors): coeff})

    def zero(self) -> "NCPoly":
        return NCPoly()

    def copy(self) -> "NCPoly":
        return NCPoly(self)

    def add_scaled(self, other: Mapping, coeff: Scalar) -> None:
        """In-place self += coeff * other (construction helper)"""
        if not coeff:
            return
        for key, c in other.items():
            accumulate(self, key, c * coeff)

    def __add__(self, other: "NCPoly") -> "NCPoly":
        result = NCPoly(self)
        result.add_scaled(other, 1)
        return result

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        result = NCPoly(self)
        result.add_scaled(other, -1)
        return result

    def __neg__(self) -> "NCPoly":
        return self.scaled(-1)

    def scaled(self, coeff: Scalar) -> "NCPoly":
        result = NCPoly()
        result.add_scaled(self, coeff)
        return result

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        return NotImplemented

    def is_zero(self) -> bool:
        return not self

    def __repr__(self) -> str:
        return f"NCPoly({format_poly(self)})"


class CommPoly(dict):
    """Element of a free graded-commutative algebra: CommMonomial -> Fraction"""

    __slots__ = ("alphabet",)
    flavor = Flavor.COMMUTATIVE

    def __init__(self, alphabet: Alphabet, terms: Union[Mapping, Iterable, None] = None):
        super().__init__()
        self.alphabet = alphabet
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for monomial, coeff in items:
                accumulate(self, CommMonomial(*monomial), Fraction(coeff))

    @classmethod
    def unit(cls, alphabet: Alphabet, coeff: Scalar = 1) -> "CommPoly":
        return cls(alphabet, {UNIT_MONOMIAL: coeff})

    @classmethod
    def generator(cls, alphabet: Alphabet, name: str, coeff: Scalar = 1) -> "CommPoly":
        return cls.monomial(alphabet, (name,), coeff)

    @classmethod
    def monomial(cls, alphabet: Alphabet, factors: Sequence[str], coeff: Scalar = 1) -> "CommPoly":
        sign, normal = normalize_factors(factors, alphabet)
        result = cls(alphabet)
        if normal is not None:
            accumulate(result, normal, Fraction(coeff) * sign)
        return result

    def zero(self) -> "CommPoly":
        return CommPoly(self.alphabet)

    def copy(self) -> "CommPoly":
        return CommPoly(self.alphabet, self)

    def add_scaled(self, other: Mapping, coeff: Scalar) -> None:
        """In-place self += coeff * other (construction helper)"""
        if not coeff:
            return
        for key, c in other.items():
            accumulate(self, key, c * coeff)

    def __add__(self, other: "CommPoly") -> "CommPoly":
        result = self.copy()
        result.add_scaled(other, 1)
        return result

    def __sub__(self, other: "CommPoly") -> "CommPoly":
        result = self.copy()
        result.add_scaled(other, -1)
        return result

    def __neg__(self) -> "CommPoly":
        return self.scaled(-1)

    def scaled(self, coeff: Scalar) -> "CommPoly":
        result = self.zero()
        result.add_scaled(self, coeff)
        return result

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        return NotImplemented

    def is_zero(self) -> bool:
        return not self

    def __repr__(self) -> str:
        return f"CommPoly({format_poly(self)})"


Poly = Union[NCPoly, CommPoly]


def mul(p: Poly, q: Poly) -> Poly:
    """Normal-form product; degrees and weights add per monomial"""
    if type(p) is not type(q):
        raise PresentationError(f"Cannot multiply {type(p).__name__} by {type(q).__name__}: mixed flavors")
    if isinstance(p, NCPoly):
        result = NCPoly()
        for w1, c1 in p.items():
            for w2, c2 in q.items():
                accumulate(result, w1 + w2, c1 * c2)
        return result
    alphabet = p.alphabet
    result = CommPoly(alphabet)
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            sign, m = multiply_monomials(m1, m2, alphabet)
            if m is not None:
                accumulate(result, m, c1 * c2 * sign)
    return result


def factors_of(key) -> List[str]:
    """Generator names of a word or normal-form monomial, left to right"""
    if isinstance(key, CommMonomial):
        return key.factors()
    return list(key)


def term_homdeg(key, alphabet: Alphabet) -> int:
    return sum(alphabet.homdeg(n) for n in factors_of(key))


def term_weight(key, alphabet: Alphabet) -> int:
    return sum(alphabet.weight(n) for n in factors_of(key))


def poly_homdeg(p: Poly, alphabet: Alphabet) -> Optional[int]:
    """Common homological degree of all terms; None when empty or inhomogeneous"""
    degrees = {term_homdeg(key, alphabet) for key in p}
    return degrees.pop() if len(degrees) == 1 else None


def poly_weights(p: Poly, alphabet: Alphabet) -> Tuple[int, ...]:
    return tuple(sorted({term_weight(key, alphabet) for key in p}))


def is_homogeneous(p: Poly, alphabet: Alphabet) -> bool:
    return len({(term_homdeg(k, alphabet), term_weight(k, alphabet)) for k in p}) <= 1


def same_flavor_monomial(template: Poly, factors: Sequence[str]) -> Poly:
    if isinstance(template, NCPoly):
        return NCPoly.monomial(factors)
    return CommPoly.monomial(template.alphabet, factors)


def zero_like(template: Poly) -> Poly:
    return template.zero()


def sorted_terms(p: Poly, alphabet: Alphabet) -> List[Tuple[object, Fraction]]:
    if isinstance(p, CommPoly):
        return sorted(p.items(), key=lambda kv: monomial_key(kv[0], alphabet))
    return sorted(p.items(), key=lambda kv: (len(kv[0]), alphabet.word_key(kv[0])))


def _format_coeff(coeff: Fraction) -> str:
    return str(coeff.numerator) if coeff.denominator == 1 else f"{coeff.numerator}/{coeff.denominator}"


def format_term(key) -> str:
    if isinstance(key, CommMonomial):
        parts = [name if exp == 1 else f"{name}^{exp}" for name, exp in key.evens]
        parts.extend(key.odds)
    else:
        parts = list(key)
    return "*".join(parts)


def format_poly(p: Poly, alphabet: Optional[Alphabet] = None) -> str:
    """Render in the DSL syntax: terms joined by +/-, `*` products, p/q coefficients"""
    if not p:
        return "0"
    items = sorted_terms(p, alphabet) if alphabet is not None else list(p.items())
    out = []
    for i, (key, coeff) in enumerate(items):
        sign = "-" if coeff < 0 else "+"
        magnitude = abs(coeff)
        body = format_term(key)
        if not body:
            text = _format_coeff(magnitude)
        elif magnitude == 1:
            text = body
        else:
            text = f"{_format_coeff(magnitude)}*{body}"
        if i == 0:
            out.append(text if sign == "+" else f"-{text}")
        else:
            out.append(f" {sign} {text}")
    return "".join(out)
