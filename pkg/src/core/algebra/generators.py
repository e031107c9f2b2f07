"""Graded generators and the ordered alphabet they live in"""

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Sequence, Tuple

from ..utils.errors import PresentationError
from ..utils.types import GeneratorKind

Word = Tuple[str, ...]


@dataclass(frozen=True)
class Generator:
    """A homogeneous generator with homological degree and truncation weight"""
    name: str
    homdeg: int
    weight: int = 1
    kind: GeneratorKind = GeneratorKind.ALGEBRA

    def __post_init__(self):
        if self.homdeg < 0:
            raise PresentationError(f"Generator '{self.name}' has negative degree {self.homdeg}")
        if self.weight < 1:
            raise PresentationError(f"Generator '{self.name}' needs a positive weight, got {self.weight}")

    @property
    def parity(self) -> int:
        return self.homdeg % 2

    @property
    def is_odd(self) -> bool:
        return self.homdeg % 2 == 1

    def with_weight(self, weight: int) -> "Generator":
        return Generator(self.name, self.homdeg, weight, self.kind)


class Alphabet:
    """
    Ordered, immutable set of generators.

    The position of a generator fixes the global monomial order.
    """

    __slots__ = ("_generators", "_index")

    def __init__(self, generators: Iterable[Generator]):
        gens = tuple(generators)
        index: Dict[str, int] = {}
        for i, gen in enumerate(gens):
            if gen.name in index:
                raise PresentationError(f"Duplicate generator '{gen.name}'")
            index[gen.name] = i
        self._generators = gens
        self._index = index

    @property
    def generators(self) -> Tuple[Generator, ...]:
        return self._generators

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(g.name for g in self._generators)

    def __len__(self) -> int:
        return len(self._generators)

    def __iter__(self) -> Iterator[Generator]:
        return iter(self._generators)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> Generator:
        try:
            return self._generators[self._index[name]]
        except KeyError:
            raise PresentationError(f"Unknown generator '{name}'") from None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self._generators == other._generators

    def __hash__(self) -> int:
        return hash(self._generators)

    def __repr__(self) -> str:
        return f"Alphabet({', '.join(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PresentationError(f"Unknown generator '{name}'") from None

    def homdeg(self, name: str) -> int:
        return self[name].homdeg

    def weight(self, name: str) -> int:
        return self[name].weight

    def parity(self, name: str) -> int:
        return self[name].homdeg % 2

    def of_degree(self, n: int) -> Tuple[Generator, ...]:
        return tuple(g for g in self._generators if g.homdeg == n)

    def max_homdeg(self) -> int:
        return max((g.homdeg for g in self._generators), default=0)

    def extended(self, more: Sequence[Generator]) -> "Alphabet":
        return Alphabet(self._generators + tuple(more))

    def reweighted(self, weights: Dict[str, int]) -> "Alphabet":
        return Alphabet(g.with_weight(weights.get(g.name, g.weight)) for g in self._generators)

    def word_homdeg(self, word: Sequence[str]) -> int:
        return sum(self.homdeg(name) for name in word)

    def word_weight(self, word: Sequence[str]) -> int:
        return sum(self.weight(name) for name in word)

    def word_key(self, word: Sequence[str]) -> Tuple[int, ...]:
        return tuple(self.index(name) for name in word)
