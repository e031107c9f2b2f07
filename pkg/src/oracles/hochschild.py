"""Hochschild cohomology HH^n(A, End V) with End V twisted by a representation rho"""

import logging
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

import sympy

from ..core.algebra.generators import Alphabet, Word
from ..core.algebra.polynomials import term_weight
from ..core.algebra.presentation import AlgebraPresentation
from .base import OracleResult, check_size, dense_rank, digest, exact, to_sympy

logger = logging.getLogger(__name__)

# (weight, index into the normal basis of that weight)
Letter = Tuple[int, int]


class GradedQuotient:
    """
    A = k<x>/(relations) weight by weight up to w_max, with dense row reduction.

    Relations must be weight-homogeneous; the piece of weight w only
    depends on words and ideal elements of weight w.
    """

    def __init__(self, A: AlgebraPresentation, w_max: int):
        self.alphabet: Alphabet = A.alphabet
        self.w_max = w_max
        self.relations = []
        for rel in A.relations:
            weights = {term_weight(word, self.alphabet) for word in rel}
            if len(weights) != 1:
                raise ValueError(f"relation {rel!r} is not weight-homogeneous")
            self.relations.append((weights.pop(), rel))
        self._words: Dict[int, List[Word]] = {}
        self.basis: Dict[int, List[Word]] = {}
        self._normal_form: Dict[int, Dict[Word, Dict[int, sympy.Rational]]] = {}
        for w in range(1, w_max + 1):
            self._reduce_weight(w)

    def words(self, w: int) -> List[Word]:
        if w not in self._words:
            if w == 0:
                self._words[w] = [()]
            else:
                found = []
                for gen in self.alphabet:
                    if gen.weight <= w:
                        found.extend((gen.name,) + rest for rest in self.words(w - gen.weight))
                self._words[w] = found
        return self._words[w]

    def _reduce_weight(self, w: int) -> None:
        words = self.words(w)
        check_size(len(words), f"words of weight {w}")
        index = {word: i for i, word in enumerate(words)}
        rows = []
        for wr, rel in self.relations:
            for left_weight in range(w - wr + 1):
                for left in self.words(left_weight):
                    for right in self.words(w - wr - left_weight):
                        row = [0] * len(words)
                        for word, coeff in rel.items():
                            row[index[left + word + right]] += exact(coeff)
                        rows.append(row)
        pivots: Tuple[int, ...] = ()
        R = None
        if rows:
            R, pivots = sympy.Matrix(rows).rref()
        free = [i for i in range(len(words)) if i not in pivots]
        position = {col: k for k, col in enumerate(free)}
        forms: Dict[Word, Dict[int, sympy.Rational]] = {}
        for j, word in enumerate(words):
            if j in position:
                forms[word] = {position[j]: sympy.Integer(1)}
            else:
                r = pivots.index(j)
                forms[word] = {position[c]: -R[r, c] for c in free if R[r, c] != 0}
        self.basis[w] = [words[i] for i in free]
        self._normal_form[w] = forms

    def dim(self, w: int) -> int:
        return len(self.basis.get(w, []))

    def product(self, a: Letter, b: Letter) -> Dict[int, sympy.Rational]:
        """Normal-form coordinates of a*b in weight a[0] + b[0] (empty above w_max)"""
        weight = a[0] + b[0]
        if weight > self.w_max:
            return {}
        word = self.basis[a[0]][a[1]] + self.basis[b[0]][b[1]]
        return self._normal_form[weight][word]


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _bar_chains(Q: GradedQuotient, n: int, w: int) -> List[Tuple[Letter, ...]]:
    chains: List[Tuple[Letter, ...]] = []
    for weights in _compositions(w, n):
        choices: List[List[Tuple[Letter, ...]]] = [[()]]
        for wi in weights:
            choices.append([prefix + ((wi, k),) for prefix in choices[-1] for k in range(Q.dim(wi))])
        chains.extend(choices[-1])
    check_size(len(chains), f"bar chains ({n}, {w})")
    return chains


def _zero_action(A: AlgebraPresentation, d: int) -> Dict[str, List[List[int]]]:
    return {g.name: [[0] * d for _ in range(d)] for g in A.generators}


def _action_matrices(A: AlgebraPresentation, rho) -> Tuple[int, Mapping[str, Sequence[Sequence[Any]]]]:
    """(d, generator -> matrix) from an int d (zero action), a point with .d/.matrices, or a plain mapping"""
    if isinstance(rho, int):
        return rho, _zero_action(A, rho)
    matrices = getattr(rho, "matrices", rho)
    missing = [g.name for g in A.generators if g.name not in matrices]
    if missing:
        raise ValueError(f"no matrix for generator(s) {missing}")
    d = getattr(rho, "d", None)
    if d is None:
        d = len(next(iter(matrices.values()))) if matrices else 0
    return d, matrices


class TwistedAction:
    """rho on normal basis letters of a GradedQuotient, as sympy matrices"""

    def __init__(self, Q: GradedQuotient, d: int, matrices: Mapping[str, Sequence[Sequence[Any]]]):
        self.Q = Q
        self.d = d
        self._generators = {name: to_sympy(m) for name, m in matrices.items()}
        self._cache: Dict[Letter, sympy.Matrix] = {}

    def word(self, word: Word) -> sympy.Matrix:
        result = sympy.eye(self.d)
        for name in word:
            result = result * self._generators[name]
        return result

    def __call__(self, letter: Letter) -> sympy.Matrix:
        if letter not in self._cache:
            self._cache[letter] = self.word(self.Q.basis[letter[0]][letter[1]])
        return self._cache[letter]

    def check_relations(self, A: AlgebraPresentation) -> None:
        for rel in A.relations:
            value = sympy.zeros(self.d, self.d)
            for word, coeff in rel.items():
                value += exact(coeff) * self.word(word)
            if any(v != 0 for v in value):
                raise ValueError(f"relation {rel!r} does not vanish at the given action")


def _chains_up_to(Q: GradedQuotient, n: int, w_max: int) -> List[Tuple[Letter, ...]]:
    if n == 0:
        return [()]
    chains: List[Tuple[Letter, ...]] = []
    for w in range(n, w_max + 1):
        chains.extend(_bar_chains(Q, n, w))
    return chains


def _twisted_rank(Q: GradedQuotient, rho: TwistedAction, n: int, w_max: int) -> int:
    """
    Rank of b on End(V) (x) A+^(tensor n), weights <= w_max:

      b(f | a_1..a_n) = f rho(a_1) | a_2..a_n + sum_i (-1)^i f | ..a_i a_(i+1).. + (-1)^n rho(a_n) f | a_1..a_(n-1)
    """
    if n == 0:
        return 0
    d = rho.d
    source = _chains_up_to(Q, n, w_max)
    target = _chains_up_to(Q, n - 1, w_max)
    index = {(p, q, chain): i for i, (chain, p, q) in
             enumerate((c, p, q) for c in target for p in range(d) for q in range(d))}
    check_size(len(source) * d * d, f"twisted Hochschild chains in degree {n}")
    last_sign = -1 if n % 2 else 1
    columns = []
    for chain in source:
        left, right = rho(chain[0]), rho(chain[-1])
        for p in range(d):
            for q in range(d):
                column: Dict[int, Any] = {}

                def add(key, value) -> None:
                    row = index[key]
                    column[row] = column.get(row, 0) + value

                # E_pq rho(a_1) = sum_r rho(a_1)[q, r] E_pr
                for r in range(d):
                    if left[q, r] != 0:
                        add((p, r, chain[1:]), left[q, r])
                for i in range(n - 1):
                    sign = -1 if i % 2 == 0 else 1
                    for k, coeff in Q.product(chain[i], chain[i + 1]).items():
                        merged = chain[:i] + ((chain[i][0] + chain[i + 1][0], k),) + chain[i + 2:]
                        add((p, q, merged), sign * coeff)
                # rho(a_n) E_pq = sum_r rho(a_n)[r, p] E_rq
                for r in range(d):
                    if right[r, p] != 0:
                        add((r, q, chain[:-1]), last_sign * right[r, p])
                columns.append({r: c for r, c in column.items() if c != 0})
    return dense_rank(columns, len(index))


def oracle_hochschild_cochains(A: AlgebraPresentation, rho: Union[int, Mapping, Any], n_max: int,
                               w_max: int) -> OracleResult:
    """
    dims of HH^n(A, End V) for n <= n_max, End V an A-bimodule through rho.

    rho is a representation point (anything with .d and .matrices), a mapping
    generator -> d x d matrix, or an int d for the zero action. HH^n is dual to
    the homology of the normalized Hochschild chain complex End(V) (x) A+^(tensor n),
    whose outer terms lower weight; chains of weight <= w_max form a subcomplex.
    Its homology is exact for n < w_max when Tor^A(Q, Q) sits on the diagonal
    (Koszul algebras such as k[x,y]); at the zero action the complex splits by
    weight and truncation only drops the weights above w_max.
    """
    d, matrices = _action_matrices(A, rho)
    Q = GradedQuotient(A, w_max)
    action = TwistedAction(Q, d, matrices)
    action.check_relations(A)
    ranks = {n: _twisted_rank(Q, action, n, w_max) for n in range(n_max + 2)}
    dims: List[int] = []
    for n in range(n_max + 1):
        size = d * d * len(_chains_up_to(Q, n, w_max))
        dims.append(size - ranks[n] - ranks[n + 1])
    logger.debug(f"Hochschild oracle: {dims} (d={d}, w<={w_max})")
    action_key = tuple(sorted((g, tuple(tuple(str(v) for v in row) for row in m)) for g, m in matrices.items()))
    inputs = digest(A.name, tuple(A.alphabet.names), action_key, n_max, w_max)
    return OracleResult('hochschild_cochains', inputs, dims, 'twisted normalized Hochschild complex, dense sympy rank')
