"""Stage 4: Cyclic Complex (b, b', norm map, HC/HH of finite-dimensional algebras)"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..linalg.sparse_matrix import SparseRationalMatrix, Vector, ensure_within_budget, reduce
from ..utils.errors import PresentationError

logger = logging.getLogger(__name__)

TensorWord = Tuple[int, ...]


class FinDimAlgebra:
    """
    Unital algebra on an ordered basis with rational structure constants.

    structure[(i, j)] is the product e_i * e_j as {k: coefficient}. Optional
    weights make the algebra graded (unit in weight 0, products add weight).
    """

    def __init__(self, basis: Sequence[str], structure: Mapping[Tuple[int, int], Mapping[int, object]],
                 unit: int = 0, weights: Optional[Sequence[int]] = None, name: str = ""):
        self.basis: Tuple[str, ...] = tuple(basis)
        self.name = name
        self.unit = unit
        self.weights: Optional[Tuple[int, ...]] = tuple(weights) if weights is not None else None
        m = len(self.basis)
        if not 0 <= unit < m:
            raise PresentationError(f"Unit index {unit} outside basis of size {m}")
        if self.weights is not None and len(self.weights) != m:
            raise PresentationError("One weight per basis element is required")
        self._table: Dict[Tuple[int, int], Vector] = {}
        for (i, j), product in structure.items():
            clean = {k: Fraction(c) for k, c in product.items() if c}
            if clean:
                self._table[(i, j)] = clean
        self._validate()

    @property
    def dim(self) -> int:
        return len(self.basis)

    def product(self, i: int, j: int) -> Vector:
        return self._table.get((i, j), {})

    def multiply(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Vector:
        out: Vector = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.product(i, j).items():
                    total = out.get(k, 0) + a * b * c
                    if total:
                        out[k] = total
                    else:
                        out.pop(k, None)
        return out

    def weight(self, i: int) -> int:
        return self.weights[i] if self.weights is not None else 0

    def word_weight(self, word: Sequence[int]) -> int:
        return sum(self.weight(i) for i in word)

    def _validate(self) -> None:
        m = self.dim
        for i in range(m):
            e = {i: Fraction(1)}
            if self.product(self.unit, i) != e or self.product(i, self.unit) != e:
                raise PresentationError(f"Unit law fails on basis element '{self.basis[i]}'")
        for i, j, k in itertools.product(range(m), repeat=3):
            left = self.multiply(self.product(i, j), {k: Fraction(1)})
            right = self.multiply({i: Fraction(1)}, self.product(j, k))
            if left != right:
                raise PresentationError(
                    f"Structure constants are not associative at "
                    f"({self.basis[i]}, {self.basis[j]}, {self.basis[k]})"
                )
        if self.weights is not None:
            if self.weights[self.unit] != 0:
                raise PresentationError("The unit must have weight 0")
            for (i, j), product in self._table.items():
                for k in product:
                    if self.weights[k] != self.weights[i] + self.weights[j]:
                        raise PresentationError(
                            f"Product {self.basis[i]}*{self.basis[j]} leaves weight {self.weights[i] + self.weights[j]}"
                        )

    def format_element(self, vec: Mapping[int, Fraction]) -> str:
        if not vec:
            return "0"
        parts = []
        for k in sorted(vec):
            c = vec[k]
            parts.append(f"{c}*{self.basis[k]}" if c != 1 else self.basis[k])
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"FinDimAlgebra({self.name or '?'}, dim={self.dim})"

    # --- factories ---------------------------------------------------------------

    @classmethod
    def ground_field(cls) -> "FinDimAlgebra":
        return cls(["1"], {(0, 0): {0: 1}}, unit=0, weights=[0], name="k")

    @classmethod
    def dual_numbers(cls) -> "FinDimAlgebra":
        """k[eps]/(eps^2), eps in weight 1"""
        structure = {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}}
        return cls(["1", "eps"], structure, unit=0, weights=[0, 1], name="k[eps]/(eps^2)")

    @classmethod
    def product_kk(cls) -> "FinDimAlgebra":
        """k x k on the basis (1, e) with e the idempotent (1, 0)"""
        structure = {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (1, 1): {1: 1}}
        return cls(["1", "e"], structure, unit=0, name="k x k")

    @classmethod
    def matrix_algebra(cls, d: int) -> "FinDimAlgebra":
        """M_d(Q) on the basis I, E_ij for (i, j) != (d, d)"""
        if d < 1:
            raise ValueError("matrix size must be positive")
        units = [(i, j) for i in range(d) for j in range(d) if (i, j) != (d - 1, d - 1)]
        names = ["1"] + [f"E{i + 1}{j + 1}" for i, j in units]
        position = {ij: k + 1 for k, ij in enumerate(units)}

        def as_matrix(k: int) -> Dict[Tuple[int, int], Fraction]:
            if k == 0:
                return {(i, i): Fraction(1) for i in range(d)}
            return {units[k - 1]: Fraction(1)}

        def coordinates(M: Dict[Tuple[int, int], Fraction]) -> Dict[int, Fraction]:
            corner = M.get((d - 1, d - 1), Fraction(0))
            out = {0: corner} if corner else {}
            for ij, k in position.items():
                value = M.get(ij, Fraction(0)) - (corner if ij[0] == ij[1] else 0)
                if value:
                    out[k] = value
            return out

        structure = {}
        for a in range(len(names)):
            for b in range(len(names)):
                prod: Dict[Tuple[int, int], Fraction] = {}
                for (i, j), x in as_matrix(a).items():
                    for (j2, l), y in as_matrix(b).items():
                        if j == j2:
                            prod[(i, l)] = prod.get((i, l), 0) + x * y
                structure[(a, b)] = coordinates(prod)
        return cls(names, structure, unit=0, name=f"M_{d}(Q)")

    @classmethod
    def truncated_polynomial(cls, variables: Sequence[str], max_weight: int) -> "FinDimAlgebra":
        """k[variables] with every monomial of weight > max_weight set to zero"""
        m = len(variables)
        exponents = [
            e for total in range(max_weight + 1)
            for e in _compositions(total, m)
        ]
        names = [_monomial_name(variables, e) for e in exponents]
        index = {e: k for k, e in enumerate(exponents)}
        structure = {}
        for a, ea in enumerate(exponents):
            for b, eb in enumerate(exponents):
                ec = tuple(x + y for x, y in zip(ea, eb))
                if ec in index:
                    structure[(a, b)] = {index[ec]: 1}
        return cls(names, structure, unit=0, weights=[sum(e) for e in exponents],
                   name=f"k[{','.join(variables)}]_<={max_weight}")


def _compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    if parts == 0:
        return [()] if total == 0 else []
    out = []
    for first in range(total, -1, -1):
        out.extend((first,) + rest for rest in _compositions(total - first, parts - 1))
    return out


def _monomial_name(variables: Sequence[str], exponents: Sequence[int]) -> str:
    parts = [v if e == 1 else f"{v}^{e}" for v, e in zip(variables, exponents) if e]
    return "*".join(parts) or "1"


# --- cyclic words ---------------------------------------------------------------


def rotate(word: Sequence[int], k: int) -> TensorWord:
    """Move the last k letters to the front"""
    k %= len(word)
    return tuple(word[len(word) - k:]) + tuple(word[:len(word) - k])


def cyclic_reduce(word: Sequence[int], n: int) -> Tuple[TensorWord, int]:
    """
    Canonical representative of a word of length n+1 modulo (1 - t_n),
    t_n(a_0, ..., a_n) = (-1)^n (a_n, a_0, ..., a_{n-1}).
    Returns (least rotation, sign); sign is 0 when the word equals minus itself.
    """
    word = tuple(word)
    if len(word) != n + 1:
        raise ValueError(f"cyclic word of degree {n} must have length {n + 1}, got {len(word)}")
    best, best_k = word, 0
    annihilated = False
    for k in range(1, n + 1):
        rotated = rotate(word, k)
        if rotated == word and (n * k) % 2:
            annihilated = True
        if rotated < best:
            best, best_k = rotated, k
    if annihilated:
        return best, 0
    return best, (-1 if (n * best_k) % 2 else 1)


def apply_t(word: Sequence[int], n: int) -> Tuple[TensorWord, int]:
    """t_n on a single word of length n+1"""
    return rotate(word, 1), (-1 if n % 2 else 1)


@dataclass
class CyclicChain:
    """Element of CC_n(A): canonical word -> coefficient"""
    n: int
    terms: Dict[TensorWord, Fraction] = field(default_factory=dict)

    @classmethod
    def from_words(cls, n: int, words: Mapping[Sequence[int], object]) -> "CyclicChain":
        chain = cls(n)
        for word, coeff in words.items():
            chain.add(word, coeff)
        return chain

    def add(self, word: Sequence[int], coeff) -> None:
        canonical, sign = cyclic_reduce(word, self.n)
        value = Fraction(coeff) * sign
        if not value:
            return
        total = self.terms.get(canonical, 0) + value
        if total:
            self.terms[canonical] = total
        else:
            self.terms.pop(canonical, None)

    def __bool__(self) -> bool:
        return bool(self.terms)


def tensor_words(A: FinDimAlgebra, length: int, weight: Optional[int] = None) -> List[TensorWord]:
    """All basis words of the given length, optionally of one total weight, in lex order"""
    if weight is None or A.weights is None:
        return list(itertools.product(range(A.dim), repeat=length))
    found: List[TensorWord] = []

    def walk(prefix: Tuple[int, ...], remaining: int, left: int) -> None:
        if left == 0:
            if remaining == 0:
                found.append(prefix)
            return
        for i in range(A.dim):
            wi = A.weight(i)
            if wi <= remaining:
                walk(prefix + (i,), remaining - wi, left - 1)

    walk((), weight, length)
    return found


def cyclic_basis(A: FinDimAlgebra, n: int, weight: Optional[int] = None, reduced: bool = False) -> List[TensorWord]:
    """Canonical words spanning CC_n(A) (at one weight); reduced drops the all-unit word"""
    basis = []
    for word in tensor_words(A, n + 1, weight):
        canonical, sign = cyclic_reduce(word, n)
        if canonical == word and sign:
            if reduced and all(a == A.unit for a in word):
                continue
            basis.append(word)
    return basis


def hochschild_boundary(A: FinDimAlgebra, word: TensorWord) -> Dict[TensorWord, Fraction]:
    """b(a_0..a_n) = sum_{i<n} (-1)^i (..a_i a_{i+1}..) + (-1)^n (a_n a_0, a_1, .., a_{n-1}) on raw words"""
    n = len(word) - 1
    out: Dict[TensorWord, Fraction] = {}

    def add(key: TensorWord, value: Fraction) -> None:
        total = out.get(key, 0) + value
        if total:
            out[key] = total
        else:
            out.pop(key, None)

    for i in range(n):
        sign = -1 if i % 2 else 1
        for k, c in A.product(word[i], word[i + 1]).items():
            add(word[:i] + (k,) + word[i + 2:], c * sign)
    if n >= 1:
        sign = -1 if n % 2 else 1
        for k, c in A.product(word[n], word[0]).items():
            add((k,) + word[1:n], c * sign)
    return out


def bar_boundary(A: FinDimAlgebra, word: TensorWord) -> Dict[TensorWord, Fraction]:
    """b'(a_1..a_n) = sum_{i=1}^{n-1} (-1)^(i-1) (.. a_i a_{i+1} ..)"""
    out: Dict[TensorWord, Fraction] = {}
    for i in range(len(word) - 1):
        sign = -1 if i % 2 else 1
        for k, c in A.product(word[i], word[i + 1]).items():
            key = word[:i] + (k,) + word[i + 2:]
            total = out.get(key, 0) + c * sign
            if total:
                out[key] = total
            else:
                out.pop(key, None)
    return out


def norm_image(word: Sequence[int]) -> Dict[TensorWord, Fraction]:
    """N = sum_k t^k on A^(tensor n), t(a_1..a_n) = (-1)^(n-1) (a_n, a_1, .., a_{n-1})"""
    n = len(word)
    step = -1 if (n - 1) % 2 else 1
    out: Dict[TensorWord, Fraction] = {}
    sign = 1
    current = tuple(word)
    for _ in range(n):
        total = out.get(current, 0) + sign
        if total:
            out[current] = Fraction(total)
        else:
            out.pop(current, None)
        current = rotate(current, 1)
        sign *= step
    return out


@dataclass
class BoundaryMaps:
    """b on canonical cyclic words and b' on raw bar words in one degree"""
    n: int
    b: SparseRationalMatrix
    b_prime: SparseRationalMatrix
    cyclic_source: List[TensorWord]
    cyclic_target: List[TensorWord]
    bar_source: List[TensorWord]
    bar_target: List[TensorWord]


class CyclicComplex:
    """Per-degree, per-weight matrices of the cyclic, Hochschild and bar complexes of A"""

    def __init__(self, A: FinDimAlgebra, reduced: bool = False):
        self.A = A
        self.reduced = reduced
        self._bases: Dict[Tuple[int, Optional[int]], List[TensorWord]] = {}

    def basis(self, n: int, weight: Optional[int] = None) -> List[TensorWord]:
        key = (n, weight)
        if key not in self._bases:
            self._bases[key] = cyclic_basis(self.A, n, weight, self.reduced) if n >= 0 else []
        return self._bases[key]

    def b(self, n: int, weight: Optional[int] = None) -> SparseRationalMatrix:
        """b: CC_n -> CC_{n-1} on canonical words"""
        source = self.basis(n, weight)
        target = self.basis(n - 1, weight)
        if n == 0:
            return SparseRationalMatrix.zero(0, len(source))
        index = {w: i for i, w in enumerate(target)}
        columns = []
        for word in source:
            chain = CyclicChain.from_words(n - 1, hochschild_boundary(self.A, word))
            columns.append({index[w]: c for w, c in chain.terms.items() if w in index})
        return SparseRationalMatrix.from_columns(len(target), columns)

    def hochschild(self, n: int, weight: Optional[int] = None) -> SparseRationalMatrix:
        """b: C_n -> C_{n-1} on raw words of lengths n+1 and n"""
        source = tensor_words(self.A, n + 1, weight)
        if n == 0:
            return SparseRationalMatrix.zero(0, len(source))
        index = {w: i for i, w in enumerate(tensor_words(self.A, n, weight))}
        columns = [{index[w]: c for w, c in hochschild_boundary(self.A, word).items()} for word in source]
        return SparseRationalMatrix.from_columns(len(index), columns)

    def bar(self, length: int, weight: Optional[int] = None) -> SparseRationalMatrix:
        """b' from words of the given length to words one shorter"""
        source = tensor_words(self.A, length, weight)
        target = tensor_words(self.A, max(length - 1, 0), weight) if length >= 1 else []
        index = {w: i for i, w in enumerate(target)}
        columns = [{index[w]: c for w, c in bar_boundary(self.A, word).items()} for word in source]
        return SparseRationalMatrix.from_columns(len(target), columns)

    def norm(self, n: int, weight: Optional[int] = None) -> SparseRationalMatrix:
        """N_n: CC_{n-1} -> A^(tensor n)"""
        source = self.basis(n - 1, weight)
        index = {w: i for i, w in enumerate(tensor_words(self.A, n, weight))}
        columns = [{index[w]: c for w, c in norm_image(word).items()} for word in source]
        return SparseRationalMatrix.from_columns(len(index), columns)

    def signed_rotation(self, n: int, weight: Optional[int] = None) -> SparseRationalMatrix:
        """t on A^(tensor n) as a matrix"""
        words = tensor_words(self.A, n, weight)
        index = {w: i for i, w in enumerate(words)}
        sign = -1 if (n - 1) % 2 else 1
        return SparseRationalMatrix.from_columns(len(words), [{index[rotate(w, 1)]: sign} for w in words])

    def averaging_projector(self, n: int, weight: Optional[int] = None) -> SparseRationalMatrix:
        """(1/n) sum_k t^k on A^(tensor n)"""
        words = tensor_words(self.A, n, weight)
        index = {w: i for i, w in enumerate(words)}
        columns = []
        for w in words:
            columns.append({index[k]: c / n for k, c in norm_image(w).items()})
        return SparseRationalMatrix.from_columns(len(words), columns)


def boundary_maps(A: FinDimAlgebra, n: int, weight: Optional[int] = None) -> BoundaryMaps:
    if n < 1:
        raise ValueError("boundary maps are defined for n >= 1")
    cc = CyclicComplex(A)
    return BoundaryMaps(
        n=n,
        b=cc.b(n, weight),
        b_prime=cc.bar(n + 1, weight),
        cyclic_source=cc.basis(n, weight),
        cyclic_target=cc.basis(n - 1, weight),
        bar_source=tensor_words(A, n + 1, weight),
        bar_target=tensor_words(A, n, weight),
    )


@dataclass
class CyclicHomology:
    """HC or HH dimensions: total per degree, plus per weight when graded"""
    n_max: int
    dims: List[int]
    reduced_dims: List[int] = field(default_factory=list)
    by_weight: Dict[Tuple[int, int], int] = field(default_factory=dict)
    kind: str = "HC"

    def to_dict(self) -> Dict:
        return {
            'kind': self.kind,
            'n_max': self.n_max,
            'dims': list(self.dims),
            'reduced_dims': list(self.reduced_dims),
            'by_weight': {f"{n},{w}": d for (n, w), d in sorted(self.by_weight.items())},
        }

    def __str__(self) -> str:
        lines = [f"{self.kind}_n for n = 0..{self.n_max}: {tuple(self.dims)}"]
        if self.reduced_dims:
            lines.append(f"reduced {self.kind}_n: {tuple(self.reduced_dims)}")
        return "\n".join(lines)


def _complex_dims(matrix_at, n_max: int) -> List[int]:
    """H_n = dim ker(d_n) - rank(d_{n+1}) for n <= n_max"""
    dims = []
    ranks = {}
    for n in range(n_max + 2):
        M = matrix_at(n)
        red = reduce(M)
        ranks[n] = (M.n_cols, red.rank)
    for n in range(n_max + 1):
        cols, rank_n = ranks[n]
        dims.append(cols - rank_n - ranks[n + 1][1])
    return dims


def _weights(A: FinDimAlgebra, w_max: Optional[int]) -> List[Optional[int]]:
    if w_max is None or A.weights is None:
        return [None]
    return list(range(w_max + 1))


def check_cyclic_budget(A: FinDimAlgebra, n_top: int, budget_mb: Optional[float] = None) -> None:
    """Raise ResourceError before building A^(tensor n+1) for any n <= n_top that would not fit"""
    for n in range(n_top + 1):
        ensure_within_budget(A.dim ** (n + 1), f"CC_{n}({A.name or A.dim})", budget_mb)


def _graded_dims(A: FinDimAlgebra, n_max: int, w_max: Optional[int], matrix_for, threads: int,
                 budget_mb: Optional[float] = None):
    check_cyclic_budget(A, n_max + 1, budget_mb)
    weights = _weights(A, w_max)

    def one(weight):
        return weight, _complex_dims(lambda n: matrix_for(n, weight), n_max)

    if threads > 1 and len(weights) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, weights))
    else:
        results = [one(w) for w in weights]
    totals = [0] * (n_max + 1)
    by_weight = {}
    for weight, dims in results:
        for n, dim in enumerate(dims):
            totals[n] += dim
            if weight is not None:
                by_weight[(n, weight)] = dim
    return totals, by_weight


def hc_dims(A: FinDimAlgebra, n_max: int, w_max: Optional[int] = None, threads: int = 1,
            budget_mb: Optional[float] = None) -> CyclicHomology:
    """Dimensions of HC_n(A) and of the reduced HC_n (quotient by CC(k)) for n <= n_max"""
    full = CyclicComplex(A)
    reduced = CyclicComplex(A, reduced=True)
    dims, by_weight = _graded_dims(A, n_max, w_max, full.b, threads, budget_mb)
    reduced_dims, _ = _graded_dims(A, n_max, w_max, reduced.b, threads, budget_mb)
    logger.debug(f"HC({A.name}) up to n={n_max}: {dims}")
    return CyclicHomology(n_max, dims, reduced_dims, by_weight, kind="HC")


def hh_dims(A: FinDimAlgebra, n_max: int, w_max: Optional[int] = None, threads: int = 1,
            budget_mb: Optional[float] = None) -> CyclicHomology:
    """Hochschild homology dimensions from the standard complex A^(tensor n+1)"""
    cc = CyclicComplex(A)
    dims, by_weight = _graded_dims(A, n_max, w_max, cc.hochschild, threads, budget_mb)
    return CyclicHomology(n_max, dims, [], by_weight, kind="HH")


def commutator_quotient_dim(A: FinDimAlgebra) -> int:
    """dim A/[A, A]"""
    rows = []
    for i in range(A.dim):
        for j in range(i + 1, A.dim):
            diff = dict(A.product(i, j))
            for k, c in A.product(j, i).items():
                total = diff.get(k, 0) - c
                if total:
                    diff[k] = total
                else:
                    diff.pop(k, None)
            if diff:
                rows.append(diff)
    rank = reduce(SparseRationalMatrix.from_rows(A.dim, rows)).rank if rows else 0
    return A.dim - rank


@dataclass
class NormReport:
    """Per-degree checks of the norm map N_n: CC_{n-1}(A) -> A^(tensor n)"""
    algebra: str
    cc_dims: Dict[int, int] = field(default_factory=dict)
    image_ranks: Dict[int, int] = field(default_factory=dict)
    invariant_ranks: Dict[int, int] = field(default_factory=dict)
    injective: Dict[int, bool] = field(default_factory=dict)
    same_subspace: Dict[int, bool] = field(default_factory=dict)
    kills_one_minus_t: Dict[int, bool] = field(default_factory=dict)
    chain_map: Dict[int, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        checks = [self.injective, self.same_subspace, self.kills_one_minus_t, self.chain_map]
        return all(all(c.values()) for c in checks)

    def to_dict(self) -> Dict:
        return {
            'algebra': self.algebra,
            'passed': self.passed,
            'degrees': {
                n: {
                    'cc_dim': self.cc_dims[n],
                    'image_rank': self.image_ranks[n],
                    'invariant_rank': self.invariant_ranks[n],
                    'injective': self.injective[n],
                    'same_subspace': self.same_subspace[n],
                    'one_minus_t_kills_norm': self.kills_one_minus_t[n],
                    'chain_map': self.chain_map.get(n, True),
                }
                for n in sorted(self.cc_dims)
            },
        }

    def __str__(self) -> str:
        lines = [f"Norm map on {self.algebra}: {'PASS' if self.passed else 'FAIL'}"]
        for n in sorted(self.cc_dims):
            lines.append(
                f"  n={n}: dim CC={self.cc_dims[n]} rank N={self.image_ranks[n]} "
                f"invariants={self.invariant_ranks[n]} same_subspace={self.same_subspace[n]}"
            )
        return "\n".join(lines)


def norm_check(A: FinDimAlgebra, n_max: int, budget_mb: Optional[float] = None) -> NormReport:
    """N_n injective, Im N_n = signed-cyclic invariants, (1 - t) N = 0 and b' N = N b, for n <= n_max"""
    check_cyclic_budget(A, n_max, budget_mb)
    cc = CyclicComplex(A)
    report = NormReport(A.name or repr(A))
    for n in range(1, n_max + 1):
        N = cc.norm(n)
        P = cc.averaging_projector(n)
        rank_n = reduce(N).rank
        rank_p = reduce(P).rank
        joint = reduce(N.hstack(P)).rank
        report.cc_dims[n] = N.n_cols
        report.image_ranks[n] = rank_n
        report.invariant_ranks[n] = rank_p
        report.injective[n] = rank_n == N.n_cols
        report.same_subspace[n] = rank_n == rank_p == joint
        one_minus_t = SparseRationalMatrix.identity(N.n_rows) - cc.signed_rotation(n)
        report.kills_one_minus_t[n] = (one_minus_t @ N).is_zero()
        if n >= 2:
            report.chain_map[n] = (cc.bar(n) @ N) == (cc.norm(n - 1) @ cc.b(n - 1))
    if not report.passed:
        logger.warning(f"⚠ Norm map check failed on {report.algebra}")
    return report
