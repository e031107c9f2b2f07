"""
Exact sparse linear algebra over the rationals.

Gaussian elimination to reduced row echelon form with Fraction entries,
tracking the row combinations so one reduction answers rank, kernel and
any number of solve requests.
"""

import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..utils.constants import BYTES_PER_ENTRY, MEMORY_BUDGET_ENV
from ..utils.errors import ResourceError
from ..utils.types import PivotPolicy

logger = logging.getLogger(__name__)

Vector = Dict[int, Fraction]

DEFAULT_FILL_THRESHOLD = 0.30


def _axpy(target: Dict[int, Fraction], source: Mapping[int, Fraction], factor: Fraction) -> None:
    """target += factor * source, dropping zeros"""
    for key, value in source.items():
        total = target.get(key, 0) + factor * value
        if total:
            target[key] = total
        else:
            target.pop(key, None)


class SparseRationalMatrix:
    """Immutable sparse matrix: (row, col) -> nonzero Fraction"""

    __slots__ = ("n_rows", "n_cols", "_rows")

    def __init__(self, n_rows: int, n_cols: int, entries: Optional[Mapping[Tuple[int, int], object]] = None):
        if n_rows < 0 or n_cols < 0:
            raise ValueError(f"Invalid shape {n_rows}x{n_cols}")
        self.n_rows = n_rows
        self.n_cols = n_cols
        rows: Dict[int, Dict[int, Fraction]] = {}
        for (r, c), value in (entries or {}).items():
            if not (0 <= r < n_rows and 0 <= c < n_cols):
                raise IndexError(f"Entry ({r}, {c}) outside {n_rows}x{n_cols}")
            value = Fraction(value)
            if value:
                row = rows.setdefault(r, {})
                total = row.get(c, 0) + value
                if total:
                    row[c] = total
                else:
                    row.pop(c, None)
        self._rows = {r: row for r, row in rows.items() if row}

    @classmethod
    def from_columns(cls, n_rows: int, columns: Sequence[Mapping[int, object]]) -> "SparseRationalMatrix":
        entries = {}
        for c, column in enumerate(columns):
            for r, value in column.items():
                entries[(r, c)] = value
        return cls(n_rows, len(columns), entries)

    @classmethod
    def from_rows(cls, n_cols: int, rows: Sequence[Mapping[int, object]]) -> "SparseRationalMatrix":
        entries = {}
        for r, row in enumerate(rows):
            for c, value in row.items():
                entries[(r, c)] = value
        return cls(len(rows), n_cols, entries)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[object]]) -> "SparseRationalMatrix":
        n_rows = len(rows)
        n_cols = len(rows[0]) if rows else 0
        return cls(n_rows, n_cols, {(r, c): v for r, row in enumerate(rows) for c, v in enumerate(row) if v})

    @classmethod
    def identity(cls, n: int) -> "SparseRationalMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zero(cls, n_rows: int, n_cols: int) -> "SparseRationalMatrix":
        return cls(n_rows, n_cols)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self._rows.values())

    @property
    def fill(self) -> float:
        cells = self.n_rows * self.n_cols
        return self.nnz / cells if cells else 0.0

    def entries(self) -> Dict[Tuple[int, int], Fraction]:
        return {(r, c): v for r, row in self._rows.items() for c, v in row.items()}

    def get(self, r: int, c: int) -> Fraction:
        return self._rows.get(r, {}).get(c, Fraction(0))

    def row(self, r: int) -> Vector:
        return dict(self._rows.get(r, {}))

    def rows(self) -> List[Vector]:
        return [dict(self._rows.get(r, {})) for r in range(self.n_rows)]

    def columns(self) -> List[Vector]:
        cols: List[Vector] = [{} for _ in range(self.n_cols)]
        for r, row in self._rows.items():
            for c, v in row.items():
                cols[c][r] = v
        return cols

    def column(self, c: int) -> Vector:
        return {r: row[c] for r, row in self._rows.items() if c in row}

    def is_zero(self) -> bool:
        return not self._rows

    def to_dense(self) -> List[List[Fraction]]:
        dense = [[Fraction(0)] * self.n_cols for _ in range(self.n_rows)]
        for r, row in self._rows.items():
            for c, v in row.items():
                dense[r][c] = v
        return dense

    def transpose(self) -> "SparseRationalMatrix":
        return SparseRationalMatrix(self.n_cols, self.n_rows, {(c, r): v for (r, c), v in self.entries().items()})

    def matvec(self, x: Mapping[int, object]) -> Vector:
        out: Vector = {}
        for r, row in self._rows.items():
            total = sum((v * x[c] for c, v in row.items() if c in x), Fraction(0))
            if total:
                out[r] = total
        return out

    def __matmul__(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        if self.n_cols != other.n_rows:
            raise ValueError(f"Shape mismatch {self.shape} @ {other.shape}")
        entries: Dict[Tuple[int, int], Fraction] = {}
        for r, row in self._rows.items():
            acc: Vector = {}
            for k, v in row.items():
                other_row = other._rows.get(k)
                if other_row:
                    _axpy(acc, other_row, v)
            for c, v in acc.items():
                entries[(r, c)] = v
        return SparseRationalMatrix(self.n_rows, other.n_cols, entries)

    def __add__(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"Shape mismatch {self.shape} + {other.shape}")
        entries = self.entries()
        for key, v in other.entries().items():
            entries[key] = entries.get(key, 0) + v
        return SparseRationalMatrix(self.n_rows, self.n_cols, entries)

    def __neg__(self) -> "SparseRationalMatrix":
        return SparseRationalMatrix(self.n_rows, self.n_cols, {k: -v for k, v in self.entries().items()})

    def __sub__(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        return self + (-other)

    def scaled(self, factor) -> "SparseRationalMatrix":
        return SparseRationalMatrix(self.n_rows, self.n_cols, {k: v * factor for k, v in self.entries().items()})

    def hstack(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        if self.n_rows != other.n_rows:
            raise ValueError(f"Row mismatch {self.shape} | {other.shape}")
        entries = self.entries()
        for (r, c), v in other.entries().items():
            entries[(r, c + self.n_cols)] = v
        return SparseRationalMatrix(self.n_rows, self.n_cols + other.n_cols, entries)

    def select_rows(self, indices: Sequence[int]) -> "SparseRationalMatrix":
        return SparseRationalMatrix.from_rows(self.n_cols, [self._rows.get(i, {}) for i in indices])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SparseRationalMatrix) and self.shape == other.shape and self._rows == other._rows

    def __repr__(self) -> str:
        return f"SparseRationalMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


@dataclass
class Reduction:
    """Result of reduce(): rank, kernel basis, pivot columns and a reusable solver"""
    n_rows: int
    n_cols: int
    rank: int
    kernel_basis: List[Vector]
    image_pivot_columns: List[int]
    # (pivot column, reduced row, combination of original rows)
    pivot_rows: List[Tuple[int, Vector, Vector]] = field(repr=False, default_factory=list)
    # combinations of original rows that vanish: consistency conditions for solve
    null_combinations: List[Vector] = field(repr=False, default_factory=list)

    def solve(self, b: Mapping[int, object]) -> Optional[Vector]:
        """Some x with M x = b, or None when b is not in the image"""
        b = {i: Fraction(v) for i, v in b.items() if v}
        for combo in self.null_combinations:
            if sum((c * b[i] for i, c in combo.items() if i in b), Fraction(0)):
                return None
        x: Vector = {}
        for pc, _, combo in self.pivot_rows:
            value = sum((c * b[i] for i, c in combo.items() if i in b), Fraction(0))
            if value:
                x[pc] = value
        return x

    @property
    def solver(self):
        return self.solve

    def in_image(self, b: Mapping[int, object]) -> bool:
        return self.solve(b) is not None

    def reduce_vector(self, v: Mapping[int, object]) -> Vector:
        """Normal form of v modulo the row space: pivot-column entries removed"""
        out = {i: Fraction(x) for i, x in v.items() if x}
        for pc, row, _ in self.pivot_rows:
            f = out.get(pc)
            if f:
                _axpy(out, row, -f)
        return out

    @property
    def nullity(self) -> int:
        return self.n_cols - self.rank


def _pivot_key(value: Fraction) -> int:
    return abs(value.numerator * value.denominator)


def _eliminate_sparse(rows: List[Vector], policy: PivotPolicy):
    work = [(dict(row), {i: Fraction(1)}) for i, row in enumerate(rows)]
    null = [combo for row, combo in work if not row]
    work = [item for item in work if item[0]]
    pivots: List[Tuple[int, Vector, Vector]] = []
    while work:
        if policy is PivotPolicy.SMALLEST_ENTRY:
            best = None
            for ri, (row, _) in enumerate(work):
                for c, v in row.items():
                    key = (_pivot_key(v), c, ri)
                    if best is None or key < best:
                        best = key
            _, pc, pri = best
        else:
            pc = min(min(row) for row, _ in work)
            pri = next(ri for ri, (row, _) in enumerate(work) if pc in row)
        row, combo = work.pop(pri)
        inv = 1 / row[pc]
        row = {c: v * inv for c, v in row.items()}
        combo = {i: v * inv for i, v in combo.items()}
        remaining = []
        for other, other_combo in work:
            f = other.get(pc)
            if f:
                _axpy(other, row, -f)
                _axpy(other_combo, combo, -f)
            if other:
                remaining.append((other, other_combo))
            else:
                null.append(other_combo)
        work = remaining
        for _, prow, pcombo in pivots:
            f = prow.get(pc)
            if f:
                _axpy(prow, row, -f)
                _axpy(pcombo, combo, -f)
        pivots.append((pc, row, combo))
    return pivots, null


def _eliminate_dense(rows: List[Vector], n_cols: int, policy: PivotPolicy):
    n_rows = len(rows)
    mat = [[row.get(c, Fraction(0)) for c in range(n_cols)] for row in rows]
    comb = [[Fraction(1) if i == j else Fraction(0) for j in range(n_rows)] for i in range(n_rows)]
    active = [i for i in range(n_rows) if any(mat[i])]
    null_idx = [i for i in range(n_rows) if not any(mat[i])]
    pivots: List[Tuple[int, int]] = []
    while active:
        if policy is PivotPolicy.SMALLEST_ENTRY:
            best = None
            for pos, ri in enumerate(active):
                for c in range(n_cols):
                    v = mat[ri][c]
                    if v:
                        key = (_pivot_key(v), c, pos)
                        if best is None or key < best:
                            best = key
            _, pc, pos = best
        else:
            pc = min(c for ri in active for c in range(n_cols) if mat[ri][c])
            pos = next(p for p, ri in enumerate(active) if mat[ri][pc])
        pr = active.pop(pos)
        inv = 1 / mat[pr][pc]
        mat[pr] = [v * inv for v in mat[pr]]
        comb[pr] = [v * inv for v in comb[pr]]
        remaining = []
        for ri in active:
            f = mat[ri][pc]
            if f:
                mat[ri] = [a - f * b for a, b in zip(mat[ri], mat[pr])]
                comb[ri] = [a - f * b for a, b in zip(comb[ri], comb[pr])]
            if any(mat[ri]):
                remaining.append(ri)
            else:
                null_idx.append(ri)
        active = remaining
        for _, qr in pivots:
            f = mat[qr][pc]
            if f:
                mat[qr] = [a - f * b for a, b in zip(mat[qr], mat[pr])]
                comb[qr] = [a - f * b for a, b in zip(comb[qr], comb[pr])]
        pivots.append((pc, pr))

    def sparse(values):
        return {i: v for i, v in enumerate(values) if v}

    pivot_rows = [(pc, sparse(mat[pr]), sparse(comb[pr])) for pc, pr in pivots]
    null = [sparse(comb[i]) for i in null_idx]
    return pivot_rows, null


def reduce(M: SparseRationalMatrix, policy: PivotPolicy = PivotPolicy.SMALLEST_ENTRY,
           fill_threshold: float = DEFAULT_FILL_THRESHOLD) -> Reduction:
    """Exact rank, kernel basis, image pivot columns and solver of M"""
    rows = M.rows()
    if M.n_rows and M.n_cols and M.fill > fill_threshold:
        pivots, null = _eliminate_dense(rows, M.n_cols, policy)
    else:
        pivots, null = _eliminate_sparse(rows, policy)
    pivots.sort(key=lambda item: item[0])
    pivot_cols = [pc for pc, _, _ in pivots]
    pivot_set = set(pivot_cols)
    kernel: List[Vector] = []
    for free in range(M.n_cols):
        if free in pivot_set:
            continue
        v: Vector = {free: Fraction(1)}
        for pc, row, _ in pivots:
            val = row.get(free)
            if val:
                v[pc] = -val
        kernel.append(v)
    return Reduction(
        n_rows=M.n_rows,
        n_cols=M.n_cols,
        rank=len(pivots),
        kernel_basis=kernel,
        image_pivot_columns=pivot_cols,
        pivot_rows=pivots,
        null_combinations=null,
    )


def rank(M: SparseRationalMatrix, policy: PivotPolicy = PivotPolicy.SMALLEST_ENTRY) -> int:
    return reduce(M, policy).rank


def rank_of_vectors(vectors: Iterable[Mapping[int, object]], dim: int) -> int:
    return reduce(SparseRationalMatrix.from_rows(dim, list(vectors))).rank


def memory_budget_mb(configured: Optional[float] = None) -> Optional[float]:
    """Budget in MB: environment override first, then the configured value"""
    env = os.environ.get(MEMORY_BUDGET_ENV)
    if env:
        try:
            return float(env)
        except ValueError:
            logger.warning(f"Ignoring non-numeric {MEMORY_BUDGET_ENV}={env!r}")
    return configured


def ensure_within_budget(estimated_entries: int, label: str, budget_mb: Optional[float] = None) -> None:
    budget = memory_budget_mb(budget_mb)
    if budget is None:
        return
    estimated_mb = estimated_entries * BYTES_PER_ENTRY / (1024 * 1024)
    if estimated_mb > budget:
        raise ResourceError(
            f"{label}: estimated {estimated_mb:.1f} MB exceeds the memory budget of {budget:.0f} MB"
        )
