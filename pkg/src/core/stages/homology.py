"""Stage 3: Block-Truncated Homology"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..algebra.polynomials import (
    CommMonomial, CommPoly, NCPoly, Poly, is_homogeneous, monomial_key, term_homdeg, term_weight,
)
from ..algebra.presentation import DGPresentation, apply_d
from ..linalg.sparse_matrix import (
    Reduction, SparseRationalMatrix, Vector, ensure_within_budget, reduce,
)
from ..utils.errors import PresentationError
from ..utils.types import CellStatus, Flavor, PivotPolicy

logger = logging.getLogger(__name__)


@dataclass
class ChainBlock:
    """Ordered monomial basis of the (homdeg n, weight w) slice of a presentation"""
    n: int
    w: int
    basis: List[object]
    index: Dict[object, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.index = {m: i for i, m in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return len(self.basis)

    def __contains__(self, monomial) -> bool:
        return monomial in self.index


@dataclass
class HomologyTable:
    """Homology dimensions per (n, w) with validity and slack bookkeeping"""
    n_max: int
    w_max: int
    dims: Dict[Tuple[int, int], int] = field(default_factory=dict)
    status: Dict[Tuple[int, int], CellStatus] = field(default_factory=dict)
    slack: Dict[Tuple[int, int], int] = field(default_factory=dict)
    reasons: Dict[Tuple[int, int], str] = field(default_factory=dict)

    def dim(self, n: int, w: int) -> int:
        return self.dims.get((n, w), 0)

    def valid(self, n: int, w: int) -> bool:
        return self.status.get((n, w), CellStatus.EXACT) is not CellStatus.INVALID

    def column_valid(self, w: int) -> bool:
        """All cells at weight w valid at slack 0"""
        return all(self.status.get((n, w)) is CellStatus.EXACT for n in range(self.n_max + 1))

    def by_degree(self, n: int) -> List[int]:
        return [self.dim(n, w) for w in range(self.w_max + 1)]

    def total(self, n: int) -> int:
        return sum(self.by_degree(n))

    def csv_rows(self) -> List[Tuple[int, int, int, bool, int]]:
        return [
            (n, w, self.dim(n, w), self.valid(n, w), self.slack.get((n, w), 0))
            for n in range(self.n_max + 1) for w in range(self.w_max + 1)
        ]

    def to_dict(self) -> Dict:
        return {
            'n_max': self.n_max,
            'w_max': self.w_max,
            'cells': [
                {'n': n, 'w': w, 'dim': d, 'valid': v, 'slack': s}
                for n, w, d, v, s in self.csv_rows()
            ],
            'invalid': {f"{n},{w}": r for (n, w), r in self.reasons.items()},
        }

    def __str__(self) -> str:
        header = "n\\w " + " ".join(f"{w:>5}" for w in range(self.w_max + 1))
        lines = [header, "-" * len(header)]
        for n in range(self.n_max + 1):
            cells = []
            for w in range(self.w_max + 1):
                mark = "" if self.status.get((n, w), CellStatus.EXACT) is CellStatus.EXACT else (
                    "*" if self.valid(n, w) else "!")
                cells.append(f"{str(self.dim(n, w)) + mark:>5}")
            lines.append(f"H{n:<2} " + " ".join(cells))
        if any(s is not CellStatus.EXACT for s in self.status.values()):
            lines.append("(* stabilized with slack, ! invalid)")
        return "\n".join(lines)


@dataclass
class BoundaryResult:
    """Outcome of is_boundary: a witness preimage or a rank certificate"""
    is_boundary: bool
    slack: int
    witness: Optional[Poly] = None
    certificate: Dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.is_boundary


class BlockHomology:
    """
    Cached block bases and differential matrices of one presentation.

    Blocks (n, w) are independent; homology_dims fills them concurrently.
    """

    def __init__(self, P: DGPresentation, pivot_policy: PivotPolicy = PivotPolicy.SMALLEST_ENTRY,
                 fill_threshold: float = 0.30, memory_budget_mb: Optional[float] = None):
        self.P = P
        self.pivot_policy = pivot_policy
        self.fill_threshold = fill_threshold
        self.memory_budget_mb = memory_budget_mb
        self._blocks: Dict[Tuple[int, int], ChainBlock] = {}
        self._d_cache: Dict[object, Poly] = {}
        self._lock = threading.Lock()
        profile = P.weight_profile()
        drops = [P.alphabet.weight(g) - lo for g, (lo, _) in profile.items()]
        self.max_drop = max([0] + drops)
        self.decreasing = P.weight_decreasing_generators()

    # --- bases ------------------------------------------------------------------

    def block(self, n: int, w: int) -> ChainBlock:
        key = (n, w)
        with self._lock:
            cached = self._blocks.get(key)
        if cached is not None:
            return cached
        if n < 0 or w < 0:
            block = ChainBlock(n, w, [])
        elif self.P.flavor is Flavor.NONCOMMUTATIVE:
            block = ChainBlock(n, w, self._nc_words(n, w))
        else:
            block = ChainBlock(n, w, self._comm_monomials(n, w))
        with self._lock:
            self._blocks[key] = block
        return block

    def _nc_words(self, n: int, w: int) -> List[tuple]:
        gens = [(g.name, g.homdeg, g.weight) for g in self.P.generators]
        memo: Dict[Tuple[int, int], List[tuple]] = {}

        def words(deg: int, wt: int) -> List[tuple]:
            if (deg, wt) in memo:
                return memo[(deg, wt)]
            out = [()] if deg == 0 and wt == 0 else []
            for name, gd, gw in gens:
                if gd <= deg and gw <= wt:
                    out.extend((name,) + rest for rest in words(deg - gd, wt - gw))
            memo[(deg, wt)] = out
            return out

        alphabet = self.P.alphabet
        return sorted(set(words(n, w)), key=alphabet.word_key)

    def _comm_monomials(self, n: int, w: int) -> List[CommMonomial]:
        gens = list(self.P.generators)
        alphabet = self.P.alphabet
        found: List[CommMonomial] = []

        def walk(pos: int, deg: int, wt: int, evens: list, odds: list) -> None:
            if wt == 0 and deg == 0:
                found.append(CommMonomial(tuple(evens), tuple(odds)))
                return
            if pos == len(gens):
                return
            g = gens[pos]
            max_exp = 1 if g.is_odd else wt // g.weight
            for e in range(0, max_exp + 1):
                if e * g.homdeg > deg or e * g.weight > wt:
                    break
                if e == 0:
                    walk(pos + 1, deg, wt, evens, odds)
                elif g.is_odd:
                    walk(pos + 1, deg - g.homdeg, wt - g.weight, evens, odds + [g.name])
                else:
                    walk(pos + 1, deg - e * g.homdeg, wt - e * g.weight, evens + [(g.name, e)], odds)

        walk(0, n, w, [], [])
        return sorted(found, key=lambda m: monomial_key(m, alphabet))

    def monomial_poly(self, monomial) -> Poly:
        if self.P.flavor is Flavor.NONCOMMUTATIVE:
            return NCPoly({monomial: 1})
        return CommPoly(self.P.alphabet, {monomial: 1})

    def d_monomial(self, monomial) -> Poly:
        with self._lock:
            cached = self._d_cache.get(monomial)
        if cached is None:
            cached = apply_d(self.P, self.monomial_poly(monomial))
            with self._lock:
                self._d_cache[monomial] = cached
        return cached

    # --- matrices -----------------------------------------------------------------

    def _stacked(self, n: int, weights: Sequence[int]) -> Tuple[List[object], Dict[object, int]]:
        basis: List[object] = []
        for wt in weights:
            basis.extend(self.block(n, wt).basis)
        return basis, {m: i for i, m in enumerate(basis)}

    def differential_matrix(self, n: int, w: int, s: int = 0) -> SparseRationalMatrix:
        """d from blocks (n, w') with w-s <= w' <= w into degree n-1, restricted to weights <= w"""
        sources, _ = self._stacked(n, range(max(w - s, 0), w + 1))
        if n == 0:
            return SparseRationalMatrix.zero(0, len(sources))
        lo = max(w - s - self.max_drop, 0)
        targets, target_index = self._stacked(n - 1, range(lo, w + 1))
        ensure_within_budget(len(sources) * 8 + len(targets), f"d_{n} at weight {w}", self.memory_budget_mb)
        columns = []
        for m in sources:
            image = self.d_monomial(m)
            columns.append({target_index[k]: c for k, c in image.items() if k in target_index})
        return SparseRationalMatrix.from_columns(len(targets), columns)

    def _reduce(self, M: SparseRationalMatrix) -> Reduction:
        return reduce(M, self.pivot_policy, self.fill_threshold)

    def _image_in_block(self, n: int, w: int, s: int) -> List[Vector]:
        """Weight-w components of d over sources (n+1, w') for w <= w' <= w+s"""
        target = self.block(n, w)
        vectors = []
        for wt in range(w, w + s + 1):
            for m in self.block(n + 1, wt).basis:
                image = self.d_monomial(m)
                vec = {target.index[k]: c for k, c in image.items() if k in target.index}
                if vec:
                    vectors.append(vec)
        return vectors

    def cycles(self, n: int, w: int) -> List[Vector]:
        return self._reduce(self.differential_matrix(n, w, 0)).kernel_basis

    def cell(self, n: int, w: int, s: int = 0) -> int:
        """dim ker(d_n on block (n, w)) - rank of the weight-w part of d_{n+1} from weights w..w+s"""
        kernel_dim = self._reduce(self.differential_matrix(n, w, 0)).nullity
        image = self._image_in_block(n, w, s)
        image_rank = self._reduce(SparseRationalMatrix.from_rows(self.block(n, w).dim, image)).rank if image else 0
        return kernel_dim - image_rank

    def needs_slack(self, n: int) -> bool:
        return any(self.P.alphabet.homdeg(g) <= n + 1 for g in self.decreasing)

    def _fill_cell(self, n: int, w: int, slack_cap: int):
        if not self.needs_slack(n):
            return n, w, self.cell(n, w, 0), CellStatus.EXACT, 0, None
        previous = self.cell(n, w, 0)
        for s in range(1, slack_cap + 1):
            current = self.cell(n, w, s)
            if current == previous:
                if current < 0:
                    return n, w, 0, CellStatus.INVALID, s, f"negative dimension {current} at slack {s}"
                return n, w, current, CellStatus.STABILIZED, s, None
            previous = current
        return n, w, max(previous, 0), CellStatus.INVALID, slack_cap, f"no stabilization up to slack {slack_cap}"

    def homology_dims(self, n_max: int, w_max: int, slack_cap: int = 4, threads: int = 1) -> HomologyTable:
        table = HomologyTable(n_max, w_max)
        cells = [(n, w) for n in range(n_max + 1) for w in range(w_max + 1)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda nw: self._fill_cell(nw[0], nw[1], slack_cap), cells))
        else:
            results = [self._fill_cell(n, w, slack_cap) for n, w in cells]
        for n, w, dim, status, s, reason in results:
            table.dims[(n, w)] = dim
            table.status[(n, w)] = status
            table.slack[(n, w)] = s
            if reason:
                table.reasons[(n, w)] = reason
        flagged = [k for k, v in table.status.items() if v is not CellStatus.EXACT]
        if flagged:
            logger.warning(f"⚠ {len(flagged)} homology cells required slack (differential lowers weight)")
        return table

    # --- classes ------------------------------------------------------------------

    def vector_to_poly(self, n: int, w: int, vec: Vector) -> Poly:
        block = self.block(n, w)
        return self._from_terms({block.basis[i]: c for i, c in vec.items()})

    def _from_terms(self, terms: Dict[object, Fraction]) -> Poly:
        if self.P.flavor is Flavor.NONCOMMUTATIVE:
            return NCPoly(terms)
        return CommPoly(self.P.alphabet, terms)

    def representatives(self, n: int, w: int, s: int = 0) -> List[Poly]:
        """Kernel basis vectors not in the image span, in pivot order"""
        dim = self.block(n, w).dim
        chosen: List[Vector] = list(self._image_in_block(n, w, s))
        current = self._reduce(SparseRationalMatrix.from_rows(dim, chosen)).rank if chosen else 0
        reps = []
        for vec in self.cycles(n, w):
            trial = self._reduce(SparseRationalMatrix.from_rows(dim, chosen + [vec])).rank
            if trial > current:
                chosen.append(vec)
                current = trial
                reps.append(self.vector_to_poly(n, w, vec))
        return reps

    def is_boundary(self, element: Poly, slack: int = 0) -> BoundaryResult:
        """Exact preimage under d from weights <= w + slack, or a rank certificate"""
        element = self.P.coerce(element)
        alphabet = self.P.alphabet
        if not element:
            return BoundaryResult(True, slack, witness=self.P.zero(), certificate={'reason': 'zero element'})
        if not is_homogeneous(element, alphabet):
            raise PresentationError("is_boundary needs an element homogeneous in (degree, weight)")
        key = next(iter(element))
        n, w = term_homdeg(key, alphabet), term_weight(key, alphabet)
        sources, _ = self._stacked(n + 1, range(0, w + slack + 1))
        rows: Dict[object, int] = {}
        columns = []
        for m in sources:
            column = {}
            for k, c in self.d_monomial(m).items():
                column[rows.setdefault(k, len(rows))] = c
            columns.append(column)
        target = {rows.setdefault(k, len(rows)): c for k, c in element.items()}
        M = SparseRationalMatrix.from_columns(len(rows), columns)
        red = self._reduce(M)
        x = red.solve(target)
        certificate = {'n': n, 'w': w, 'sources': len(sources), 'rank': red.rank}
        if x is None:
            return BoundaryResult(False, slack, certificate=certificate)
        witness = self._from_terms({sources[i]: c for i, c in x.items()})
        return BoundaryResult(True, slack, witness=witness, certificate=certificate)

    def euler_characteristic(self, w: int, n_top: Optional[int] = None) -> int:
        n_top = self.top_degree(w) if n_top is None else n_top
        return sum((-1) ** n * self.block(n, w).dim for n in range(n_top + 1))

    def top_degree(self, w: int) -> int:
        """Largest n with a possibly nonempty block at weight w"""
        ratios = [Fraction(g.homdeg, g.weight) for g in self.P.generators]
        return int(max(ratios, default=0) * w)


def block_basis(P: DGPresentation, n: int, w: int) -> ChainBlock:
    return BlockHomology(P).block(n, w)


def differential_matrix(P: DGPresentation, n: int, w: int, s: int = 0) -> SparseRationalMatrix:
    return BlockHomology(P).differential_matrix(n, w, s)


def homology_dims(P: DGPresentation, n_max: int, w_max: int, slack: int = 4, threads: int = 1) -> HomologyTable:
    return BlockHomology(P).homology_dims(n_max, w_max, slack, threads)


def is_boundary(P: DGPresentation, element: Poly, slack: int = 0) -> BoundaryResult:
    return BlockHomology(P).is_boundary(element, slack)


def homology_representatives(P: DGPresentation, n: int, w: int, s: int = 0) -> List[Poly]:
    return BlockHomology(P).representatives(n, w, s)
