import random
from fractions import Fraction

import pytest

from src.core.linalg import SparseRationalMatrix, ensure_within_budget, memory_budget_mb, rank, reduce
from src.core.utils.errors import ResourceError
from src.core.utils.types import PivotPolicy


def _random_matrix(rng: random.Random, n_rows: int, n_cols: int, density: float) -> SparseRationalMatrix:
    entries = {}
    for r in range(n_rows):
        for c in range(n_cols):
            if rng.random() < density:
                entries[(r, c)] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return SparseRationalMatrix(n_rows, n_cols, entries)


def test_identity_has_full_rank_and_no_kernel() -> None:
    red = reduce(SparseRationalMatrix.identity(3))
    assert red.rank == 3
    assert red.kernel_basis == []


def test_zero_matrix_kernel_is_everything() -> None:
    red = reduce(SparseRationalMatrix.zero(2, 5))
    assert red.rank == 0
    assert len(red.kernel_basis) == 5


def test_proportional_rows() -> None:
    M = SparseRationalMatrix.from_dense([[1, 2], [2, 4]])
    red = reduce(M)
    assert red.rank == 1
    (v,) = red.kernel_basis
    assert M.matvec(v) == {}
    assert v.get(0, 0) == -2 * v.get(1, 0)


def test_no_zeros_are_stored() -> None:
    M = SparseRationalMatrix.from_dense([[0, 1], [0, 0]])
    assert M.nnz == 1


@pytest.mark.parametrize("policy", list(PivotPolicy))
def test_rank_nullity_and_kernel_on_random_matrices(policy: PivotPolicy) -> None:
    rng = random.Random(3)
    for _ in range(200):
        M = _random_matrix(rng, rng.randint(0, 7), rng.randint(0, 7), rng.choice((0.2, 0.5, 0.9)))
        red = reduce(M, policy)
        assert red.rank + len(red.kernel_basis) == M.n_cols
        for v in red.kernel_basis:
            assert M.matvec(v) == {}


def test_dense_and_sparse_paths_agree() -> None:
    rng = random.Random(5)
    for _ in range(200):
        M = _random_matrix(rng, 6, 6, 0.6)
        sparse = reduce(M, fill_threshold=1.0)
        dense = reduce(M, fill_threshold=0.0)
        assert sparse.rank == dense.rank


def test_policies_agree_on_rank() -> None:
    rng = random.Random(9)
    for _ in range(200):
        M = _random_matrix(rng, 5, 6, 0.5)
        assert rank(M, PivotPolicy.SMALLEST_ENTRY) == rank(M, PivotPolicy.FIRST_NONZERO)


def test_solver_finds_preimages_and_reports_inconsistency() -> None:
    rng = random.Random(21)
    for _ in range(200):
        M = _random_matrix(rng, 5, 4, 0.5)
        red = reduce(M)
        x = {c: Fraction(rng.randint(-3, 3)) for c in range(M.n_cols)}
        b = M.matvec(x)
        solution = red.solve(b)
        assert solution is not None
        assert M.matvec(solution) == b
    M = SparseRationalMatrix.from_dense([[1, 0], [0, 0]])
    assert reduce(M).solve({1: 1}) is None


def test_matrix_product_and_transpose() -> None:
    A = SparseRationalMatrix.from_dense([[1, 2], [0, 1]])
    B = SparseRationalMatrix.from_dense([[0, 1], [1, 0]])
    assert (A @ B).to_dense() == [[2, 1], [1, 0]]
    assert A.transpose().to_dense() == [[1, 0], [2, 1]]


def test_memory_budget_environment_override(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("DREP_MAX_MB", "1")
    assert memory_budget_mb(512) == 1.0
    with pytest.raises(ResourceError):
        ensure_within_budget(10_000_000, "test block")
    monkeypatch.delenv("DREP_MAX_MB")
    assert memory_budget_mb(None) is None
    ensure_within_budget(10_000_000, "test block")
