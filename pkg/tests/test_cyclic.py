from fractions import Fraction

import pytest
import sympy

from src.core.linalg import SparseRationalMatrix, rank
from src.core.stages.cyclic import (
    CyclicComplex, FinDimAlgebra, boundary_maps, commutator_quotient_dim, cyclic_reduce, hc_dims, hh_dims,
    norm_check,
)
from src.core.utils.errors import PresentationError, ResourceError
from src.oracles import averaging_projector, oracle_cyclic_invariants, to_sympy


def test_cyclic_homology_of_the_ground_field() -> None:
    hc = hc_dims(FinDimAlgebra.ground_field(), 6)
    assert hc.dims == [1, 0, 1, 0, 1, 0, 1]
    assert hc.reduced_dims == [0] * 7


def test_hochschild_homology_of_the_ground_field() -> None:
    assert hh_dims(FinDimAlgebra.ground_field(), 4).dims == [1, 0, 0, 0, 0]


def test_matrix_algebra_is_morita_equivalent_to_the_field() -> None:
    m2 = FinDimAlgebra.matrix_algebra(2)
    assert m2.dim == 4
    assert hh_dims(m2, 2).dims == [1, 0, 0]
    assert hc_dims(m2, 2).dims == [1, 0, 1]


def test_cyclic_words_equal_to_minus_themselves_vanish() -> None:
    assert cyclic_reduce((0, 0), 1)[1] == 0
    assert cyclic_reduce((0, 0, 0), 2) == ((0, 0, 0), 1)
    assert cyclic_reduce((1, 0), 1) == ((0, 1), -1)
    with pytest.raises(ValueError):
        cyclic_reduce((0, 1), 2)


def test_norm_map_on_dual_numbers() -> None:
    report = norm_check(FinDimAlgebra.dual_numbers(), 5)
    assert report.passed
    assert [report.cc_dims[n] for n in range(1, 6)] == [2, 1, 4, 4, 8]
    assert report.image_ranks == report.cc_dims
    assert report.to_dict()["degrees"][3]["same_subspace"]


@pytest.mark.parametrize("factory", [FinDimAlgebra.product_kk, FinDimAlgebra.ground_field])
def test_norm_map_on_other_algebras(factory) -> None:
    assert norm_check(factory(), 4).passed


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_norm_image_is_the_invariant_subspace(n: int) -> None:
    A = FinDimAlgebra.dual_numbers()
    N = to_sympy(CyclicComplex(A).norm(n).to_dense())
    oracle = oracle_cyclic_invariants(A, n)
    P = oracle.witness
    assert N.rank() == oracle.value
    assert N.row_join(P).rank() == oracle.value


def test_projectors_agree_with_the_oracle() -> None:
    A = FinDimAlgebra.product_kk()
    for n in (2, 3):
        ours = to_sympy(CyclicComplex(A).averaging_projector(n).to_dense())
        assert ours.rank() == averaging_projector(A.dim, n).rank()
        assert ours * ours == ours


def test_one_minus_t_is_killed_by_the_norm() -> None:
    A = FinDimAlgebra.dual_numbers()
    cc = CyclicComplex(A)
    for n in (2, 3, 4):
        N = cc.norm(n)
        assert ((SparseRationalMatrix.identity(N.n_rows) - cc.signed_rotation(n)) @ N).is_zero()


def test_graded_totals_match_ungraded() -> None:
    A = FinDimAlgebra.dual_numbers()
    graded = hc_dims(A, 3, w_max=5)
    assert graded.dims == hc_dims(A, 3).dims
    assert sum(d for (n, _), d in graded.by_weight.items() if n == 2) == graded.dims[2]


def test_threaded_graded_dims_are_deterministic() -> None:
    A = FinDimAlgebra.truncated_polynomial(["x"], 2)
    serial = hh_dims(A, 2, w_max=4, threads=1)
    threaded = hh_dims(A, 2, w_max=4, threads=3)
    assert serial.by_weight == threaded.by_weight


def test_commutator_quotients() -> None:
    assert commutator_quotient_dim(FinDimAlgebra.matrix_algebra(2)) == 1
    assert commutator_quotient_dim(FinDimAlgebra.dual_numbers()) == 2
    assert commutator_quotient_dim(FinDimAlgebra.product_kk()) == 2
    assert hh_dims(FinDimAlgebra.matrix_algebra(2), 0).dims == [1]


def test_rank_of_the_cyclic_boundary() -> None:
    cc = CyclicComplex(FinDimAlgebra.ground_field())
    assert rank(cc.b(1)) == 0
    assert cc.basis(1) == []
    assert cc.basis(2) == [(0, 0, 0)]


def test_invalid_structure_constants() -> None:
    with pytest.raises(PresentationError):
        FinDimAlgebra(["1"], {}, unit=3)
    with pytest.raises(ValueError):
        FinDimAlgebra.matrix_algebra(0)


def test_to_sympy_keeps_fractions_exact() -> None:
    M = to_sympy([[Fraction(1, 3), 0], [0, 1]])
    assert M[0, 0] == sympy.Rational(1, 3)


@pytest.mark.parametrize("n", [2, 3])
def test_boundaries_square_to_zero(n: int) -> None:
    A = FinDimAlgebra.dual_numbers()
    upper, lower = boundary_maps(A, n), boundary_maps(A, n - 1)
    assert (lower.b_prime @ upper.b_prime).is_zero()
    assert (lower.b @ upper.b).is_zero()
    assert upper.b.shape == (len(upper.cyclic_target), len(upper.cyclic_source))


def test_boundary_maps_need_positive_degree() -> None:
    with pytest.raises(ValueError):
        boundary_maps(FinDimAlgebra.ground_field(), 0)


def test_cyclic_complexes_respect_the_memory_budget(monkeypatch: pytest.MonkeyPatch) -> None:
    A = FinDimAlgebra.dual_numbers()
    with pytest.raises(ResourceError):
        hc_dims(A, 4, budget_mb=0.000001)
    with pytest.raises(ResourceError):
        hh_dims(A, 4, budget_mb=0.000001)
    with pytest.raises(ResourceError):
        norm_check(A, 4, budget_mb=0.000001)
    assert hc_dims(A, 4, budget_mb=64).dims == hc_dims(A, 4).dims
    monkeypatch.setenv("DREP_MAX_MB", "0.000001")
    with pytest.raises(ResourceError):
        hc_dims(A, 4)


def test_budget_scales_with_degree() -> None:
    A = FinDimAlgebra.matrix_algebra(2)
    # CC_n holds 4^(n+1) words: 16 fit in 0.01 MB, 4^7 do not
    assert hc_dims(A, 0, budget_mb=0.01).dims == [1]
    with pytest.raises(ResourceError):
        hc_dims(A, 5, budget_mb=0.01)
