import json

import pytest

from src.core.algebra import CommPoly
from src.core.stages.homology import (
    BlockHomology, block_basis, differential_matrix, homology_dims, homology_representatives, is_boundary,
)
from src.core.stages.representation import RepresentationFunctor
from src.core.utils.errors import PresentationError
from src.core.utils.types import CellStatus
from src.oracles import enumerate_block, oracle_homology_by_enumeration


def _rv(pf, d: int):
    return RepresentationFunctor(pf.resolution, d).abelianized


def test_commuting_variety_at_dimension_one(ex2d) -> None:
    RV = _rv(ex2d, 1)
    table = homology_dims(RV, 3, 8)
    for w in range(9):
        assert table.dim(0, w) == w + 1
        assert table.dim(1, w) == max(w - 1, 0)
        assert table.dim(2, w) == 0
        assert table.dim(3, w) == 0
    assert all(status is CellStatus.EXACT for status in table.status.values())


def test_dimension_one_agrees_with_enumeration(ex2d) -> None:
    RV = _rv(ex2d, 1)
    blocks = BlockHomology(RV)
    for n in range(3):
        for w in range(7):
            assert blocks.cell(n, w) == oracle_homology_by_enumeration(RV, n, w).value


def test_block_bases_agree_with_enumeration(ex2d) -> None:
    RV = _rv(ex2d, 2)
    for n, w in [(0, 2), (1, 2), (1, 3), (2, 4)]:
        assert sorted(block_basis(RV, n, w).basis) == sorted(enumerate_block(RV, n, w))


def test_commuting_matrices_at_dimension_two(ex2d) -> None:
    RV = _rv(ex2d, 2)
    blocks = BlockHomology(RV)
    for w in range(4):
        assert blocks.cell(0, w) == oracle_homology_by_enumeration(RV, 0, w).value
    assert blocks.cell(1, 2) == 1
    (rep,) = blocks.representatives(1, 2)
    (coeff,) = set(rep.values())
    trace_of_t = CommPoly.generator(RV.alphabet, "t_1_1") + CommPoly.generator(RV.alphabet, "t_2_2")
    assert rep.scaled(1 / coeff) == trace_of_t


def test_lie_algebra_reweighted_is_polynomial_in_one_class(ex3d, golden_path) -> None:
    RV = _rv(ex3d, 1)
    RV = RV.reweighted({g.name: 1 for g in RV.generators})
    table = BlockHomology(RV).homology_dims(4, 4)
    expected = json.loads(golden_path("ex3d_d1_homology.json").read_text(encoding="utf-8"))
    assert [table.by_degree(n) for n in range(5)] == expected["dims"]


def test_weight_decreasing_differential_needs_slack(ex3d) -> None:
    RV = _rv(ex3d, 1)
    blocks = BlockHomology(RV)
    assert blocks.needs_slack(0)
    table = blocks.homology_dims(1, 2, slack_cap=3)
    assert table.status[(0, 1)] is not CellStatus.EXACT


def test_boundary_search_respects_slack(ex3d) -> None:
    RV = _rv(ex3d, 1)
    x = CommPoly.generator(RV.alphabet, "x_1_1")
    assert not is_boundary(RV, x, slack=0)
    result = is_boundary(RV, x, slack=1)
    assert result
    assert RV.d(result.witness) == x


def test_trace_of_top_generator_is_not_a_boundary(ex3d) -> None:
    RV = _rv(ex3d, 2)
    trace_T = CommPoly.generator(RV.alphabet, "T_1_1") + CommPoly.generator(RV.alphabet, "T_2_2")
    assert RV.d(trace_T).is_zero()
    result = is_boundary(RV, trace_T, slack=2)
    assert not result
    assert result.certificate["n"] == 2


def test_zero_and_inhomogeneous_elements(ex2d) -> None:
    RV = _rv(ex2d, 1)
    assert is_boundary(RV, CommPoly(RV.alphabet))
    mixed = CommPoly.generator(RV.alphabet, "x_1_1") + CommPoly.generator(RV.alphabet, "t_1_1")
    with pytest.raises(PresentationError):
        is_boundary(RV, mixed)


def test_euler_characteristic_matches_homology(ex2d) -> None:
    RV = _rv(ex2d, 1)
    blocks = BlockHomology(RV)
    table = blocks.homology_dims(4, 6)
    for w in range(7):
        alternating = sum((-1) ** n * table.dim(n, w) for n in range(5))
        assert blocks.euler_characteristic(w) == alternating


def test_threaded_fill_matches_serial(ex2d) -> None:
    RV = _rv(ex2d, 2)
    serial = BlockHomology(RV).homology_dims(2, 4, threads=1)
    threaded = BlockHomology(RV).homology_dims(2, 4, threads=4)
    assert serial.dims == threaded.dims
    assert serial.csv_rows() == threaded.csv_rows()


def test_table_rendering(ex2d) -> None:
    table = homology_dims(_rv(ex2d, 1), 1, 3)
    assert table.csv_rows()[0] == (0, 0, 1, True, 0)
    assert table.to_dict()["cells"][-1] == {"n": 1, "w": 3, "dim": 2, "valid": True, "slack": 0}
    assert str(table).splitlines()[2].startswith("H0")


def test_differential_matrix_and_representatives_at_dimension_one(ex2d) -> None:
    RV = _rv(ex2d, 1)
    # t_1_1 is a cycle at d = 1
    M = differential_matrix(RV, 1, 2)
    assert M.shape == (3, 1)
    assert M.is_zero()
    (rep,) = homology_representatives(RV, 1, 2)
    (coeff,) = set(rep.values())
    assert rep.scaled(1 / coeff) == CommPoly.generator(RV.alphabet, "t_1_1")
    assert differential_matrix(RV, 0, 2).shape == (0, 3)
