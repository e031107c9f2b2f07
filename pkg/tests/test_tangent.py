import pytest

from src.core.stages.representation import (
    RepresentationFunctor, RepresentationPoint, load_representation_point, validate_point,
)
from src.core.stages.tangent import TangentBuilder, tangent_complex
from src.core.utils.errors import PresentationError, RepresentationError
from src.oracles import oracle_hochschild_cochains


@pytest.mark.parametrize("d", [1, 2, 3])
def test_free_algebra_has_only_degree_zero_derivations(kx, d: int) -> None:
    point = RepresentationPoint.zero(kx.algebra, d)
    complex_ = tangent_complex(kx.algebra, kx.resolution, d, point)
    assert complex_.dims == [d * d, 0]


def test_commuting_variety_at_a_generic_point(ex2d, example_path) -> None:
    point = load_representation_point(example_path("kxy_d1.rep").read_text(encoding="utf-8"), ex2d.algebra, 1)
    complex_ = tangent_complex(ex2d.algebra, ex2d.resolution, 1, point)
    assert complex_.dims == [2, 1, 0]
    assert complex_.cochain_dims == [2, 1, 0]
    oracle = oracle_hochschild_cochains(ex2d.algebra, point, 3, 4).value
    assert oracle == [1, 2, 1, 0]
    assert oracle[1:] == complex_.dims


def test_commuting_variety_at_the_zero_point(ex2d, example_path) -> None:
    point = load_representation_point(example_path("kxy_zero_d2.rep").read_text(encoding="utf-8"), ex2d.algebra, 2)
    complex_ = tangent_complex(ex2d.algebra, ex2d.resolution, 2, point)
    assert complex_.dims == [8, 4, 0]
    assert complex_.to_dict() == {"d": 2, "cochain_dims": [8, 4, 0], "homology_dims": [8, 4, 0]}


@pytest.mark.parametrize("d", [1, 2])
def test_zero_point_agrees_with_hochschild_cochains(ex2d, d: int) -> None:
    point = RepresentationPoint.zero(ex2d.algebra, d)
    dims = tangent_complex(ex2d.algebra, ex2d.resolution, d, point).dims
    oracle = oracle_hochschild_cochains(ex2d.algebra, d, 3, 4).value
    assert oracle[0] == d * d
    assert oracle[1:] == dims


def test_polynomial_ring_agrees_with_hochschild_cochains(kx) -> None:
    dims = tangent_complex(kx.algebra, kx.resolution, 2, RepresentationPoint.zero(kx.algebra, 2)).dims
    assert oracle_hochschild_cochains(kx.algebra, 2, 2, 3).value[1:] == dims


def test_differential_at_a_non_commuting_direction(ex2d) -> None:
    point = RepresentationPoint(2, {
        "x": [[1, 0], [0, 2]],
        "y": [[0, 0], [0, 0]],
    })
    builder = TangentBuilder(ex2d.resolution, point)
    # delta(y) = E_12 gives delta(dt) = X E_12 - E_12 X = (1 - 2) E_12
    column = builder.differential(0).column(builder.coordinates(0).index(("y", 0, 1)))
    target = builder.coordinates(1)
    assert column == {target.index(("t", 0, 1)): -1}


def test_point_size_must_match(ex2d, example_path) -> None:
    point = load_representation_point(example_path("kxy_d1.rep").read_text(encoding="utf-8"), ex2d.algebra, 1)
    with pytest.raises(RepresentationError):
        tangent_complex(ex2d.algebra, ex2d.resolution, 2, point)


def test_needs_noncommutative_resolution(ex2d) -> None:
    RV = RepresentationFunctor(ex2d.resolution, 1).abelianized
    with pytest.raises(PresentationError):
        TangentBuilder(RV, RepresentationPoint.zero(ex2d.algebra, 1))


def test_diagonal_point_agrees_with_twisted_hochschild_cochains(ex2d) -> None:
    point = validate_point(ex2d.algebra, RepresentationPoint(2, {
        "x": [[1, 0], [0, 2]],
        "y": [[3, 0], [0, 5]],
    }))
    dims = tangent_complex(ex2d.algebra, ex2d.resolution, 2, point).dims
    # V splits into two distinct characters; only the diagonal blocks of End V contribute
    oracle = oracle_hochschild_cochains(ex2d.algebra, point, 3, 4).value
    assert oracle == [2, 4, 2, 0]
    # degree 0 holds all derivations, HH^1 only the outer ones
    assert dims[0] == oracle[1] + 4 - oracle[0]
    assert dims[1:] == oracle[2:]


def test_hochschild_oracle_accepts_plain_matrices(ex2d) -> None:
    by_point = oracle_hochschild_cochains(ex2d.algebra, {"x": [[1]], "y": [[2]]}, 2, 3).value
    assert by_point == [1, 2, 1]
    with pytest.raises(ValueError):
        oracle_hochschild_cochains(ex2d.algebra, {"x": [[1]]}, 2, 3)
    with pytest.raises(ValueError):
        oracle_hochschild_cochains(ex2d.algebra, {"x": [[0, 1], [0, 0]], "y": [[1, 0], [0, 0]]}, 1, 2)
