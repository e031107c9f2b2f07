import pytest

from src.core.algebra import NCPoly, apply_d
from src.core.stages.ainfty import (
    ContractingHomotopy, QuotientAlgebra, build_homotopy, check_twisting, solve_components,
)
from src.core.stages.cyclic import commutator_quotient_dim
from src.core.stages.dsl_parser import parse_presentation
from src.core.utils.errors import BoundsError, PresentationError, ResolutionError


@pytest.fixture
def kxy_components(ex2d):
    A = QuotientAlgebra.from_resolution(ex2d.resolution, 4)
    homotopy = ContractingHomotopy(A, 2, 4)
    return solve_components(homotopy, 3, 4)


def test_quotient_of_the_commutator_resolution(ex2d) -> None:
    A = QuotientAlgebra.from_resolution(ex2d.resolution, 3)
    assert A.dim == 1 + 2 + 3 + 4
    assert [A.weight(i) for i in range(A.dim)].count(2) == 3
    xy = NCPoly.monomial(("x", "y"))
    yx = NCPoly.monomial(("y", "x"))
    assert A.normal_form(xy) == A.normal_form(yx)
    assert len({("x", "y"), ("y", "x")} & set(A.basis)) == 1
    assert A.normal_form(xy - yx) == {}
    with pytest.raises(PresentationError):
        A.element(("z",))


def test_truncated_quotient_is_commutative(ex2d) -> None:
    algebra = QuotientAlgebra.from_resolution(ex2d.resolution, 2).to_fin_dim()
    assert algebra.dim == 6
    assert commutator_quotient_dim(algebra) == algebra.dim


def test_normal_form_bounds(ex2d) -> None:
    A = QuotientAlgebra.from_resolution(ex2d.resolution, 2)
    with pytest.raises(BoundsError):
        A.normal_form(NCPoly.monomial(("x", "x", "x")))
    with pytest.raises(PresentationError):
        A.normal_form(NCPoly.generator("t"))


def test_contracting_homotopy_has_no_residual(ex2d) -> None:
    homotopy = build_homotopy(ex2d.resolution, 1, 4)
    for n in range(2):
        for w in range(5):
            assert homotopy.residual(n, w) == {}


def test_homotopy_detects_a_missing_generator() -> None:
    text = "[resolution]\ngen x deg 0 weight 1\ngen t deg 1 weight 2\nd t = x*x\n"
    R = parse_presentation(text).resolution
    with pytest.raises(ResolutionError) as excinfo:
        build_homotopy(R, 1, 3)
    assert excinfo.value.block is not None


def test_components_form_a_twisting_cochain(kxy_components) -> None:
    report = check_twisting(kxy_components, 3, 4)
    assert report.passed
    assert report.checked > 0
    assert report.first_failure_degree is None


def test_second_component_solves_its_equation(kxy_components) -> None:
    A = kxy_components.A
    x, y = A.element(("x",)), A.element(("y",))
    for word in [(x, y), (y, x)]:
        value = kxy_components.component(word)
        assert apply_d(A.R, value) == kxy_components.rhs(word)
    assert kxy_components.component((A.unit, x)).is_zero()


def test_dropping_a_component_breaks_the_equation(kxy_components) -> None:
    report = check_twisting(kxy_components.zeroed(2), 3, 4)
    assert not report.passed
    assert report.first_failure_degree == 2
    assert report.to_dict()["failures"][0]["n"] == 2


def test_component_bounds(kxy_components) -> None:
    A = kxy_components.A
    x = A.element(("x",))
    with pytest.raises(BoundsError):
        kxy_components.component((x,) * 4)
    with pytest.raises(ValueError):
        kxy_components.component(())


def test_quotient_needs_weight_homogeneous_noncommutative_input(ex2d, ex3d) -> None:
    with pytest.raises(ResolutionError):
        QuotientAlgebra.from_resolution(ex3d.resolution, 2)
    comm = parse_presentation("[resolution]\nflavor comm\ngen x deg 0\n").resolution
    with pytest.raises(PresentationError):
        QuotientAlgebra.from_resolution(comm, 2)
