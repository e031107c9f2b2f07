import pytest

from src.core.algebra import CommPoly, NCPoly, apply_d
from src.core.stages.periodicity import (
    KahlerForms, b_v, bimodule_differential_consistency, connes_square_check, cyclic_lift,
    extended_trace, is_total_cycle, one_forms, periodicity_report, sv_bv, x_complexes,
)
from src.core.stages.representation import RepresentationFunctor, module_times
from src.core.utils.errors import LiftError, PresentationError, ResolutionError


def test_universal_derivation_of_the_commutator(ex2d) -> None:
    forms = one_forms(ex2d.resolution)
    image = forms.bimodule.d_of("dt")
    assert image == forms.partial(NCPoly({("x", "y"): 1, ("y", "x"): -1}))
    assert forms.partial_natural(NCPoly.monomial(("x", "y"))) == {(("y",), "x"): 1, (("x",), "y"): 1}


def test_beta_on_a_single_form(ex2d) -> None:
    forms = one_forms(ex2d.resolution)
    assert forms.beta({(("x",), "y"): 1}) == NCPoly({("x", "y"): 1, ("y", "x"): -1})
    assert forms.beta({(("t",), "t"): 1}) == NCPoly({("t", "t"): 2})


def test_de_rham_on_entries(ex2d) -> None:
    kahler = KahlerForms(one_forms(ex2d.resolution), RepresentationFunctor(ex2d.resolution, 1))
    alphabet = kahler.RV.alphabet
    square = CommPoly.monomial(alphabet, ["x_1_1", "x_1_1"])
    assert kahler.de_rham(square) == module_times(CommPoly.generator(alphabet, "x_1_1", 2), "dx_1_1")


@pytest.mark.parametrize("d", [1, 2])
def test_bimodule_differential_matches_de_rham(ex2d, d: int) -> None:
    report = bimodule_differential_consistency(ex2d.resolution, d)
    assert report.passed
    assert "dt_1_1" in report.checked


def test_commuting_variety_rows_are_exact(ex2d) -> None:
    report = periodicity_report(ex2d.resolution, 1, 6)
    assert max(r.w for r in report.rows) == 6
    assert report.rows_exact
    assert report.passed
    assert all(k == 0 for k in report.de_rham_kernels.values())
    assert report.to_dict()["consistency"] is True


def test_rows_exact_at_dimension_two(ex2d) -> None:
    report = periodicity_report(ex2d.resolution, 2, 3, total_max=3, v_w_max=2)
    assert report.passed


def test_total_differentials_square_to_zero(ex2d) -> None:
    X, XV = x_complexes(ex2d.resolution, 1)
    assert all(X.check_d_squared(4, 4).values())
    assert all(XV.check_d_squared(4, 4).values())


def test_lift_of_the_commutator_generator(ex2d) -> None:
    R = ex2d.resolution
    X, _ = x_complexes(R, 1)
    cycle = cyclic_lift(X, NCPoly.generator("t"))
    assert (cycle.n, cycle.w) == (1, 2)
    omega = cycle.component(1)
    assert X.forms.beta(omega) == apply_d(R, NCPoly.generator("t")).scaled(-1)
    assert is_total_cycle(X, cycle)


def test_extended_trace_of_a_square(ex2d) -> None:
    r = NCPoly.monomial(("t", "t"))
    cycle, traced = extended_trace(ex2d.resolution, 1, r)
    assert (cycle.n, cycle.w) == (2, 4)
    assert len(cycle.components) == 3
    _, XV = x_complexes(ex2d.resolution, 1)
    assert is_total_cycle(XV, traced)


def test_s_v_commutes_with_the_trace(ex2d) -> None:
    for r in (NCPoly.generator("t"), NCPoly.monomial(("t", "t"))):
        report = connes_square_check(ex2d.resolution, 1, r)
        assert report.passed, str(report)


def test_b_v_is_de_rham_of_the_leading_component(ex2d) -> None:
    r = NCPoly.monomial(("t", "t"))
    _, traced = extended_trace(ex2d.resolution, 1, r)
    _, XV = x_complexes(ex2d.resolution, 1)
    image = b_v(XV, traced)
    assert image.n == 3
    assert image.component(0) == {}
    leading = CommPoly(XV.kahler.RV.alphabet, traced.component(0))
    assert image.component(1) == dict(XV.kahler.de_rham(leading))


def test_lifting_a_non_cycle_fails(ex2d) -> None:
    X, _ = x_complexes(ex2d.resolution, 1)
    with pytest.raises(LiftError) as excinfo:
        cyclic_lift(X, NCPoly.monomial(("t", "x", "y")))
    assert excinfo.value.block == (0, 4)


def test_lift_input_validation(ex2d) -> None:
    X, _ = x_complexes(ex2d.resolution, 1)
    with pytest.raises(ValueError):
        cyclic_lift(X, NCPoly())
    with pytest.raises(PresentationError):
        cyclic_lift(X, NCPoly.generator("t") + NCPoly.generator("x"))


def test_weight_decreasing_resolution_is_rejected(ex3d) -> None:
    with pytest.raises(ResolutionError):
        x_complexes(ex3d.resolution, 1)


def test_sv_bv_pairs_both_maps(ex2d) -> None:
    _, traced = extended_trace(ex2d.resolution, 1, NCPoly.monomial(("t", "t")))
    _, XV = x_complexes(ex2d.resolution, 1)
    shifted, image = sv_bv(XV, traced)
    assert shifted.n == traced.n - 2
    assert shifted.components == traced.components[2:]
    assert image == b_v(XV, traced)
