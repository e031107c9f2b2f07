import random
from fractions import Fraction

import pytest

from src.core.algebra import CommPoly, NCPoly, apply_d
from src.core.stages.ainfty import ContractingHomotopy, QuotientAlgebra, solve_components
from src.core.stages.cyclic import CyclicChain
from src.core.stages.representation import RepresentationFunctor
from src.core.utils.errors import RepresentationError
from src.core.stages.traces import (
    TraceMaps, ch2_trace, default_control, gl_invariance_check, ntrace, sample_gl, trace_chain, trace_report,
)

W_MAX = 4


@pytest.fixture
def components(ex2d):
    A = QuotientAlgebra.from_resolution(ex2d.resolution, W_MAX)
    return solve_components(ContractingHomotopy(A, 2, W_MAX), 3, W_MAX)


@pytest.fixture
def functor(ex2d):
    return RepresentationFunctor(ex2d.resolution, 2)


def test_degree_zero_trace_is_the_matrix_trace(components, functor) -> None:
    maps = TraceMaps(components, functor)
    alphabet = functor.abelianized.alphabet
    x = components.A.element(("x",))
    assert maps.on_word((x,)) == CommPoly.generator(alphabet, "x_1_1") + CommPoly.generator(alphabet, "x_2_2")
    assert maps.on_word((components.A.unit,)) == CommPoly.unit(alphabet, 2)


def test_traces_form_a_chain_map(components, functor) -> None:
    report = trace_report(components, functor, 2, W_MAX, gl_samples=3)
    assert report.passed
    assert not any(report.residuals.values())
    assert report.gl is not None and report.gl.passed
    assert report.gl.control_moved is True
    assert report.to_dict()["gl"]["control_moved"] is True
    assert report.matrices[(0, 1)].shape == (8, 2)
    assert "Trace chain map: PASS" in str(report)


def test_degree_one_trace_hits_the_trace_of_t(components, functor) -> None:
    A = components.A
    alphabet = functor.abelianized.alphabet
    value = TraceMaps(components, functor).on_word((A.element(("x",)), A.element(("y",))))
    trace_t = CommPoly.generator(alphabet, "t_1_1") + CommPoly.generator(alphabet, "t_2_2")
    assert value in (trace_t, trace_t.scaled(-1))


def test_gl_invariance_and_control(components, functor) -> None:
    alphabet = functor.abelianized.alphabet
    trace_x = CommPoly.generator(alphabet, "x_1_1") + CommPoly.generator(alphabet, "x_2_2")
    report = gl_invariance_check([trace_x], functor, samples=5, seed=1, control="x_1_2")
    assert report.passed
    assert report.control_moved
    entry = CommPoly.generator(alphabet, "x_1_1")
    assert not gl_invariance_check([entry], functor, samples=5, seed=1).passed


def test_trace_report_checks_a_configurable_control(components, functor, ex2d) -> None:
    assert default_control(functor) == "x_1_2"
    assert default_control(RepresentationFunctor(ex2d.resolution, 1)) is None
    report = trace_report(components, functor, 1, 2, gl_samples=3, control="y_2_1")
    assert report.gl.control_moved is True
    with pytest.raises(RepresentationError):
        trace_report(components, functor, 1, 2, gl_samples=2, control="z_1_2")


def test_sampled_matrices_are_invertible() -> None:
    rng = random.Random(4)
    for _ in range(20):
        g, g_inv = sample_gl(3, rng, entry_bound=1)
        product = [[sum(g[i][k] * g_inv[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
        assert product == [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]


def test_second_chern_character_trace_is_closed(components, functor) -> None:
    A = components.A
    x, y = A.element(("x",)), A.element(("y",))
    value = ch2_trace(components, functor, (x, y))
    assert apply_d(functor.abelianized, value).is_zero()
    assert ch2_trace(components, functor, (A.unit, x)).is_zero()


def test_noncommutative_trace(components, functor) -> None:
    x = components.A.element(("x",))
    assert ntrace(components, functor, {x: Fraction(1)}) == NCPoly({("x_1_1",): 1, ("x_2_2",): 1})


def test_trace_chain_checks_degree(components, functor) -> None:
    with pytest.raises(ValueError):
        trace_chain(components, functor, 1, CyclicChain(0))
    unit = components.A.unit
    assert trace_chain(components, functor, 0, CyclicChain(0, {(unit,): Fraction(1)})) == (
        CommPoly.unit(functor.abelianized.alphabet, 2)
    )
