import itertools
import random
from fractions import Fraction

import pytest

from src.core.algebra import CommPoly, NCPoly, apply_d
from src.core.linalg import rank_of_vectors
from src.core.stages.dsl_parser import parse_presentation, print_presentation, PresentationFile
from src.core.stages.periodicity import one_forms
from src.core.stages.representation import (
    Derivation, RepresentationFunctor, RepresentationPoint, abelianize, bimodule_entries,
    derivation_pushforward, differential_as_derivation, entry_name, evaluate_relations,
    ModulePoly, load_representation_point, matrix_reduce, module_times, rep_equations, universal_matrices,
    validate_point,
)
from src.core.utils.errors import PresentationError, RepresentationError
from src.core.utils.types import Flavor


def _entry_of_commutator_plus(a: str, b: str, c: str, i: int, j: int, d: int) -> NCPoly:
    """Entry (i, j) of AB - BA + C on universal d x d matrices"""
    out = NCPoly.monomial((entry_name(c, i, j),))
    for k in range(1, d + 1):
        out = out + NCPoly.monomial((entry_name(a, i, k), entry_name(b, k, j)))
        out = out - NCPoly.monomial((entry_name(b, i, k), entry_name(a, k, j)))
    return out


def test_matrix_reduction_at_dimension_one_keeps_the_commutator(ex2d) -> None:
    reduced = matrix_reduce(ex2d.resolution, 1)
    assert reduced.flavor is Flavor.NONCOMMUTATIVE
    assert reduced.d_of("t_1_1") == NCPoly({("x_1_1", "y_1_1"): 1, ("y_1_1", "x_1_1"): -1})


def test_commutator_collapses_after_abelianization(ex2d) -> None:
    RV = RepresentationFunctor(ex2d.resolution, 1).abelianized
    assert RV.flavor is Flavor.COMMUTATIVE
    assert RV.alphabet.names == ("x_1_1", "y_1_1", "t_1_1")
    assert not RV.d_of("t_1_1")


def test_dimension_two_differential_is_the_matrix_commutator(ex2d) -> None:
    functor = RepresentationFunctor(ex2d.resolution, 2)
    assert len(functor.alphabet) == 12
    for i, j in itertools.product((1, 2), repeat=2):
        expected = NCPoly()
        for k in (1, 2):
            expected = expected + NCPoly.monomial((entry_name("x", i, k), entry_name("y", k, j)))
            expected = expected - NCPoly.monomial((entry_name("y", i, k), entry_name("x", k, j)))
        assert functor.reduced.d_of(entry_name("t", i, j)) == expected
    # odd entries keep degree and weight
    assert functor.alphabet.homdeg("t_2_1") == 1
    assert functor.alphabet.weight("t_2_1") == 2


def test_nc_printing_orders_words(ex2d) -> None:
    reduced = RepresentationFunctor(ex2d.resolution, 2).reduced
    text = print_presentation(PresentationFile(name=reduced.name, resolution=reduced))
    assert text.startswith("name ex2d_d2_nc\n")
    assert "d t_1_1 = x_1_1*y_1_1 + x_1_2*y_2_1 - y_1_1*x_1_1 - y_1_2*x_2_1" in text


@pytest.mark.parametrize("d", [1, 2])
def test_lie_algebra_differentials_entrywise(ex3d, d: int) -> None:
    reduced = RepresentationFunctor(ex3d.resolution, d).reduced
    for i, j in itertools.product(range(1, d + 1), repeat=2):
        assert reduced.d_of(entry_name("xi", i, j)) == _entry_of_commutator_plus("y", "z", "x", i, j, d)
        assert reduced.d_of(entry_name("theta", i, j)) == _entry_of_commutator_plus("z", "x", "y", i, j, d)
        assert reduced.d_of(entry_name("lambda", i, j)) == _entry_of_commutator_plus("x", "y", "z", i, j, d)


def test_lie_algebra_at_dimension_one_is_koszul(ex3d) -> None:
    RV = RepresentationFunctor(ex3d.resolution, 1).abelianized
    assert RV.d_of("xi_1_1") == CommPoly.generator(RV.alphabet, "x_1_1")
    assert RV.d_of("theta_1_1") == CommPoly.generator(RV.alphabet, "y_1_1")
    assert RV.d_of("lambda_1_1") == CommPoly.generator(RV.alphabet, "z_1_1")
    assert not RV.d_of("T_1_1")


def test_representation_functor_commutes_with_d(ex3d) -> None:
    functor = RepresentationFunctor(ex3d.resolution, 2)
    reduced = functor.reduced
    for gen in ex3d.resolution.generators:
        image = ex3d.resolution.d_of(gen.name)
        for i, j in itertools.product((1, 2), repeat=2):
            assert apply_d(reduced, NCPoly.generator(entry_name(gen.name, i, j))) == functor.entry(image, i, j)


def test_abelianize_is_idempotent(ex2d) -> None:
    RV = RepresentationFunctor(ex2d.resolution, 2).abelianized
    assert abelianize(RV) is RV


def test_entry_names_colliding_with_user_generators() -> None:
    pf = parse_presentation("[resolution]\ngen x, x_1_2 deg 0\n")
    RepresentationFunctor(pf.resolution, 1)
    with pytest.raises(PresentationError):
        RepresentationFunctor(pf.resolution, 2)


def test_rejects_commutative_input_and_bad_dimension(ex2d) -> None:
    RV = RepresentationFunctor(ex2d.resolution, 1).abelianized
    with pytest.raises(PresentationError):
        RepresentationFunctor(RV, 1)
    with pytest.raises(ValueError):
        RepresentationFunctor(ex2d.resolution, 0)


def test_trace_of_commutator_vanishes(ex2d) -> None:
    functor = RepresentationFunctor(ex2d.resolution, 2)
    assert functor.trace(NCPoly({("x", "y"): 1, ("y", "x"): -1})).is_zero()
    assert functor.trace(NCPoly.generator("x")) == (
        CommPoly.generator(functor.alphabet, "x_1_1") + CommPoly.generator(functor.alphabet, "x_2_2")
    )


def test_representation_equations_of_commuting_matrices(ex2d) -> None:
    equations = rep_equations(ex2d.algebra, 2)
    assert len(equations) == 4
    monomials = {m for eq in equations for m in eq}
    index = {m: k for k, m in enumerate(monomials)}
    vectors = [{index[m]: c for m, c in eq.items()} for eq in equations]
    assert rank_of_vectors(vectors, len(index)) == 3


def test_representation_points(ex2d, example_path) -> None:
    point = load_representation_point(example_path("kxy_d1.rep").read_text(encoding="utf-8"), ex2d.algebra, 1)
    assert point.d == 1
    assert point["y"] == [[2]]
    zero = RepresentationPoint.zero(ex2d.algebra, 2)
    assert evaluate_relations(ex2d.algebra, zero) == [[[0, 0], [0, 0]]]
    with pytest.raises(RepresentationError):
        load_representation_point("x = [[0,1],[0,0]]\ny = [[1,0],[0,0]]\n", ex2d.algebra)
    with pytest.raises(RepresentationError):
        load_representation_point("x = [[1]]\ny = [[2]]\n", ex2d.algebra, 2)
    with pytest.raises(RepresentationError):
        validate_point(ex2d.algebra, RepresentationPoint(1, {"x": [[Fraction(1)]]}))


def test_pushforward_of_the_differential(ex3d) -> None:
    functor = RepresentationFunctor(ex3d.resolution, 2)
    pushed = derivation_pushforward(differential_as_derivation(ex3d.resolution), functor)
    assert pushed.agrees_with(differential_as_derivation(functor.abelianized))


def test_pushforward_respects_brackets(ex2d) -> None:
    R = ex2d.resolution
    D1 = Derivation(R.alphabet, {"x": NCPoly.generator("y")}, 0, Flavor.NONCOMMUTATIVE)
    D2 = Derivation(R.alphabet, {"y": NCPoly.monomial(("x", "x"))}, 0, Flavor.NONCOMMUTATIVE)
    functor = RepresentationFunctor(R, 2)
    lhs = derivation_pushforward(D1.bracket(D2), functor)
    rhs = derivation_pushforward(D1, functor).bracket(derivation_pushforward(D2, functor))
    assert lhs.agrees_with(rhs)


def _random_derivation(R, rng: random.Random, degree: int) -> Derivation:
    names = [g.name for g in R.alphabet]
    words = [w for n in (1, 2) for w in itertools.product(names, repeat=n)]
    images = {}
    for name in names:
        target = R.alphabet[name].homdeg + degree
        choices = [w for w in words if sum(R.alphabet[c].homdeg for c in w) == target]
        if not choices:
            continue
        image = NCPoly()
        for word in rng.sample(choices, min(3, len(choices))):
            image = image + NCPoly.monomial(word, rng.choice([-2, -1, 1, 2, 3]))
        images[name] = image
    return Derivation(R.alphabet, images, degree, Flavor.NONCOMMUTATIVE)


def test_pushforward_respects_brackets_of_random_derivations(ex2d) -> None:
    R = ex2d.resolution
    functor = RepresentationFunctor(R, 2)
    rng = random.Random(20240611)
    degree_pairs = list(itertools.product([-1, 0, 1], repeat=2))
    for case in range(20):
        deg1, deg2 = degree_pairs[case % len(degree_pairs)]
        D1 = _random_derivation(R, rng, deg1)
        D2 = _random_derivation(R, rng, deg2)
        lhs = derivation_pushforward(D1.bracket(D2), functor)
        rhs = derivation_pushforward(D1, functor).bracket(derivation_pushforward(D2, functor))
        assert lhs.degree == deg1 + deg2
        assert lhs.agrees_with(rhs), (case, deg1, deg2)


def test_inhomogeneous_derivation_is_rejected(ex2d) -> None:
    with pytest.raises(PresentationError):
        Derivation(ex2d.resolution.alphabet, {"x": NCPoly.generator("t")}, 0, Flavor.NONCOMMUTATIVE)


def test_one_forms_entries_differentiate_the_commutator(ex2d) -> None:
    module = bimodule_entries(one_forms(ex2d.resolution).bimodule, 2)
    alphabet = module.ring.alphabet

    def term(coeff_gen: str, form: str) -> ModulePoly:
        return module_times(CommPoly.generator(alphabet, coeff_gen), form)

    expected = term("y_2_1", "dx_1_2") + term("x_1_2", "dy_2_1") - term("y_1_2", "dx_2_1") - term("x_2_1", "dy_1_2")
    assert module.d_of("dt_1_1") == expected
    assert not module.check_d_squared()


def test_one_forms_entries_vanish_at_dimension_one(ex2d) -> None:
    module = bimodule_entries(one_forms(ex2d.resolution).bimodule, 1)
    assert module.rank == 3
    assert not module.d_of("dt_1_1")


def test_universal_matrices_hold_entry_generators(ex2d) -> None:
    matrices = universal_matrices(ex2d.resolution, 2)
    alphabet = RepresentationFunctor(ex2d.resolution, 2).abelianized.alphabet
    assert set(matrices) == {"x", "y", "t"}
    assert matrices["x"][0][1] == CommPoly.generator(alphabet, "x_1_2")
    assert matrices["t"][1][0] == CommPoly.generator(alphabet, "t_2_1")
