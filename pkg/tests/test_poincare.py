import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from pullback_poisson.algebra import Polynomial, gaussian
from pullback_poisson.errors import (
    CapabilityError,
    DivisionError,
    HypothesisError,
    NotInImageError,
    ResonanceError,
)
from pullback_poisson.expression import parse_expression as P
from pullback_poisson.multivector import MultiVector, schouten, wedge
from pullback_poisson.poincare import (
    EigenData,
    admissibility,
    conjugacy_residual,
    decompose_alpha0,
    delta_apply,
    derham_divide,
    formal_linearize,
    in_poincare_domain,
    kernel_delta,
    linear_field,
    monomial_basis,
    nonresonant_up_to_order,
    origin_in_hull,
    resonant_monomials,
    solve_homological,
    spectral_dimensions,
)
from strategies import multivectors

LAM = EigenData.of("2,5,11")


def P3(text):
    return P(text, nvars=3)


def test_eigen_data_parsing():
    assert EigenData.of("2, 5, 11").values == (2, 5, 11)
    assert EigenData.of("1+i,1-i").values == (gaussian(1, 1), gaussian(1, -1))
    assert LAM.inner((1, 1, 0)) == 7


@pytest.mark.parametrize("lam,B,witness", [
    ((1, 2, 3), 3, (1, 1, -1)),
    ((2, 5, 11), 4, None),
    ((1, 1), 2, (1, -1)),
    ((2, 5, 11), 5, (3, 1, -1)),
])
def test_resonance_search(lam, B, witness):
    cert = nonresonant_up_to_order(EigenData(lam), B)
    assert cert.resonant == (witness is not None)
    assert cert.witness == witness
    assert cert.check()


@pytest.mark.parametrize("lam,expected", [
    ((1, -1), False),
    ((gaussian(1, 1), gaussian(2, -1), 3), True),
    ((1, gaussian(0, 1), gaussian(-1, -1)), False),
    ((gaussian(1, 1), gaussian(1, -1)), True),
    ((gaussian(0, 1), gaussian(0, -1)), False),
])
def test_poincare_domain(lam, expected):
    assert in_poincare_domain(EigenData(lam)) == expected


def test_hull_edge_cases():
    F = Fraction
    assert origin_in_hull([(F(0), F(0))])
    assert not origin_in_hull([(F(1), F(0)), (F(0), F(1))])
    assert origin_in_hull([(F(-1), F(-1)), (F(2), F(2))])
    assert not origin_in_hull([(F(1), F(1)), (F(2), F(2))])


def test_admissibility_report():
    assert admissibility(LAM, 4)["admissible"]
    bad = admissibility(EigenData((1, 2, 3)), 4)
    assert not bad["admissible"] and "relation" in bad["reason"]
    assert not admissibility(EigenData((1, -1, 3)), 4)["poincare_domain"]


def test_delta_examples():
    A = P("x1*x2*e1^e3")
    assert delta_apply(LAM, A) == A.scale(-6)
    assert delta_apply(LAM, P("x1*x3*e1^e3")).is_zero()
    assert delta_apply(LAM, P3("x2*e2")).is_zero()
    with pytest.raises(CapabilityError):
        delta_apply(LAM, P("e1^e2^e3"))


@pytest.mark.parametrize("grade", [1, 2])
def test_delta_matches_generic_bracket_on_monomials(grade):
    Y = linear_field(LAM)
    for key in monomial_basis(3, grade, 3):
        A = MultiVector(grade, 3, {key: Fraction(1)})
        assert delta_apply(LAM, A) == schouten(Y, A)


def test_kernel_examples():
    assert kernel_delta(LAM, 2, 4) == [P3("x1*x2*e1^e2"), P3("x1*x3*e1^e3"), P3("x2*x3*e2^e3")]
    assert kernel_delta(LAM, 1, 3) == [P3("x1*e1"), P3("x2*e2"), P3("x3*e3")]


def test_kernel_reports_resonance():
    with pytest.raises(ResonanceError) as info:
        kernel_delta(EigenData((1, 2, 3)), 2, 2)
    cert = info.value.certificate
    assert cert.monomial == (0, 0, 1) and cert.directions == (0, 1)
    assert cert.check()


def test_grade_one_resonance_of_2_5_11_at_degree_four():
    # 3*2 + 5 = 11: y1^3 y2 d3 commutes with the linear field
    assert resonant_monomials(LAM, 1, 4) == [((2,), (3, 1, 0))]
    with pytest.raises(ResonanceError) as info:
        kernel_delta(LAM, 1, 4)
    assert info.value.certificate.witness == (3, 1, -1)
    assert info.value.certificate.check()


@pytest.mark.parametrize("grade", [1, 2])
def test_spectral_direct_sum(grade):
    for row in spectral_dimensions(EigenData((2, 5, 21)), grade, 4):
        assert row["direct_sum"]
        assert row["kernel"] + row["image"] == row["total"]
        expected = 3 if row["degree"] == grade else 0
        assert row["kernel"] == expected


def test_homological_examples():
    A = P("x1*x2*e1^e3")
    assert solve_homological(LAM, A.scale(-6), 2) == A
    with pytest.raises(NotInImageError) as info:
        solve_homological(LAM, P("x1*x3*e1^e3"), 2)
    assert info.value.offending == [((0, 2), (1, 0, 1))]
    assert solve_homological(LAM, MultiVector(2, 3), 2).is_zero()


@settings(max_examples=50, deadline=None)
@given(multivectors(3, 2, 4, 5))
def test_homological_inverts_delta_off_kernel(A):
    diagonal = {((i, j), tuple(int(t in (i, j)) for t in range(3))) for i, j in combinations(range(3), 2)}
    off = MultiVector(2, 3, {k: c for k, c in A.terms.items() if k not in diagonal})
    assert solve_homological(LAM, delta_apply(LAM, off), 2) == off


def test_derham_examples():
    Y = P("x1*e1 + x2*e2", nvars=3)
    V = derham_divide(Y, wedge(Y, P("x3*e3")), 2)
    assert wedge(Y, V) == wedge(Y, P("x3*e3"))
    assert derham_divide(Y, MultiVector(2, 3), 2).is_zero()
    with pytest.raises(DivisionError):
        derham_divide(Y, P("e1^e3"), 2)


@settings(max_examples=100, deadline=None)
@given(multivectors(3, 1, 3, 4))
def test_derham_round_trip(V0):
    Y = linear_field(LAM)
    W = wedge(Y, V0)
    V = derham_divide(Y, W, 3)
    assert wedge(Y, V) == W


def test_decompose_examples():
    Y = linear_field(LAM)
    Z0 = P("x1**2*e3 + x2*x3*e1")
    alpha0 = wedge(Y, Z0) + P3("3*x1*x2*e1^e2")
    dec = decompose_alpha0(LAM, alpha0, 4)
    assert dec.residual.is_zero()
    assert dec.coefficients == {(0, 1): 3}
    # Z agrees with Z0 up to vector fields V with Y ^ V = 0
    assert wedge(Y, dec.Z - Z0).is_zero()
    plain = decompose_alpha0(LAM, P("x1*x3*e1^e3"))
    assert plain.Z.is_zero() and plain.coefficients == {(0, 2): 1}


def test_decompose_hypothesis_violation():
    with pytest.raises(HypothesisError):
        decompose_alpha0(LAM, P("x3**2*e1^e2"))


def test_decompose_with_resonance():
    with pytest.raises(ResonanceError):
        decompose_alpha0(EigenData((1, 2, 3)), P3("x1*x2*e1^e2"), 2)


def test_linearize_identity():
    res = formal_linearize(P("2*x1*e1 + 5*x2*e2"), 4)
    assert res.change == [Polynomial.variable(2, 0), Polynomial.variable(2, 1)]
    assert res.residual.is_zero()


def test_linearize_single_step():
    res = formal_linearize(P("2*x1*e1 + 5*x2*e2 + x1**2*e2"), 2)
    # coefficient 1 / (<l,(2,0)> - l_2) = -1
    assert res.change[1] == Polynomial.variable(2, 1) - Polynomial.variable(2, 0) ** 2
    assert res.residual.is_zero()
    assert res.transformed == P("2*x1*e1 + 5*x2*e2")


def test_linearize_resonance():
    with pytest.raises(ResonanceError) as info:
        formal_linearize(P("x1*e1 + 2*x2*e2 + x1**2*e2"), 4)
    assert info.value.certificate.check()


def test_linearize_non_diagonal_linear_part():
    # linear part [[3, 1], [0, 5]] has eigenvalues 3, 5
    Y = P("3*x1*e1 + x2*e1 + 5*x2*e2 + x1*x2*e1 + x2**2*e2")
    res = formal_linearize(Y, 4)
    assert sorted(res.eigenvalues.values) == [3, 5]
    assert res.residual.is_zero()


def test_linearize_rejects_nilpotent_part():
    with pytest.raises(CapabilityError):
        formal_linearize(P("x2*e1 + x1**2*e2"), 3)


@pytest.mark.parametrize("seed", range(5))
def test_conjugacy_residual_vanishes_through_order(seed):
    rnd = random.Random(seed)
    terms = [f"{rnd.randint(-4, 4)}*{m}" for m in ("x1**2*e1", "x1*x2*e2", "x2**2*e1", "x1**3*e2")]
    Y = P("2*x1*e1 + 5*x2*e2 + " + " + ".join(terms))
    res = formal_linearize(Y, 4)
    assert conjugacy_residual(Y, res.change, res.eigenvalues, 4).is_zero()
