import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pullback_poisson.algebra import Polynomial
from pullback_poisson.errors import ContractError, StructuralError
from pullback_poisson.expression import parse_expression as P
from pullback_poisson.multivector import (
    MultiVector,
    contract,
    generic_rank,
    integrability_residual,
    is_poisson,
    linear_change,
    partial_multivector,
    schouten,
    wedge,
    wedge_power,
)
from strategies import graded_family, multivectors


def sign(k):
    return -1 if k % 2 else 1


def test_wedge_examples():
    assert P("e1^e1").is_zero()
    assert wedge(P("x1*e1", nvars=2), P("e2")) == P("x1*e1^e2")
    assert wedge(P("e1^e2", nvars=4), P("e3^e4")) == P("e1^e2^e3^e4")


def test_wedge_needs_same_ambient():
    with pytest.raises(StructuralError):
        wedge(P("e1", nvars=2), P("e1", nvars=3))


def test_schouten_examples():
    assert schouten(P("e1"), P("x1**2")) == P("2*x1")
    assert schouten(P("x1*e2"), P("x2*e1")) == P("x1*e1 - x2*e2")
    assert schouten(P("e3"), P("x1*x2*e1^e2", nvars=3)).is_zero()


def test_partial_examples():
    assert partial_multivector(P("x2**2*e1^e3"), 1) == P("2*x2*e1^e3")
    assert partial_multivector(P("5*e1^e2"), 0).is_zero()


def test_contract_examples():
    Pi = P("x1*x2*e1^e2", nvars=3)
    x = [Polynomial.variable(3, k) for k in range(3)]
    assert contract(P("e1^e2"), Polynomial.variable(2, 0)) == P("e2")
    assert contract(Pi, x[2]).is_zero()
    assert contract(Pi, x[0]) == P("x1*x2*e2", nvars=3)
    with pytest.raises(ContractError):
        contract(P("e1"), Polynomial.variable(1, 0))


def test_residual_examples():
    assert integrability_residual(P("x1*x2*e1^e2")).is_zero()
    assert integrability_residual(P("e1^e2")).is_zero()
    # hand expansion: [x3 d1^d2 + x1 d2^d3, same] vanishes (a linear Lie-Poisson structure)
    assert is_poisson(P("x3*e1^e2 + x1*e2^e3"))
    # [Pi, Pi] = 2 [d1^d4, x1 d2^d3] = -2 d2^d3^d4 by the second Leibniz rule
    assert integrability_residual(P("x1*e2^e3 + e1^e4")) == P("-2*e2^e3^e4")


def test_rank_examples():
    assert generic_rank(P("x1*x2*e1^e2", nvars=4)) == 2
    assert generic_rank(P("x1*x2*e1^e2 + x3*x4*e3^e4")) == 4
    assert generic_rank(MultiVector(2, 4)) == 0


def test_wedge_power_stops_at_zero():
    Pi = P("e1^e2 + e3^e4")
    assert wedge_power(Pi, 2) == P("2*e1^e2^e3^e4")
    assert wedge_power(Pi, 3).is_zero()


@settings(max_examples=60, deadline=None)
@given(graded_family(2, grades=(0, 1, 2, 3)))
def test_graded_commutativity_of_wedge(pair):
    A, B = pair
    assert wedge(A, B) == wedge(B, A).scale(sign(A.grade * B.grade))


@settings(max_examples=60, deadline=None)
@given(graded_family(2))
def test_antisymmetry(pair):
    A, B = pair
    p, q = A.grade, B.grade
    assert schouten(A, B) == schouten(B, A).scale(-sign((p - 1) * (q - 1)))


@settings(max_examples=40, deadline=None)
@given(graded_family(3, max_degree=2))
def test_jacobi(triple):
    A, B, C = triple
    p, q, r = (X.grade for X in triple)
    total = (schouten(A, schouten(B, C)).scale(sign((p - 1) * (r - 1)))
             + schouten(B, schouten(C, A)).scale(sign((q - 1) * (p - 1)))
             + schouten(C, schouten(A, B)).scale(sign((r - 1) * (q - 1))))
    assert total.is_zero()


@settings(max_examples=60, deadline=None)
@given(graded_family(3, max_degree=2))
def test_leibniz_rules(triple):
    a, b, xi = triple
    p, q, r = (X.grade for X in triple)
    first = wedge(schouten(a, b), xi) + wedge(b, schouten(a, xi)).scale(sign((p - 1) * q))
    assert schouten(a, wedge(b, xi)) == first
    second = wedge(a, schouten(b, xi)) + wedge(schouten(a, xi), b).scale(sign((r - 1) * q))
    assert schouten(wedge(a, b), xi) == second


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda m: st.tuples(
    st.just(m), st.integers(0, m - 1), st.integers(0, min(m, 3)))).flatmap(
    lambda t: st.tuples(st.just(t[1]), multivectors(t[0], t[2]))))
def test_partial_is_bracket_with_coordinate_field(case):
    k, A = case
    assert schouten(MultiVector.basis(k, A.nvars), A) == partial_multivector(A, k)


@settings(max_examples=60, deadline=None)
@given(graded_family(2, grades=(1,)))
def test_lie_bracket_of_vector_fields(pair):
    X, Y = pair
    m = X.nvars
    f = Polynomial.variable(m, 0) * Polynomial.variable(m, m - 1)

    def act(V, g):
        return schouten(V, MultiVector.function(g))

    lhs = act(schouten(X, Y), f)
    rhs = act(X, act(Y, f).as_polynomial()) - act(Y, act(X, f).as_polynomial())
    assert lhs == rhs


def _random_invertible(m, rnd):
    while True:
        M = sympy.Matrix(m, m, lambda i, j: sympy.Rational(rnd.randint(-3, 3), rnd.randint(1, 2)))
        if M.det() != 0:
            break
    inv = M.inv()
    conv = lambda A: [[Fraction(int(A[i, j].p), int(A[i, j].q)) for j in range(m)] for i in range(m)]
    return conv(M), conv(inv)


@pytest.mark.parametrize("text", [
    "x1*x2*e1^e2",
    "x1*x2*e1^e2 + x3*x4*e3^e4",
    "x3*e1^e2 + x1*e2^e3",
    "e1^e2 + x1*e3^e4",
    "x1**2*e1^e2 + x2*x3*e2^e3 + e1^e4",
])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_rank_invariant_under_linear_change(text, seed):
    Pi = P(text, nvars=4)
    M, Minv = _random_invertible(4, random.Random(seed))
    moved = linear_change(Pi, M, Minv)
    assert generic_rank(moved) == generic_rank(Pi)
    assert is_poisson(moved) == is_poisson(Pi)
    assert linear_change(moved, Minv, M) == Pi


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_jacobi_consequence_for_poisson(data):
    Pi = data.draw(st.sampled_from([P("x1*x2*e1^e2", nvars=4), P("x3*e1^e2 + x1*e2^e3", nvars=4),
                                    P("x1*x2*e1^e2 + x3*x4*e3^e4")]))
    xi = data.draw(multivectors(4, 2, 2, 3))
    assert schouten(Pi, schouten(Pi, xi)).is_zero()
