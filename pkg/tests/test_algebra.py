from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pullback_poisson.algebra import (
    ExactMatrix,
    GaussianRational,
    Polynomial,
    ReducedEchelon,
    format_scalar,
    gaussian,
    kernel_basis,
    matrix_rank,
    parse_scalar,
    poly_normalize,
    solve,
    span_contains,
)
from strategies import gaussians, polynomials, rationals

F = Fraction


def test_normalize_merges_and_drops_zeros():
    p = poly_normalize([((1, 0), 2), ((1, 0), -2), ((0, 2), F(1, 2))], 2)
    assert p.terms == {(0, 2): F(1, 2)}
    assert poly_normalize([], 3).is_zero()


def test_degree_and_homogeneity():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    assert Polynomial.zero(2).degree() == -1
    assert (x * x + y).degree() == 2
    assert (x * y + y * y).is_homogeneous()
    assert not (x + 1).is_homogeneous()


def test_partial_and_evaluate():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    p = x ** 3 * y + 5
    assert p.partial(0) == (x ** 2 * y).scale(3)
    assert p.evaluate([2, F(1, 2)]) == 9


def test_compose_truncates():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    p = x * x
    assert p.compose([x + y * y, y], truncate=3) == x * x + (x * y * y).scale(2)


def test_gaussian_arithmetic():
    z = gaussian(1, 2)
    w = gaussian(F(1, 2), -1)
    assert z * w == gaussian(F(5, 2), 0)
    assert isinstance(z * w, Fraction)  # collapses to the rationals
    assert (z / w) * w == z
    assert format_scalar(gaussian(F(1, 2), F(5, 3))) == "1/2+5/3i"
    assert format_scalar(gaussian(0, -1)) == "-i"


@given(gaussians)
def test_scalar_string_round_trip(c):
    assert parse_scalar(format_scalar(c)) == c


def _ring(nvars, coeffs=rationals):
    return polynomials(nvars, 3, 4, coeffs)


@settings(max_examples=100, deadline=None)
@given(_ring(3), _ring(3), _ring(3))
def test_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == Polynomial.zero(3)


@settings(max_examples=100, deadline=None)
@given(_ring(3, gaussians), _ring(3, gaussians), st.integers(0, 2))
def test_leibniz_rule_for_partials(p, q, k):
    assert (p * q).partial(k) == p.partial(k) * q + p * q.partial(k)


def test_kernel_example():
    ker = kernel_basis(ExactMatrix.from_rows([[1, 2], [2, 4]]))
    assert ker == [[F(-2), F(1)]]


def test_solve_consistent_and_inconsistent():
    M = ExactMatrix.from_rows([[1, 1, 0], [0, 1, 1]])
    x = solve(M, [3, 5])
    assert M.matvec(x) == [3, 5]
    assert solve(ExactMatrix.from_rows([[1, 1], [2, 2]]), [1, 3]) is None


@st.composite
def sparse_matrices(draw, max_dim=30, coeffs=rationals):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    density = draw(st.sampled_from([0.1, 0.3, 0.7]))
    rows = []
    for _ in range(r):
        mask = draw(st.lists(st.floats(0, 1), min_size=c, max_size=c))
        rows.append([draw(coeffs) if u < density else 0 for u in mask])
    # occasionally force dependencies
    if r > 2 and draw(st.booleans()):
        rows[-1] = [a + 2 * b for a, b in zip(rows[0], rows[1])]
    return ExactMatrix.from_rows(rows, c)


@settings(max_examples=60, deadline=None)
@given(sparse_matrices())
def test_rank_nullity_and_kernel(M):
    ker = kernel_basis(M)
    assert matrix_rank(M) + len(ker) == M.ncols
    for v in ker:
        assert all(x == 0 for x in M.matvec(v))
    assert matrix_rank(ExactMatrix.from_rows(ker, M.ncols)) == len(ker) if ker else True


@settings(max_examples=30, deadline=None)
@given(sparse_matrices(max_dim=12))
def test_rank_agrees_with_sympy(M):
    assert matrix_rank(M) == sympy.Matrix(M.to_dense()).rank()


@settings(max_examples=30, deadline=None)
@given(sparse_matrices(max_dim=10, coeffs=gaussians))
def test_gaussian_kernel(M):
    for v in kernel_basis(M):
        assert all(x == 0 for x in M.matvec(v))


@settings(max_examples=50, deadline=None)
@given(sparse_matrices(max_dim=12), st.data())
def test_solve_hits_the_image(M, data):
    x0 = data.draw(st.lists(rationals, min_size=M.ncols, max_size=M.ncols))
    b = M.matvec(x0)
    x = solve(M, b)
    assert x is not None and M.matvec(x) == b


def test_span_contains():
    basis = [[1, 0, 1], [0, 1, 1]]
    assert span_contains(basis, [[2, 3, 5]])
    assert not span_contains(basis, [[0, 0, 1]])


def test_reduced_echelon_is_canonical():
    a = ReducedEchelon(3, [[1, 1, 0], [0, 1, 1]])
    b = ReducedEchelon(3, [[1, 2, 1], [1, 0, -1]])
    assert a.rank == b.rank == 2
    v = {0: F(3), 2: F(7)}
    assert a.reduce(v) == b.reduce(v)


def test_matrix_validates_shape():
    with pytest.raises(ValueError):
        ExactMatrix(2, 2, {(2, 0): F(1)})


def test_gaussian_entries_survive_rank():
    M = ExactMatrix.from_rows([[1, GaussianRational(F(0), F(1))], [GaussianRational(F(0), F(1)), -1]])
    assert matrix_rank(M) == 1
