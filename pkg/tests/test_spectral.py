import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg

from swe_esdg.spectral import (
    InvalidOrderError,
    derivative_matrix,
    interpolate,
    interpolation_matrix,
    lagrange_eval,
    legendre_gauss_lobatto,
    operators,
)


def reference_lgl(N):
    """Independent oracle: endpoints plus roots of P_N' from numpy's Legendre module."""
    interior = np.sort(npleg.Legendre.basis(N).deriv().roots().real)
    nodes = np.concatenate([[-1.0], interior, [1.0]])
    weights = 2.0 / (N * (N + 1) * npleg.legval(nodes, [0] * N + [1]) ** 2)
    return nodes, weights


def test_order_two_rule():
    rule = legendre_gauss_lobatto(2)
    np.testing.assert_allclose(rule.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [1 / 3, 4 / 3, 1 / 3], rtol=1e-14)


def test_order_four_rule_closed_form():
    rule = legendre_gauss_lobatto(4)
    a = np.sqrt(3 / 7)
    np.testing.assert_allclose(rule.nodes, [-1, -a, 0, a, 1], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [1 / 10, 49 / 90, 32 / 45, 49 / 90, 1 / 10], rtol=1e-14)


@pytest.mark.parametrize("N", range(1, 21))
def test_nodes_match_independent_oracle(N):
    rule = legendre_gauss_lobatto(N)
    nodes, weights = reference_lgl(N)
    np.testing.assert_allclose(rule.nodes, nodes, atol=1e-13)
    np.testing.assert_allclose(rule.weights, weights, rtol=1e-12)


@pytest.mark.parametrize("N", [0, -3, 2.5])
def test_invalid_order(N):
    with pytest.raises(InvalidOrderError):
        legendre_gauss_lobatto(N)


@pytest.mark.parametrize("N", range(1, 17))
def test_quadrature_exact_to_degree_2N_minus_1(N):
    rule = legendre_gauss_lobatto(N)
    for k in range(2 * N):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert abs(rule.weights @ rule.nodes**k - exact) <= 1e-12


@pytest.mark.parametrize("N", range(1, 21))
def test_sbp_identities(N):
    ops = operators(N)
    assert np.abs(ops.Q + ops.Q.T - ops.B).max() <= 1e-13 * max(1, N)
    np.testing.assert_allclose(ops.D, -ops.S + ops.Dhat, atol=1e-11 * N * N)
    assert np.abs(ops.D.sum(axis=1)).max() <= 1e-13 * N * N


def test_derivative_matrix_order_one():
    D = derivative_matrix(legendre_gauss_lobatto(1))
    np.testing.assert_allclose(D, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(N=st.integers(1, 14), coeffs=st.lists(st.floats(-3, 3), min_size=1, max_size=15))
def test_derivative_exact_for_polynomials(N, coeffs):
    coeffs = np.array(coeffs[: N + 1])
    ops = operators(N)
    p = np.polynomial.Polynomial(coeffs)
    err = ops.D @ p(ops.nodes) - p.deriv()(ops.nodes)
    assert np.abs(err).max() <= 1e-10 * max(1.0, np.abs(coeffs).sum()) * N**2


def test_lagrange_cardinal_property():
    rule = legendre_gauss_lobatto(6)
    for j in range(7):
        for i, x in enumerate(rule.nodes):
            assert lagrange_eval(rule, j, x) == (1.0 if i == j else 0.0)
    with pytest.raises(IndexError):
        lagrange_eval(rule, 7, 0.0)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-1, 1))
def test_lagrange_partition_of_unity(x):
    T = interpolation_matrix(legendre_gauss_lobatto(9), [x])
    assert abs(T.sum() - 1.0) <= 1e-13


def test_interpolation_reproduces_polynomials():
    rule = legendre_gauss_lobatto(5)
    x = np.linspace(-1, 1, 33)
    f = lambda s: 3 * s**5 - s**2 + 0.5  # noqa: E731
    np.testing.assert_allclose(interpolate(rule, f(rule.nodes), x), f(x), atol=1e-13)


def test_operators_are_read_only():
    ops = operators(3)
    with pytest.raises(ValueError):
        ops.D[0, 0] = 1.0
