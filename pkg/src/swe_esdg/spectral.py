"""Legendre-Gauss-Lobatto quadrature, Lagrange interpolation and SBP operators.

Everything here lives on the reference interval [-1, 1]. Matrices are dense;
the polynomial orders of interest are small (N <= ~20).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_NEWTON_TOL = 4.0 * np.finfo(float).eps
_NEWTON_MAXITER = 100


class InvalidOrderError(ValueError):
    """Raised for a polynomial order below 1."""


@dataclass(frozen=True)
class QuadratureRule:
    """LGL nodes and weights of polynomial order ``order`` (``order + 1`` points)."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    bary: np.ndarray  # barycentric weights of the nodes

    @property
    def n(self) -> int:
        return self.order + 1


@dataclass(frozen=True)
class OperatorSet:
    """SBP operator family built from one quadrature rule.

    ``D`` is the polynomial derivative matrix, ``M`` the diagonal mass matrix,
    ``Q = M D``, ``B = diag(-1, 0, ..., 0, 1)``, ``S`` the surface matrix
    ``diag(1/w_0, 0, ..., 0, -1/w_N)`` and ``Dhat = -M^{-1} Q^T``.
    """

    rule: QuadratureRule
    D: np.ndarray
    M: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    S: np.ndarray
    Dhat: np.ndarray

    @property
    def N(self) -> int:
        return self.rule.order

    @property
    def weights(self) -> np.ndarray:
        return self.rule.weights

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes


def legendre(N: int, x):
    """Return ``(P_N(x), P_{N-1}(x))`` via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if N == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(2, N + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    return p, p_prev


def _lobatto_function(N: int, x):
    """q = P_{N+1} - P_{N-1}, its derivative, and P_N.

    q is a constant multiple of (1 - x^2) P_N'(x), so the roots coincide.
    """
    p_nm2 = np.ones_like(x)
    p_nm1 = x.copy()
    dp_nm2 = np.zeros_like(x)
    dp_nm1 = np.ones_like(x)
    for k in range(2, N + 1):
        p_n = (2 * k - 1) / k * x * p_nm1 - (k - 1) / k * p_nm2
        dp_n = dp_nm2 + (2 * k - 1) * p_nm1
        p_nm2, p_nm1 = p_nm1, p_n
        dp_nm2, dp_nm1 = dp_nm1, dp_n
    k = N + 1
    p_np1 = (2 * k - 1) / k * x * p_nm1 - (k - 1) / k * p_nm2
    dp_np1 = dp_nm2 + (2 * k - 1) * p_nm1
    return p_np1 - p_nm2, dp_np1 - dp_nm2, p_nm1


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def legendre_gauss_lobatto(N: int) -> QuadratureRule:
    """LGL nodes (roots of (1 - x^2) P_N'(x)) and weights 2 / (N (N+1) P_N(x_j)^2).

    Interior nodes come from Newton iteration started at the
    Chebyshev-Gauss-Lobatto points; the rule is symmetrised afterwards.
    """
    if int(N) != N or N < 1:
        raise InvalidOrderError(f"polynomial order must be >= 1, got {N!r}")
    N = int(N)
    nodes = np.empty(N + 1)
    nodes[0], nodes[N] = -1.0, 1.0
    if N > 1:
        # Only the lower half is iterated; symmetry fills the rest.
        half = (N + 1) // 2
        x = -np.cos(np.pi * np.arange(1, half) / N)
        for _ in range(_NEWTON_MAXITER):
            q, dq, _ = _lobatto_function(N, x)
            delta = -q / dq
            x = x + delta
            if np.max(np.abs(delta), initial=0.0) <= _NEWTON_TOL * np.max(np.abs(x), initial=1.0):
                break
        nodes[1:half] = x
        nodes[N - half + 1:N] = -x[::-1]
        if N % 2 == 0:
            nodes[N // 2] = 0.0
    p_n, _ = legendre(N, nodes)
    weights = 2.0 / (N * (N + 1) * p_n**2)
    weights = 0.5 * (weights + weights[::-1])
    return QuadratureRule(order=N, nodes=nodes, weights=weights, bary=barycentric_weights(nodes))


def lagrange_eval(rule: QuadratureRule, j: int, x: float) -> float:
    """Value of the j-th Lagrange basis polynomial at ``x`` (barycentric form)."""
    if not 0 <= j <= rule.order:
        raise IndexError(f"basis index {j} out of range 0..{rule.order}")
    return float(interpolation_matrix(rule, np.atleast_1d(float(x)))[0, j])


def interpolation_matrix(rule: QuadratureRule, x) -> np.ndarray:
    """Matrix ``T`` with ``T[p, j] = l_j(x_p)``; rows at nodes are exact unit vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    diff = x[:, None] - rule.nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = rule.bary[None, :] / diff
        t = t / t.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    t[hit] = exact[hit].astype(float)
    return t


def interpolate(rule: QuadratureRule, values, x) -> np.ndarray:
    """Evaluate the interpolant of nodal ``values`` (leading axis = nodes) at ``x``."""
    return np.tensordot(interpolation_matrix(rule, x), np.asarray(values, dtype=float), axes=(1, 0))


def derivative_matrix(rule: QuadratureRule) -> np.ndarray:
    """``D[i, j] = l_j'(x_i)``, diagonal from the negative-sum trick."""
    x, w = rule.nodes, rule.bary
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def build_operator_set(rule: QuadratureRule) -> OperatorSet:
    D = derivative_matrix(rule)
    w = rule.weights
    M = np.diag(w)
    Q = M @ D
    B = np.zeros_like(D)
    B[0, 0], B[-1, -1] = -1.0, 1.0
    S = np.zeros_like(D)
    S[0, 0], S[-1, -1] = 1.0 / w[0], -1.0 / w[-1]
    Dhat = -(Q.T) / w[:, None]
    for a in (D, M, Q, B, S, Dhat):
        a.flags.writeable = False
    return OperatorSet(rule=rule, D=D, M=M, Q=Q, B=B, S=S, Dhat=Dhat)


def operators(N: int) -> OperatorSet:
    """Shorthand for ``build_operator_set(legendre_gauss_lobatto(N))``."""
    return build_operator_set(legendre_gauss_lobatto(N))
