"""Chebyshev collocation meshes and the interpolation machinery on them.

A mesh bundles the Chebyshev extrema of degree M mapped to an interval
[a, b] together with the spectral differentiation matrix, barycentric
interpolation weights, and Clenshaw-Curtis quadrature weights.  Everything
downstream (system discretization, quadrature of delayed terms, state
reconstruction) is expressed through the operations in this module.
"""

from dataclasses import dataclass

import numpy as np


class ExtrapolationError(ValueError):
    """Evaluation point lies outside the mesh interval."""


@dataclass(frozen=True)
class SpectralMesh:
    """Chebyshev extrema mesh of degree M on [a, b].

    Attributes
    ----------
    degree : int
        Polynomial degree M; the mesh has M + 1 nodes.
    a, b : float
        Interval endpoints, a < b.
    nodes : ndarray, shape (M+1,)
        Collocation nodes, descending from b to a.
    diff : ndarray, shape (M+1, M+1)
        Differentiation matrix: (diff @ v)[i] is the derivative at
        nodes[i] of the polynomial interpolating v on the mesh.
    bary_weights : ndarray, shape (M+1,)
        Barycentric weights (common scaling irrelevant).
    cc_weights : ndarray, shape (M+1,)
        Clenshaw-Curtis quadrature weights; sum equals b - a.
    """

    degree: int
    a: float
    b: float
    nodes: np.ndarray
    diff: np.ndarray
    bary_weights: np.ndarray
    cc_weights: np.ndarray


def _cc_weights(m):
    # Explicit cosine-sum form of the Clenshaw-Curtis weights on [-1, 1];
    # O(M^2) evaluation is fine for the degrees used here.
    j = np.arange(m + 1)
    c = np.where((j == 0) | (j == m), 1.0, 2.0)
    ks = np.arange(1, m // 2 + 1)
    if ks.size:
        bk = np.where(2 * ks == m, 1.0, 2.0)
        # sum_k b_k * cos(2k j pi / m) / (4k^2 - 1)
        ang = np.cos(2.0 * np.outer(j, ks) * np.pi / m)
        s = ang @ (bk / (4.0 * ks**2 - 1.0))
    else:
        s = np.zeros(m + 1)
    return (c / m) * (1.0 - s)


def chebyshev_mesh(degree, a, b):
    """Build the Chebyshev extrema mesh of the given degree on [a, b].

    Nodes are x_j = cos(j pi / M) mapped affinely to [a, b], stored in
    descending order (nodes[0] = b, nodes[M] = a).  The differentiation
    matrix uses the standard trick of computing the diagonal as the
    negative row sum of the off-diagonal entries, which enforces exact
    differentiation of constants.
    """
    m = int(degree)
    if m < 1:
        raise ValueError(f"mesh degree must be >= 1, got {degree}")
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ValueError(f"invalid interval [{a}, {b}]")

    x = np.cos(np.pi * np.arange(m + 1) / m)
    csign = np.hstack(([2.0], np.ones(m - 1), [2.0])) * (-1.0) ** np.arange(m + 1)
    dx = x[:, None] - x[None, :]
    d = np.outer(csign, 1.0 / csign) / (dx + np.eye(m + 1))
    d -= np.diag(d.sum(axis=1))

    nodes = a + (b - a) * (x + 1.0) / 2.0
    nodes[0] = b
    nodes[m] = a
    d *= 2.0 / (b - a)

    bary = (-1.0) ** np.arange(m + 1)
    bary[0] *= 0.5
    bary[m] *= 0.5

    cc = _cc_weights(m) * (b - a) / 2.0
    return SpectralMesh(m, float(a), float(b), nodes, d, bary, cc)


def _check_domain(mesh, theta, allow_extrapolation):
    if allow_extrapolation:
        return
    slack = 1e-12 * (mesh.b - mesh.a)
    if theta < mesh.a - slack or theta > mesh.b + slack:
        raise ExtrapolationError(
            f"theta={theta} outside [{mesh.a}, {mesh.b}]")


def barycentric_eval(mesh, values, theta, allow_extrapolation=False):
    """Evaluate the interpolating polynomial of node values at theta.

    ``values`` may be shape (M+1,) or (M+1, k) for simultaneous evaluation
    of several interpolants.  A point that coincides with a node (exact
    float equality) returns the stored value, avoiding the 0/0 in the
    barycentric formula.
    """
    theta = float(theta)
    _check_domain(mesh, theta, allow_extrapolation)
    values = np.asarray(values, dtype=float)
    d = theta - mesh.nodes
    hit = np.nonzero(d == 0.0)[0]
    if hit.size:
        return values[hit[0]].copy() if values.ndim > 1 else float(values[hit[0]])
    q = mesh.bary_weights / d
    out = q @ values / q.sum()
    return out if values.ndim > 1 else float(out)


def interpolation_matrix(mesh, thetas, allow_extrapolation=False):
    """Matrix B with B[i, j] = l_j(thetas[i]) for the mesh's Lagrange basis.

    Rows for points that hit a node exactly are unit vectors.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    for th in thetas:
        _check_domain(mesh, th, allow_extrapolation)
    d = thetas[:, None] - mesh.nodes[None, :]
    exact_i, exact_j = np.nonzero(d == 0.0)
    d[exact_i, :] = 1.0  # placeholder, rows overwritten below
    q = mesh.bary_weights[None, :] / d
    with np.errstate(divide="ignore", invalid="ignore"):
        # placeholder rows can have a zero weight sum; they are replaced
        out = q / q.sum(axis=1)[:, None]
    out[exact_i, :] = 0.0
    out[exact_i, exact_j] = 1.0
    return out


def lagrange_derivative_eval(mesh, j, theta, allow_extrapolation=False):
    """Evaluate l_j'(theta) for the j-th Lagrange basis polynomial.

    l_j' has degree M - 1, so interpolating its node values (column j of
    the differentiation matrix) on the mesh reproduces it exactly.
    """
    if not 0 <= j <= mesh.degree:
        raise ValueError(f"basis index {j} out of range 0..{mesh.degree}")
    return barycentric_eval(mesh, mesh.diff[:, j], theta, allow_extrapolation)


def clenshaw_curtis_integrate(mesh, values):
    """Clenshaw-Curtis approximation of the integral over [a, b].

    Exact for polynomials of degree <= M; ``values`` may be (M+1,) or
    (M+1, k).
    """
    values = np.asarray(values, dtype=float)
    out = mesh.cc_weights @ values
    return float(out) if values.ndim == 1 else out
