"""Mesh construction, differentiation, interpolation and quadrature."""

import numpy as np
import pytest

from delyap.spectral import (ExtrapolationError, barycentric_eval,
                             chebyshev_mesh, clenshaw_curtis_integrate,
                             interpolation_matrix, lagrange_derivative_eval)


def test_nodes_descending_with_exact_endpoints():
    mesh = chebyshev_mesh(8, -3.0, 0.0)
    assert mesh.nodes[0] == 0.0
    assert mesh.nodes[-1] == -3.0
    assert np.all(np.diff(mesh.nodes) < 0)
    assert mesh.nodes.shape == (9,)


@pytest.mark.parametrize("degree", [2, 5, 8, 13])
@pytest.mark.parametrize("a,b", [(-1.0, 1.0), (-3.0, -1.0)])
def test_differentiation_exact_on_monomials(degree, a, b):
    mesh = chebyshev_mesh(degree, a, b)
    t = mesh.nodes
    for k in range(degree + 1):
        v = t**k
        dv = np.zeros_like(t) if k == 0 else k * t ** (k - 1)
        err = np.max(np.abs(mesh.diff @ v - dv))
        assert err <= 1e-10 * max(1.0, np.max(np.abs(v)))


def test_quadrature_exact_on_monomials():
    for degree in (2, 6, 11):
        mesh = chebyshev_mesh(degree, -3.0, 0.0)
        for k in range(degree + 1):
            exact = (0.0 ** (k + 1) - (-3.0) ** (k + 1)) / (k + 1)
            got = clenshaw_curtis_integrate(mesh, mesh.nodes**k)
            assert abs(got - exact) <= 1e-12 * max(1.0, abs(exact))


def test_quadrature_odd_function_vanishes():
    mesh = chebyshev_mesh(7, -1.0, 1.0)
    assert abs(clenshaw_curtis_integrate(mesh, mesh.nodes)) <= 1e-14


def test_quadrature_degree_two_squares():
    mesh = chebyshev_mesh(2, -1.0, 1.0)
    assert clenshaw_curtis_integrate(mesh, mesh.nodes**2) == pytest.approx(
        2.0 / 3.0, abs=1e-14)


def test_quadrature_spectral_accuracy_on_exponential():
    mesh = chebyshev_mesh(16, -3.0, 0.0)
    exact = 1.0 - np.exp(-3.0)
    got = clenshaw_curtis_integrate(mesh, np.exp(mesh.nodes))
    assert abs(got - exact) <= 1e-12


def test_barycentric_reproduces_quadratic_everywhere():
    rng = np.random.default_rng(7)
    for degree in (2, 4, 9):
        mesh = chebyshev_mesh(degree, -2.0, 1.0)
        vals = mesh.nodes**2
        for theta in rng.uniform(-2.0, 1.0, size=30):
            assert abs(barycentric_eval(mesh, vals, theta) - theta**2) <= 1e-13


def test_barycentric_node_hit_returns_stored_value():
    mesh = chebyshev_mesh(6, -3.0, 0.0)
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(7)
    for j, th in enumerate(mesh.nodes):
        assert barycentric_eval(mesh, vals, th) == vals[j]


def test_barycentric_reproduces_random_polynomial():
    rng = np.random.default_rng(12)
    degree = 10
    mesh = chebyshev_mesh(degree, -3.0, 0.0)
    coeffs = rng.standard_normal(degree + 1)
    poly = np.polynomial.Polynomial(coeffs)
    vals = poly(mesh.nodes)
    thetas = rng.uniform(-3.0, 0.0, size=100)
    for th in thetas:
        exact = poly(th)
        assert abs(barycentric_eval(mesh, vals, th) - exact) <= 1e-12 * max(
            1.0, abs(exact))


def test_barycentric_matrix_valued_columns():
    mesh = chebyshev_mesh(5, -1.0, 0.0)
    vals = np.column_stack([mesh.nodes, mesh.nodes**2])
    out = barycentric_eval(mesh, vals, -0.4)
    assert out.shape == (2,)
    assert np.allclose(out, [-0.4, 0.16], atol=1e-13)


def test_extrapolation_rejected_and_slack_allowed():
    mesh = chebyshev_mesh(4, -1.0, 0.0)
    vals = mesh.nodes.copy()
    with pytest.raises(ExtrapolationError):
        barycentric_eval(mesh, vals, 0.5)
    with pytest.raises(ExtrapolationError):
        barycentric_eval(mesh, vals, -1.5)
    # sub-roundoff overshoot stays usable, explicit opt-in goes further
    barycentric_eval(mesh, vals, 1e-13)
    assert barycentric_eval(mesh, vals, 0.5, allow_extrapolation=True) == \
        pytest.approx(0.5, abs=1e-12)


def test_interpolation_matrix_partition_of_unity():
    mesh = chebyshev_mesh(9, -3.0, -1.0)
    thetas = np.linspace(-3.0, -1.0, 17)
    mat = interpolation_matrix(mesh, thetas)
    assert np.allclose(mat.sum(axis=1), 1.0, atol=1e-12)
    # rows at node hits are unit vectors
    mat2 = interpolation_matrix(mesh, mesh.nodes)
    assert np.allclose(mat2, np.eye(10), atol=0.0)


def test_lagrange_derivative_matches_differentiation_matrix():
    mesh = chebyshev_mesh(7, -3.0, 0.0)
    for j in (0, 3, 7):
        for i, th in enumerate(mesh.nodes):
            assert lagrange_derivative_eval(mesh, j, th) == pytest.approx(
                mesh.diff[i, j], abs=1e-12)


def test_lagrange_derivative_offnode_consistency():
    # sum_j p(node_j) l'_j(theta) must equal p'(theta)
    mesh = chebyshev_mesh(6, -2.0, 0.0)
    poly = np.polynomial.Polynomial([0.3, -1.0, 0.5, 0.25])
    vals = poly(mesh.nodes)
    dpoly = poly.deriv()
    for th in (-1.7, -0.9, -0.05):
        got = sum(vals[j] * lagrange_derivative_eval(mesh, j, th)
                  for j in range(7))
        assert got == pytest.approx(dpoly(th), abs=1e-11)


def test_degenerate_mesh_rejected():
    with pytest.raises(ValueError):
        chebyshev_mesh(0, -1.0, 0.0)
    with pytest.raises(ValueError):
        chebyshev_mesh(4, 0.0, 0.0)
    with pytest.raises(ValueError):
        chebyshev_mesh(4, 1.0, -1.0)
