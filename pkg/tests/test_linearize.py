"""Variational systems along reference trajectories."""

from types import SimpleNamespace

import numpy as np
import pytest

from delyap.discretize import (build_dde_system, build_re_system,
                               equilibrium_state, initial_state, output_row)
from delyap.linearize import (fd_jacobian, linearize_along,
                              reference_trajectory)
from delyap.models import DDEModel, quad_re, quad_re_periodic_solution
from delyap.odeint import Trajectory


@pytest.fixture(scope="module")
def persol_var():
    system = build_re_system(quad_re(4.0), 10)
    w0 = initial_state(system, lambda th: quad_re_periodic_solution(4.0, th))
    traj = reference_trajectory(system, w0, span=8.0, transient=0.0,
                                margin=2.0, rtol=1e-8, atol=1e-10)
    return system, traj, linearize_along(system, traj)


def test_matrix_matches_fd_along_orbit(persol_var):
    system, traj, var = persol_var
    for t in np.linspace(0.3, 7.7, 10):
        a = var.matrix(t)
        fd = fd_jacobian(system, t, traj.eval(t))
        scale = 1.0 + np.max(np.abs(a))
        assert np.max(np.abs(a - fd)) <= 1e-5 * scale


def test_fd_jacobian_recovers_linear_rhs():
    rng = np.random.default_rng(11)
    b_mat = rng.standard_normal((6, 6))
    shim = SimpleNamespace(rhs=lambda t, w: b_mat @ w)
    jac = fd_jacobian(shim, 0.0, rng.standard_normal(6))
    assert np.max(np.abs(jac - b_mat)) <= 1e-9


def test_fd_jacobian_of_constant_rhs_is_zero():
    shim = SimpleNamespace(rhs=lambda t, w: np.ones(4))
    assert np.max(np.abs(fd_jacobian(shim, 0.0, np.zeros(4)))) <= 1e-12


def test_fd_jacobian_matches_analytic_on_model():
    system = build_re_system(quad_re(4.0), 9)
    rng = np.random.default_rng(3)
    w = rng.uniform(-0.4, 0.4, size=system.n)
    fd = fd_jacobian(system, 0.0, w)
    assert np.max(np.abs(fd - system.jacobian(0.0, w))) <= 1e-5


def test_constant_reference_gives_constant_matrix():
    model = quad_re(3.0)
    system = build_re_system(model, 10)
    w_eq = equilibrium_state(system, model.equilibria[1])
    # a rest point stored as an exactly constant trajectory
    traj = Trajectory(np.array([0.0, 5.0, 10.0]),
                      np.tile(w_eq, (3, 1)),
                      np.zeros((2, 7, system.n)))
    var = linearize_along(system, traj)
    samples = [var.matrix(t) for t in (0.0, 1.3, 4.999, 7.7, 10.0)]
    for a in samples[1:]:
        assert np.max(np.abs(a - samples[0])) <= 1e-12


def test_periodic_orbit_gives_periodic_matrix():
    system = build_re_system(quad_re(4.0), 20)
    w0 = initial_state(system, lambda th: quad_re_periodic_solution(4.0, th))
    traj = reference_trajectory(system, w0, span=12.0, transient=0.0,
                                margin=0.0, rtol=1e-9, atol=1e-11)
    var = linearize_along(system, traj)
    for t in (0.5, 1.5, 2.5, 3.5):
        diff = np.max(np.abs(var.matrix(t + 4.0) - var.matrix(t)))
        assert diff <= 1e-5


def test_dimension_mismatch_rejected(persol_var):
    _, traj, _ = persol_var
    other = build_re_system(quad_re(4.0), 7)
    with pytest.raises(ValueError):
        linearize_along(other, traj)


def test_reference_window_and_transient():
    model = quad_re(3.0)
    system = build_re_system(model, 10)
    w0 = initial_state(system, 0.2)
    traj = reference_trajectory(system, w0, span=20.0, transient=150.0,
                                margin=30.0)
    assert traj.t0 == 0.0
    assert traj.t1 == pytest.approx(50.0)
    # gamma = 3 sits below the oscillation threshold, so 150 units of
    # transient land the window on the stable equilibrium
    x0 = output_row(system) @ traj.ys[0]
    assert abs(x0 - 2.0 / 3.0) <= 1e-3


def test_kernel_context_presence(persol_var):
    _, _, var = persol_var
    assert var.kernel_ctx is not None

    model = DDEModel("decay", 1.0, lambda hist: -hist(0.0))
    system = build_dde_system(model, 4)
    traj = reference_trajectory(system, np.zeros(system.n), span=2.0,
                                transient=0.0, margin=1.0)
    assert linearize_along(system, traj).kernel_ctx is None
    assert var.t_max == pytest.approx(10.0)
