"""Collocation of renewal, delay-differential and coupled systems."""

import numpy as np
import pytest

from delyap.discretize import (build_coupled_system, build_dde_system,
                               build_re_system, equilibrium_state,
                               initial_state, output_row,
                               re_initial_vector, reconstruct_re_state)
from delyap.linearize import reference_trajectory
from delyap.models import (DDEModel, cannibalism_re, logistic_daphnia,
                           quad_re, quad_re_periodic_solution)
from delyap.oracle import equilibrium_les

DEGREES = (5, 10, 15, 20)


@pytest.mark.parametrize("m", DEGREES)
def test_re_equilibria_are_rest_points(m):
    for model in (quad_re(3.0), quad_re(0.5), cannibalism_re(5.0)):
        system = build_re_system(model, m)
        for eq in model.equilibria:
            state = equilibrium_state(system, eq)
            res = np.max(np.abs(system.rhs(0.0, state)))
            assert res <= 1e-10, f"{model.name} {eq.label} M={m}: {res}"


def test_quad_re_equilibrium_residual_tight():
    system = build_re_system(quad_re(3.0), 12)
    eq = quad_re(3.0).equilibria[1]
    state = equilibrium_state(system, eq)
    assert np.max(np.abs(system.rhs(0.0, state))) <= 1e-12


@pytest.mark.parametrize("m", DEGREES)
def test_coupled_equilibria_are_rest_points(m):
    model = logistic_daphnia(1.25)
    system = build_coupled_system(model, m, m)
    for eq in model.equilibria:
        state = equilibrium_state(system, eq)
        assert np.max(np.abs(system.rhs(0.0, state))) <= 1e-10


def test_coupled_equilibrium_state_structure():
    model = logistic_daphnia(1.25)
    system = build_coupled_system(model, 6, 4)
    b_bar, s_bar = model.equilibria[-1].state
    state = equilibrium_state(system, model.equilibria[-1])
    assert state.shape == (6 + 4 + 1,)
    # U block: antiderivative of the constant consumer value, vanishing at 0
    assert np.allclose(state[:6], b_bar * system.mesh_x.nodes[1:], atol=1e-14)
    # V block: constant resource value
    assert np.allclose(state[6:], s_bar, atol=1e-14)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(2)
    re_sys = build_re_system(quad_re(4.0), 8)
    co_sys = build_coupled_system(logistic_daphnia(1.1), 6, 5)
    for system in (re_sys, co_sys):
        for _ in range(10):
            w = rng.uniform(-0.5, 0.5, size=system.n)
            jac = system.jacobian(0.0, w)
            fd = _fd(system.rhs, w)
            scale = 1.0 + np.max(np.abs(jac))
            assert np.max(np.abs(jac - fd)) <= 1e-5 * scale


def _fd(rhs, w, h=1e-7):
    n = w.size
    out = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h * max(1.0, abs(w[j]))
        out[:, j] = (rhs(0.0, w + e) - rhs(0.0, w - e)) / (2 * e[j])
    return out


def test_dde_without_delay_recovers_plain_decay():
    # rule psi -> -psi(0) is an undelayed linear ODE; the collocated
    # system's dominant eigenvalue must sit at -1
    model = DDEModel("decay", 1.0, lambda hist: -hist(0.0))
    system = build_dde_system(model, 8)
    res = equilibrium_les(system, np.zeros(system.n))
    assert abs(res.exponents[0] - (-1.0)) <= 1e-6


def test_dde_delayed_feedback_known_root():
    # y'(t) = -(pi/2) y(t-1) has a root pair exactly on the imaginary axis
    model = DDEModel("hayes", 1.0, lambda hist: -(np.pi / 2) * hist(-1.0))
    system = build_dde_system(model, 20)
    res = equilibrium_les(system, np.zeros(system.n))
    assert abs(res.exponents[0]) <= 1e-8


def test_initial_vector_is_antiderivative():
    system = build_re_system(quad_re(4.0), 9)
    c = 0.37
    u = np.full(9, c)
    vec = re_initial_vector(system, u)
    nodes = system.mesh_x.nodes[1:]
    assert np.max(np.abs(vec - c * nodes)) <= 1e-10
    # differentiating the integrated state recovers the values
    dmat = system.mesh_x.diff[1:, 1:]
    assert np.max(np.abs(dmat @ vec - u)) <= 1e-10


def test_reconstruction_inverts_initial_state():
    system = build_re_system(quad_re(4.0), 9)
    c = -0.8
    w = initial_state(system, c)
    for theta in (-2.9, -1.5, -0.01, 0.0):
        assert abs(reconstruct_re_state(system, w, theta) - c) <= 1e-10


def test_output_row_equals_reconstruction_at_zero():
    system = build_re_system(quad_re(4.0), 11)
    rng = np.random.default_rng(4)
    w = rng.standard_normal(system.n)
    row = output_row(system)
    assert row @ w == pytest.approx(
        reconstruct_re_state(system, w, 0.0), abs=1e-12)


def test_initial_state_callable_matches_sampled_constant():
    system = build_re_system(quad_re(4.0), 7)
    assert np.allclose(initial_state(system, 0.2),
                       initial_state(system, lambda th: 0.2), atol=1e-12)


def test_coupled_initial_state_blocks():
    system = build_coupled_system(logistic_daphnia(1.2), 5, 4)
    w = initial_state(system, 0.3, 0.9)
    assert w.shape == (10,)
    assert np.allclose(w[5:], 0.9)


def test_quadrature_mesh_covers_delay_window_only():
    model = quad_re(4.0)
    system = build_re_system(model, 9)
    assert system.quad_mesh.a == -model.tau2
    assert system.quad_mesh.b == -model.tau1
    assert system.quad_mesh.degree == 18  # default: twice the state degree


def test_layouts_and_dimensions():
    re_sys = build_re_system(quad_re(4.0), 12)
    assert re_sys.n == 12 and re_sys.layout.kind == "re"
    co_sys = build_coupled_system(logistic_daphnia(1.0), 7, 9)
    assert co_sys.n == 17 and co_sys.layout.kind == "coupled"
    assert co_sys.layout.m_x == 7 and co_sys.layout.m_y == 9


def test_builder_validation():
    with pytest.raises(ValueError):
        build_re_system(quad_re(4.0), 1)
    with pytest.raises(TypeError):
        build_re_system(logistic_daphnia(1.0), 8)
    with pytest.raises(ValueError):
        build_coupled_system(logistic_daphnia(1.0), 5, 0)


def test_trajectory_error_decreases_with_degree():
    # started on the closed-form periodic solution, higher collocation
    # degrees must track it better until the integrator tolerance bites
    model = quad_re(4.0)
    phi = lambda th: quad_re_periodic_solution(4.0, th)
    grid = 0.1 * np.arange(401)
    errs = []
    for m in (6, 12, 18):
        system = build_re_system(model, m)
        traj = reference_trajectory(system, initial_state(system, phi),
                                    span=40.0, transient=0.0, margin=0.0,
                                    rtol=1e-9, atol=1e-11)
        x = traj.eval_many(grid) @ output_row(system)
        errs.append(np.max(np.abs(x - quad_re_periodic_solution(4.0, grid))))
    assert errs[0] > 10 * errs[1] > 100 * errs[2]
