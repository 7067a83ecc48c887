"""Independent reference computations: spectra, monodromy, trapezoid."""

import numpy as np
import pytest
from scipy.optimize import brentq

from delyap.discretize import (build_re_system, equilibrium_state,
                               initial_state, output_row)
from delyap.linearize import (VariationalSystem, linearize_along,
                              reference_trajectory)
from delyap.models import (QUAD_RE_HOPF_GAMMA, EquilibriumInfo, REModel,
                           quad_re, quad_re_periodic_solution)
from delyap.oracle import equilibrium_les, floquet_les, trapezoidal_re_solve


def _characteristic_root(c, lo, hi):
    # dominant real root of 1 = c * (exp(-s) - exp(-3 s)) / s, the
    # linearization of the renewal rule x(t) = int_1^3 f'(xbar) x(t-a) da
    def g(s):
        return 1.0 - c * (np.exp(-s) - np.exp(-3.0 * s)) / s
    return brentq(g, lo, hi, xtol=1e-14)


def test_equilibrium_spectrum_matches_characteristic_root():
    model = quad_re(0.5)
    system = build_re_system(model, 40)
    res = equilibrium_les(system, equilibrium_state(system, model.equilibria[0]))
    root = _characteristic_root(0.25, -1.0, -0.05)
    assert abs(res.exponents[0] - root) <= 1e-8


def test_equilibrium_spectrum_second_model_point():
    model = quad_re(3.0)
    system = build_re_system(model, 40)
    res = equilibrium_les(system, equilibrium_state(system, model.equilibria[1]))
    # f'(xbar) = gamma/2 * (1 - 2 xbar) = (2 - gamma)/2
    lam = np.max(res.exponents)
    assert lam < 0  # stable below the oscillation threshold
    # real part of the dominant complex pair is tracked by the full
    # eigenvalue set; cross-check against the QR-free residual instead
    evs = res.eigenvalues
    top = evs[np.argmax(evs.real)]
    cval = -0.5 * (np.exp(-top) - np.exp(-3.0 * top)) / top
    assert abs(1.0 - cval) <= 1e-8


def test_equilibrium_les_requires_rest_point():
    model = quad_re(3.0)
    system = build_re_system(model, 12)
    state = equilibrium_state(system, model.equilibria[1]) + 0.05
    with pytest.raises(ValueError):
        equilibrium_les(system, state)


def test_dominant_exponent_vanishes_at_threshold():
    model = quad_re(QUAD_RE_HOPF_GAMMA)
    system = build_re_system(model, 20)
    res = equilibrium_les(system, equilibrium_state(system, model.equilibria[1]))
    assert abs(res.exponents[0]) <= 1e-2


def test_floquet_trivial_multiplier():
    # a periodic orbit's variational flow has multiplier 1 along the orbit
    system = build_re_system(quad_re(4.0), 15)
    w0 = initial_state(system, lambda th: quad_re_periodic_solution(4.0, th))
    traj = reference_trajectory(system, w0, span=4.0, transient=0.0,
                                margin=1.0, rtol=1e-9, atol=1e-12)
    var = linearize_along(system, traj)
    res = floquet_les(var, 4.0)
    assert np.min(np.abs(res.eigenvalues - 1.0)) <= 1e-3
    assert abs(res.exponents[0]) <= 1e-3
    assert res.period == 4.0
    # the orbit is attracting: every other multiplier sits inside the disc
    assert np.sum(np.abs(res.eigenvalues) > 1.0 + 1e-6) == 0


def test_floquet_zero_modulus_sentinel():
    # near-pure relative control lets the fast mode decay to e^-80, far
    # below the relative-modulus floor, instead of flooring at atol
    var = VariationalSystem(2, lambda t: np.diag([-80.0, 0.0]))
    res = floquet_les(var, 1.0, rtol=1e-9, atol=1e-200)
    assert res.exponents[-1] == -np.inf
    assert res.n_zero_modulus == 1
    assert abs(res.exponents[0]) <= 1e-8


def test_floquet_validation():
    var = VariationalSystem(2, lambda t: np.eye(2), t_max=2.0)
    with pytest.raises(ValueError):
        floquet_les(var, 0.0)
    with pytest.raises(ValueError):
        floquet_les(var, 4.0)


def test_trapezoid_preserves_constant_solution():
    model = quad_re(4.0)
    times, x = trapezoidal_re_solve(model, 16, lambda t: 0.75, 10.0)
    assert times[0] == 0.0 and times[-1] >= 10.0
    assert np.max(np.abs(x - 0.75)) <= 1e-12


def test_trapezoid_is_second_order():
    gamma = 4.0
    model = quad_re(gamma)
    phi = lambda t: quad_re_periodic_solution(gamma, t)
    errs = []
    for r in (20, 40, 80):
        times, x = trapezoidal_re_solve(model, r, phi, 20.0)
        errs.append(np.max(np.abs(x - quad_re_periodic_solution(gamma, times))))
    assert 3.4 <= errs[0] / errs[1] <= 4.6
    assert 3.4 <= errs[1] / errs[2] <= 4.6


def test_trapezoid_grid_validation():
    fun = lambda x: 0.25 * x
    odd = REModel("odd", 1.0, 2.5, fun, lambda x: 0.25, ())
    with pytest.raises(ValueError):
        trapezoidal_re_solve(odd, 3, lambda t: 1.0, 5.0)  # h does not divide tau2
    with pytest.raises(ValueError):
        trapezoidal_re_solve(quad_re(4.0), 0, lambda t: 1.0, 5.0)
    with pytest.raises(TypeError):
        trapezoidal_re_solve(object(), 8, lambda t: 1.0, 5.0)
    degenerate = REModel("deg", 0.0, 2.0, fun, lambda x: 0.25, ())
    with pytest.raises(ValueError):
        trapezoidal_re_solve(degenerate, 8, lambda t: 1.0, 5.0)


def test_collocation_agrees_with_trapezoid():
    # two unrelated discretizations of the same model must land on the
    # same solution; run both from the known periodic history
    gamma = 4.0
    model = quad_re(gamma)
    phi = lambda t: quad_re_periodic_solution(gamma, t)
    times, x_trap = trapezoidal_re_solve(model, 64, phi, 100.0)
    keep = times <= 100.0
    system = build_re_system(model, 15)
    traj = reference_trajectory(system, initial_state(system, phi),
                                span=100.0, transient=0.0, margin=0.5,
                                rtol=1e-8, atol=1e-10)
    x_coll = traj.eval_many(times[keep]) @ output_row(system)
    assert np.max(np.abs(x_coll - x_trap[keep])) <= 1e-3
