"""Adaptive embedded Runge-Kutta stepping and its continuous extension."""

import numpy as np
import pytest

from delyap.odeint import (DP_A, DP_B5, DP_P, IntegrationError, IvpProblem,
                           RhsEvaluationError, StepSizeUnderflowError,
                           Trajectory, initial_step_heuristic, integrate,
                           integrate_fixed_observer)


def decay(t, y):
    return -y


def rotation(t, y):
    return np.array([y[1], -y[0]])


def test_tableau_consistency():
    # stage nodes are the row sums; the last row duplicates the 5th-order
    # weights, which is what makes the final stage reusable
    assert np.allclose(DP_A.sum(axis=1)[1:], [0.2, 0.3, 0.8, 8 / 9, 1.0, 1.0])
    assert np.array_equal(DP_A[6], DP_B5)
    # the dense-output polynomial reaches the endpoint state at th = 1
    assert np.allclose(DP_P @ np.ones(4), DP_B5, atol=1e-15)


def test_exponential_decay_accuracy():
    prob = IvpProblem(decay, 0.0, 1.0, np.array([1.0]), rtol=1e-6, atol=1e-7)
    traj = integrate(prob)
    assert abs(traj.ys[-1, 0] - np.exp(-1.0)) <= 1e-7


def test_rotation_full_turn():
    prob = IvpProblem(rotation, 0.0, 2 * np.pi, np.array([1.0, 0.0]),
                      rtol=1e-8, atol=1e-10)
    traj = integrate(prob)
    assert np.max(np.abs(traj.ys[-1] - [1.0, 0.0])) <= 1e-5


def test_final_time_hit_exactly():
    prob = IvpProblem(decay, 0.0, 0.731, np.array([1.0]))
    traj = integrate(prob)
    assert traj.ts[-1] == 0.731
    assert traj.ts[0] == 0.0


def test_dense_output_matches_stored_states():
    prob = IvpProblem(decay, 0.0, 2.0, np.array([1.0, 2.0]))
    traj = integrate(prob)
    for i in (0, len(traj.ts) // 2, len(traj.ts) - 1):
        assert np.array_equal(traj.eval(traj.ts[i]), traj.ys[i])


def test_dense_output_continuous_at_boundaries():
    prob = IvpProblem(decay, 0.0, 3.0, np.array([1.0]))
    traj = integrate(prob)
    for i in range(1, len(traj.ts) - 1):
        t = traj.ts[i]
        eps = 1e-10 * (traj.ts[i + 1] - traj.ts[i])
        jump = abs(traj.eval(t - eps)[0] - traj.eval(t + eps)[0])
        assert jump <= 1e-9 * (1.0 + abs(traj.ys[i, 0]))


def test_dense_output_midstep_accuracy():
    rtol = atol = 1e-6
    prob = IvpProblem(decay, 0.0, 2.0, np.array([1.0]), rtol=rtol, atol=atol)
    traj = integrate(prob)
    mids = 0.5 * (traj.ts[:-1] + traj.ts[1:])
    vals = traj.eval_many(mids)[:, 0]
    assert np.max(np.abs(vals - np.exp(-mids))) <= 10 * (rtol + atol)


def test_dense_eval_at_half():
    prob = IvpProblem(decay, 0.0, 1.0, np.array([1.0]))
    traj = integrate(prob)
    assert abs(traj.eval(0.5)[0] - np.exp(-0.5)) <= 1e-6


def test_observer_grid_values():
    prob = IvpProblem(decay, 0.0, 1.0, np.array([1.0]))
    got = integrate_fixed_observer(prob, [0.0, 0.5, 1.0])[:, 0]
    assert np.max(np.abs(got - np.exp([-0.0, -0.5, -1.0]))) <= 1e-6


def test_fixed_step_mode_shows_fifth_order():
    # sky-high tolerances accept every step; first_step/max_step force h
    def err_at(h):
        prob = IvpProblem(decay, 0.0, 1.0, np.array([1.0]), rtol=1e12,
                          atol=1e12, max_step=h, first_step=h)
        traj = integrate(prob, dense=False)
        return abs(traj.ys[-1, 0] - np.exp(-1.0))

    ratio = err_at(0.1) / err_at(0.05)
    assert 24.0 <= ratio <= 40.0


def test_eval_outside_range_rejected():
    prob = IvpProblem(decay, 0.0, 1.0, np.array([1.0]))
    traj = integrate(prob)
    with pytest.raises(ValueError):
        traj.eval(1.5)
    with pytest.raises(ValueError):
        traj.eval(-0.5)


def test_blowup_reports_underflow_near_singularity():
    prob = IvpProblem(lambda t, y: y * y, 0.0, 2.0, np.array([1.0]))
    with pytest.raises(StepSizeUnderflowError) as exc:
        integrate(prob)
    # 1/(1-t) escapes at t = 1
    assert 0.9 < exc.value.t < 1.1


def test_nonfinite_initial_rhs_rejected():
    prob = IvpProblem(lambda t, y: y * np.nan, 0.0, 1.0, np.array([1.0]))
    with pytest.raises(RhsEvaluationError):
        integrate(prob)


def test_problem_validation():
    with pytest.raises(ValueError):
        IvpProblem(decay, 1.0, 0.0, np.array([1.0]))
    with pytest.raises(ValueError):
        IvpProblem(decay, 0.0, 1.0, np.array([1.0]), rtol=-1.0)
    with pytest.raises(ValueError):
        IvpProblem(decay, 0.0, 1.0, np.array([np.inf]))


def test_initial_step_heuristic_sane():
    y0 = np.array([1.0])
    f0 = decay(0.0, y0)
    h = initial_step_heuristic(decay, 0.0, 1.0, y0, f0, 1e-6, 1e-7, np.inf)
    assert 0.0 < h <= 1.0


def test_trajectory_without_dense_cannot_interpolate():
    prob = IvpProblem(decay, 0.0, 1.0, np.array([1.0]))
    traj = integrate(prob, dense=False)
    assert traj.ks.shape[0] == 0
    with pytest.raises(ValueError):
        traj.eval(0.123456)
