"""Explicit Dormand-Prince 5(4) integration with dense output.

The embedded pair drives both the nonlinear trajectory integration and the
fundamental-matrix propagation inside the QR method, so the tableau and the
controller conventions are defined once here.  Error control uses the
componentwise scaled RMS norm; accepted steps store all seven stage
derivatives, from which the quartic continuous extension can be evaluated
anywhere inside the step.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# Dormand-Prince 5(4) tableau.  A is strictly lower triangular; row 6 of A
# equals B5, which makes the last stage FSAL.
DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
DP_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0],
])
DP_B5 = DP_A[6].copy()
DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                  -92097 / 339200, 187 / 2100, 1 / 40])

# Quartic continuous-extension coefficients: with K the (7, n) stage array
# of a step, y(t0 + th*h) = y0 + h * K.T @ (DP_P @ [th, th^2, th^3, th^4]).
DP_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
MAX_STEPS = 20_000_000


class IntegrationError(RuntimeError):
    """Base class for integration failures; ``t`` is the failure time."""

    def __init__(self, message, t):
        self.t = float(t)
        super().__init__(f"{message} (t={t:.6g})")


class StepSizeUnderflowError(IntegrationError):
    """Controller drove the step below the resolvable size (stiffness or
    blow-up)."""


class RhsEvaluationError(IntegrationError):
    """Right-hand side returned non-finite values at an accepted state."""


@dataclass
class IvpProblem:
    """Initial value problem y' = rhs(t, y) on [t0, tf], t0 < tf."""

    rhs: Callable[[float, np.ndarray], np.ndarray]
    t0: float
    tf: float
    y0: np.ndarray
    rtol: float = 1e-6
    atol: float = 1e-7
    max_step: float = np.inf
    first_step: float | None = None

    def __post_init__(self):
        self.y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        if not np.isfinite(self.y0).all():
            raise ValueError("y0 has non-finite entries")
        if not (np.isfinite(self.t0) and np.isfinite(self.tf) and self.t0 < self.tf):
            raise ValueError(f"need t0 < tf, got [{self.t0}, {self.tf}]")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")


def _rms(v):
    return float(np.sqrt(np.mean(v * v)))


def initial_step_heuristic(rhs, t0, tf, y0, f0, rtol, atol, max_step):
    """Standard two-probe starting-step estimate."""
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, tf - t0, max_step)
    f1 = np.asarray(rhs(t0 + h0, y0 + h0 * f0), dtype=float)
    d2 = _rms((f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, tf - t0, max_step)


def dp54_loop(rhs, t0, tf, y0, rtol, atol, max_step=np.inf, first_step=None,
              dense=True):
    """Adaptive DP54 integration; returns (ts, ys, ks) arrays.

    ts has one entry per accepted step boundary (ts[0] = t0, ts[-1] = tf,
    hit exactly by clipping the final step); ys the states there; ks the
    (7, n) stage derivatives of each step when ``dense`` is requested,
    otherwise an empty array.
    """
    y = np.array(y0, dtype=float)
    n = y.size
    t = float(t0)
    f = np.asarray(rhs(t, y), dtype=float)
    if not np.isfinite(f).all():
        raise RhsEvaluationError("non-finite right-hand side at initial state", t)
    h = first_step if first_step is not None else initial_step_heuristic(
        rhs, t0, tf, y, f, rtol, atol, max_step)
    h = min(h, tf - t0, max_step)

    ts = [t]
    ys = [y.copy()]
    ks_list = [] if dense else None
    k = np.empty((7, n))
    tiny = 1e-12 * (tf - t0)

    nsteps = 0
    while t < tf:
        nsteps += 1
        if nsteps > MAX_STEPS:
            raise IntegrationError("step budget exhausted", t)
        if h < tiny:
            raise StepSizeUnderflowError("step size underflow", t)
        if t + h > tf:
            h = tf - t

        k[0] = f
        broke = False
        for i in range(1, 7):
            yi = y + h * (DP_A[i, :i] @ k[:i])
            ki = np.asarray(rhs(t + DP_C[i] * h, yi), dtype=float)
            if not np.isfinite(ki).all():
                broke = True
                break
            k[i] = ki
        if broke:
            # non-finite trial stage: treat as a failed step and shrink
            h *= MIN_FACTOR
            continue

        y5 = y + h * (DP_B5 @ k)
        err_vec = h * ((DP_B5 - DP_B4) @ k)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = _rms(err_vec / sc)

        if err <= 1.0:
            t_new = t + h
            if dense:
                ks_list.append(k.copy())
            t = tf if t + h >= tf else t_new
            y = y5
            f = k[6]  # FSAL: row 6 of A equals B5, so k7 = rhs(t_new, y5)
            ts.append(t)
            ys.append(y.copy())
            factor = MAX_FACTOR if err == 0.0 else min(
                MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
            h = min(h * factor, max_step)
        else:
            h *= max(MIN_FACTOR, SAFETY * err ** -0.2)

    ts = np.array(ts)
    ys = np.array(ys)
    ks = np.array(ks_list) if dense else np.zeros((0, 7, n))
    return ts, ys, ks


@dataclass
class Trajectory:
    """Accepted-step history of one integration, with dense evaluation.

    Evaluation at a stored step time returns the stored state exactly;
    interior points use the quartic continuous extension of the step.
    """

    ts: np.ndarray
    ys: np.ndarray
    ks: np.ndarray
    _theta_pow: np.ndarray = field(default=None, repr=False)

    @property
    def t0(self):
        return float(self.ts[0])

    @property
    def t1(self):
        return float(self.ts[-1])

    @property
    def dim(self):
        return self.ys.shape[1]

    def eval(self, t):
        t = float(t)
        if t < self.ts[0] or t > self.ts[-1]:
            raise ValueError(
                f"t={t} outside trajectory range [{self.ts[0]}, {self.ts[-1]}]")
        i = int(np.searchsorted(self.ts, t, side="right")) - 1
        if i >= len(self.ts) - 1:
            i = len(self.ts) - 2
        if t == self.ts[i]:
            return self.ys[i].copy()
        if t == self.ts[i + 1]:
            return self.ys[i + 1].copy()
        if self.ks.shape[0] == 0:
            raise ValueError("trajectory stored without dense output")
        h = self.ts[i + 1] - self.ts[i]
        th = (t - self.ts[i]) / h
        p = DP_P @ np.array([th, th * th, th**3, th**4])
        return self.ys[i] + h * (self.ks[i].T @ p)

    def eval_many(self, times):
        times = np.asarray(times, dtype=float)
        out = np.empty((times.size, self.ys.shape[1]))
        for idx, t in enumerate(times.ravel()):
            out[idx] = self.eval(t)
        return out


def integrate(problem, dense=True):
    """Integrate an IvpProblem and return its Trajectory."""
    ts, ys, ks = dp54_loop(problem.rhs, problem.t0, problem.tf, problem.y0,
                           problem.rtol, problem.atol, problem.max_step,
                           problem.first_step, dense)
    return Trajectory(ts, ys, ks)


def trajectory_eval(trajectory, t):
    """Dense evaluation of a stored trajectory at time t."""
    return trajectory.eval(t)


def integrate_fixed_observer(problem, times):
    """Integrate once, then evaluate the dense output on a fixed grid.

    Equivalent to ``integrate(problem).eval_many(times)``.
    """
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < problem.t0 or times.max() > problem.tf):
        raise ValueError("observer times outside integration interval")
    traj = integrate(problem, dense=True)
    return traj.eval_many(times)
