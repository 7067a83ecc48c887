"""Lyapunov exponents by the discrete QR method.

The fundamental matrix of the linear system Gamma' = A(t) Gamma is
propagated one embedded Dormand-Prince step per re-orthonormalization
interval, starting each interval from the orthogonal factor of the
previous one.  Factoring both embedded endpoints (5th and 4th order) gives
two sets of log-diagonal increments; their maximum difference is the error
estimate that drives the step controller, so the step size adapts to the
accuracy of the exponent increments rather than of the state itself.
Exponents are the time averages of the accumulated log-diagonals,
truncated at the first step boundary at or beyond the requested horizon.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .linalg import RankDeficiencyError, qr_positive
from .odeint import DP_A, DP_B4, DP_C

STEP_SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class DqrFailure(RuntimeError):
    """QR-method run could not continue; ``t`` is the failure time."""

    def __init__(self, message, t):
        self.t = float(t)
        super().__init__(f"{message} (t={t:.6g})")


@dataclass
class DqrConfig:
    """Run parameters for dqr_lyapunov.

    ``le_tol`` bounds the per-step difference between the 5th- and
    4th-order log-diagonal increments.  ``rtol``/``atol`` are the
    tolerances used when a reference trajectory has to be integrated for
    the variational system; the propagation inside each QR step is a
    single embedded step controlled by ``le_tol`` alone.  ``z0`` overrides
    the seeded random start (entries uniform in [-1, 1], redrawn until
    numerically nonsingular).
    """

    t_end: float
    le_tol: float = 1e-6
    initial_step: float = 0.01
    seed: int = 1729
    rtol: float = 1e-6
    atol: float = 1e-7
    z0: np.ndarray | None = None
    max_rejects: int = 60

    def __post_init__(self):
        if self.t_end <= 0 or self.le_tol <= 0 or self.initial_step <= 0:
            raise ValueError("t_end, le_tol and initial_step must be positive")


@dataclass
class LyapunovRun:
    """History of one QR-method run.

    ``times`` holds the K+1 re-orthonormalization instants (times[0] = 0);
    ``step_logs`` row j holds ln diag(R) of step j.  Exponent estimates at
    the final time are the column sums divided by times[-1].
    """

    times: np.ndarray
    step_logs: np.ndarray
    q_final: np.ndarray
    reject_count: int
    config: DqrConfig = field(repr=False, default=None)

    @property
    def t_final(self):
        return float(self.times[-1])

    @property
    def exponents_by_index(self):
        """Exponent estimates in fundamental-matrix column order."""
        return self.step_logs.sum(axis=0) / self.t_final

    @property
    def exponents(self):
        """Exponent estimates sorted descending (stable for ties)."""
        raw = self.exponents_by_index
        order = np.argsort(-raw, kind="stable")
        return raw[order]

    def exponent_history(self):
        """(K, n) running estimates after each accepted step."""
        return np.cumsum(self.step_logs, axis=0) / self.times[1:, None]


def dqr_step_adapt(h, inc5, inc4, le_tol):
    """New step from the embedded log-diagonal increments of one step.

    err = max_i |inc5_i - inc4_i|; the update h' = h * clamp(0.9 *
    (le_tol/err)^(1/5), 0.2, 5) both grows accepted steps and shrinks
    rejected ones (a step is rejected when err > le_tol).
    """
    err = float(np.max(np.abs(np.asarray(inc5) - np.asarray(inc4))))
    if err == 0.0:
        return h * MAX_FACTOR
    factor = STEP_SAFETY * (le_tol / err) ** 0.2
    return h * min(MAX_FACTOR, max(MIN_FACTOR, factor))


def propagate_pair(matfun, t, q, h):
    """One embedded DP54 step of Gamma' = A(t) Gamma from Gamma(t) = q.

    Returns the 5th- and 4th-order endpoint matrices.
    """
    k = np.empty((7,) + q.shape)
    k[0] = matfun(t) @ q
    yi = q
    for i in range(1, 7):
        yi = q + h * np.tensordot(DP_A[i, :i], k[:i], axes=1)
        k[i] = matfun(t + DP_C[i] * h) @ yi
    # row 6 of the tableau equals the 5th-order weights, so the last stage
    # argument is already the 5th-order endpoint
    g5 = yi
    g4 = q + h * np.tensordot(DP_B4, k, axes=1)
    return g5, g4


def dqr_loop(matfun, q0, t_end, h0, le_tol, t_max=np.inf, max_rejects=60):
    """Generic QR-method loop for a callable coefficient matrix.

    Returns (times, step_logs, q_final, reject_count).  Stops at the first
    accepted boundary at or beyond t_end (no clipping); steps are capped so
    evaluation never leaves [0, t_max].
    """
    q = np.array(q0, dtype=float)
    t = 0.0
    h = float(h0)
    times = [0.0]
    logs = []
    nrej = 0
    tiny = 1e-12 * max(1.0, t_end)

    while t < t_end:
        if np.isfinite(t_max):
            h = min(h, t_max - t)
        accepted = False
        for _ in range(max_rejects):
            if h < tiny:
                raise DqrFailure("step size underflow", t)
            g5, g4 = propagate_pair(matfun, t, q, h)
            if not (np.isfinite(g5).all() and np.isfinite(g4).all()):
                nrej += 1
                h *= 0.5
                continue
            try:
                q5, r5 = qr_positive(g5)
                _, r4 = qr_positive(g4)
            except RankDeficiencyError:
                nrej += 1
                h *= 0.5
                continue
            inc5 = np.log(np.diagonal(r5))
            inc4 = np.log(np.diagonal(r4))
            h_next = dqr_step_adapt(h, inc5, inc4, le_tol)
            if np.max(np.abs(inc5 - inc4)) <= le_tol:
                accepted = True
                break
            nrej += 1
            h = h_next
        if not accepted:
            raise DqrFailure(f"rejected {max_rejects} consecutive steps", t)
        t += h
        times.append(t)
        logs.append(inc5)
        q = q5
        h = h_next

    return np.array(times), np.array(logs), q, nrej


def _draw_start(n, cfg):
    if cfg.z0 is not None:
        z0 = np.asarray(cfg.z0, dtype=float)
        if z0.shape != (n, n):
            raise ValueError(f"z0 must be {n}x{n}, got {z0.shape}")
        q0, _ = qr_positive(z0)
        return q0
    rng = np.random.default_rng(cfg.seed)
    for _ in range(100):
        z0 = rng.uniform(-1.0, 1.0, size=(n, n))
        try:
            q0, _ = qr_positive(z0)
        except RankDeficiencyError:
            continue
        return q0
    raise DqrFailure("could not draw a nonsingular start matrix", 0.0)


def dqr_lyapunov(var, cfg):
    """Upper Lyapunov exponents of a variational system.

    ``var`` is a VariationalSystem; systems carrying a kernel context run
    on the active backend, anything else on the generic loop above.
    Returns a LyapunovRun.
    """
    n = var.n
    q0 = _draw_start(n, cfg)
    ctx = getattr(var, "kernel_ctx", None)
    if ctx is not None:
        spec, ts, ys, ks = ctx
        times, logs, qf, nrej = backend.get().dqr_desc(
            spec, ts, ys, ks, q0, cfg.t_end, cfg.initial_step, cfg.le_tol,
            cfg.max_rejects)
        times = np.asarray(times)
        logs = np.asarray(logs)
    else:
        times, logs, qf, nrej = dqr_loop(
            var.matrix, q0, cfg.t_end, cfg.initial_step, cfg.le_tol,
            t_max=var.t_max, max_rejects=cfg.max_rejects)
    return LyapunovRun(times, logs, qf, int(nrej), cfg)
