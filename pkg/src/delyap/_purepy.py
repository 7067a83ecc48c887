"""Numpy implementation of the kernel backend.

This is the reference twin of the compiled ``_core`` extension: it exposes
the same descriptor-level API (right-hand side evaluation, trajectory
integration, QR-method run) built on the generic machinery in ``odeint``
and ``dqr``.  The compiled module must agree with this one up to floating
point noise; the equivalence tests exercise exactly that.
"""

import numpy as np

from . import dqr as _dqr
from . import odeint
from ._kernelspec import SYS_COUPLED, SYS_RE, ScalarFunc

COMPILED = False


def rhs_from_spec(spec):
    """Right-hand side closure of the collocated system described by spec."""
    f1 = ScalarFunc(*spec.f1)
    dmat, lq, wq = spec.dmat, spec.lq, spec.qweights
    if spec.sys_kind == SYS_RE:
        def rhs(t, u):
            return dmat @ u - wq @ f1(lq @ u)
        return rhs
    if spec.sys_kind != SYS_COUPLED:
        raise ValueError(f"unknown system kind {spec.sys_kind}")
    f2 = ScalarFunc(*spec.f2)
    g = ScalarFunc(*spec.g)
    mx = spec.mx
    dy_rows = spec.dy_rows

    def rhs(t, w):
        u = w[:mx]
        v = w[mx:]
        v0 = v[0]
        xq = lq @ u
        out = np.empty_like(w)
        out[:mx] = dmat @ u - v0 * (wq @ f1(xq))
        out[mx] = g(v0) + v0 * (wq @ f2(xq))
        out[mx + 1:] = dy_rows @ v
        return out

    return rhs


def jac_from_spec(spec):
    """Analytic Jacobian closure matching rhs_from_spec."""
    f1 = ScalarFunc(*spec.f1)
    dmat, lq, wq = spec.dmat, spec.lq, spec.qweights
    if spec.sys_kind == SYS_RE:
        def jac(t, u):
            s1 = lq.T @ (wq * f1.deriv(lq @ u))
            return dmat - s1[None, :]
        return jac
    f2 = ScalarFunc(*spec.f2)
    g = ScalarFunc(*spec.g)
    mx, my = spec.mx, spec.my
    dy_rows = spec.dy_rows

    def jac(t, w):
        u = w[:mx]
        v0 = w[mx]
        xq = lq @ u
        s1 = lq.T @ (wq * f1.deriv(xq))
        s2 = lq.T @ (wq * f2.deriv(xq))
        n = mx + my + 1
        out = np.zeros((n, n))
        out[:mx, :mx] = dmat - v0 * s1[None, :]
        out[:mx, mx] = -(wq @ f1(xq))
        out[mx, :mx] = v0 * s2
        out[mx, mx] = g.deriv(v0) + wq @ f2(xq)
        out[mx + 1:, mx:] = dy_rows
        return out

    return jac


def rhs_desc(spec, t, y):
    """One right-hand side evaluation (debug/equivalence hook)."""
    return rhs_from_spec(spec)(float(t), np.asarray(y, dtype=float))


def integrate_desc(spec, y0, t0, tf, rtol, atol, first_step=None,
                   max_step=np.inf, dense=True):
    """Integrate the collocated system; returns (ts, ys, ks) arrays."""
    return odeint.dp54_loop(rhs_from_spec(spec), t0, tf, y0, rtol, atol,
                            max_step, first_step, dense)


def dqr_desc(spec, ts, ys, ks, q0, t_end, h0, le_tol, max_rejects=60):
    """QR-method run along a stored reference trajectory.

    Returns (times, step_logs, q_final, reject_count) with times[0] = 0 and
    times[-1] the first accepted point at or beyond t_end.
    """
    traj = odeint.Trajectory(np.asarray(ts, dtype=float),
                             np.asarray(ys, dtype=float),
                             np.asarray(ks, dtype=float))
    jac = jac_from_spec(spec)

    def matfun(t):
        return jac(t, traj.eval(t))

    return _dqr.dqr_loop(matfun, q0, t_end, h0, le_tol,
                         t_max=traj.t1, max_rejects=max_rejects)
