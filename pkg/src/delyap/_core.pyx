# cython: language_level=3
"""Compiled kernel backend.

C twin of ``delyap._purepy``: the same descriptor-level API (right-hand
side evaluation, adaptive trajectory integration, QR-method run) with the
hot loops in C.  The Runge-Kutta tableau is copied from ``delyap.odeint``
at import time so both backends integrate with bit-identical coefficients;
agreement of the results themselves is at rounding level only, since
summation orders differ.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, isfinite, log, pow, sqrt

from .dqr import DqrFailure
from .linalg import RankDeficiencyError
from .odeint import (IntegrationError, RhsEvaluationError,
                     StepSizeUnderflowError)

cnp.import_array()

COMPILED = True

DEF MAXN = 512          # hard cap on the collocated dimension

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0
cdef long MAX_STEPS = 20000000

# tableau storage, filled from odeint below
cdef double TA[49]
cdef double TB5[7]
cdef double TB4[7]
cdef double TC[7]
cdef double TP[28]


def _init_tables():
    from . import odeint
    a = np.ascontiguousarray(odeint.DP_A, dtype=float).ravel()
    p = np.ascontiguousarray(odeint.DP_P, dtype=float).ravel()
    cdef int i
    for i in range(49):
        TA[i] = a[i]
    for i in range(7):
        TB5[i] = odeint.DP_B5[i]
        TB4[i] = odeint.DP_B4[i]
        TC[i] = odeint.DP_C[i]
    for i in range(28):
        TP[i] = p[i]


_init_tables()


def kind_constants():
    """Scalar/system kind codes compiled into this module (test hook)."""
    return {"F_LIN": 0, "F_QUADLOG": 1, "F_EXPDECAY": 2, "F_LOGISTIC": 3,
            "SYS_RE": 0, "SYS_COUPLED": 1}


cdef inline double _feval(int kind, double p1, double p2, double x) nogil:
    if kind == 0:
        return p1 * x
    if kind == 1:
        return 0.5 * p1 * x * (1.0 - x)
    if kind == 2:
        return 0.5 * p1 * x * exp(-x)
    return p1 * x * (1.0 - x / p2)


cdef inline double _fderiv(int kind, double p1, double p2, double x) nogil:
    if kind == 0:
        return p1
    if kind == 1:
        return 0.5 * p1 * (1.0 - 2.0 * x)
    if kind == 2:
        return 0.5 * p1 * (1.0 - x) * exp(-x)
    return p1 * (1.0 - 2.0 * x / p2)


cdef class _CSystem:
    """Unpacked kernel descriptor with preallocated scratch."""

    cdef int sys_kind, mx, my, n, qn
    cdef int f1k, f2k, gk
    cdef double f1p1, f1p2, f2p1, f2p2, gp1, gp2
    cdef double[:, ::1] dmat, lq, dy
    cdef double[::1] wq
    cdef double[::1] xq, s1, s2


def _csystem_from_spec(spec):
    cdef _CSystem cs = _CSystem()
    cs.sys_kind = spec.sys_kind
    cs.mx = spec.mx
    cs.my = spec.my
    cs.n = spec.mx if spec.sys_kind == 0 else spec.mx + spec.my + 1
    if cs.n > MAXN:
        raise ValueError(f"system dimension {cs.n} exceeds compiled cap {MAXN}")
    cs.dmat = np.ascontiguousarray(spec.dmat, dtype=float)
    cs.lq = np.ascontiguousarray(spec.lq, dtype=float)
    cs.wq = np.ascontiguousarray(spec.qweights, dtype=float)
    cs.dy = np.ascontiguousarray(spec.dy_rows, dtype=float)
    cs.qn = cs.wq.shape[0]
    cs.f1k, cs.f1p1, cs.f1p2 = int(spec.f1[0]), float(spec.f1[1]), float(spec.f1[2])
    cs.f2k, cs.f2p1, cs.f2p2 = int(spec.f2[0]), float(spec.f2[1]), float(spec.f2[2])
    cs.gk, cs.gp1, cs.gp2 = int(spec.g[0]), float(spec.g[1]), float(spec.g[2])
    cs.xq = np.empty(cs.qn)
    cs.s1 = np.empty(cs.mx)
    cs.s2 = np.empty(cs.mx)
    return cs


cdef void _rhs_c(_CSystem cs, const double* y, double* out) nogil:
    cdef int i, j, q
    cdef double s, acc1, acc2, v0
    for q in range(cs.qn):
        s = 0.0
        for j in range(cs.mx):
            s += cs.lq[q, j] * y[j]
        cs.xq[q] = s
    acc1 = 0.0
    for q in range(cs.qn):
        acc1 += cs.wq[q] * _feval(cs.f1k, cs.f1p1, cs.f1p2, cs.xq[q])
    if cs.sys_kind == 0:
        for i in range(cs.mx):
            s = 0.0
            for j in range(cs.mx):
                s += cs.dmat[i, j] * y[j]
            out[i] = s - acc1
        return
    v0 = y[cs.mx]
    for i in range(cs.mx):
        s = 0.0
        for j in range(cs.mx):
            s += cs.dmat[i, j] * y[j]
        out[i] = s - v0 * acc1
    acc2 = 0.0
    for q in range(cs.qn):
        acc2 += cs.wq[q] * _feval(cs.f2k, cs.f2p1, cs.f2p2, cs.xq[q])
    out[cs.mx] = _feval(cs.gk, cs.gp1, cs.gp2, v0) + v0 * acc2
    for i in range(cs.my):
        s = 0.0
        for j in range(cs.my + 1):
            s += cs.dy[i, j] * y[cs.mx + j]
        out[cs.mx + 1 + i] = s


cdef void _jac_c(_CSystem cs, const double* w, double[:, ::1] amat) nogil:
    cdef int i, j, q
    cdef double s, acc1, acc2, v0, fq
    for q in range(cs.qn):
        s = 0.0
        for j in range(cs.mx):
            s += cs.lq[q, j] * w[j]
        cs.xq[q] = s
    for j in range(cs.mx):
        cs.s1[j] = 0.0
    for q in range(cs.qn):
        fq = cs.wq[q] * _fderiv(cs.f1k, cs.f1p1, cs.f1p2, cs.xq[q])
        for j in range(cs.mx):
            cs.s1[j] += cs.lq[q, j] * fq
    if cs.sys_kind == 0:
        for i in range(cs.mx):
            for j in range(cs.mx):
                amat[i, j] = cs.dmat[i, j] - cs.s1[j]
        return
    v0 = w[cs.mx]
    acc1 = 0.0
    acc2 = 0.0
    for q in range(cs.qn):
        acc1 += cs.wq[q] * _feval(cs.f1k, cs.f1p1, cs.f1p2, cs.xq[q])
        acc2 += cs.wq[q] * _feval(cs.f2k, cs.f2p1, cs.f2p2, cs.xq[q])
    for j in range(cs.mx):
        cs.s2[j] = 0.0
    for q in range(cs.qn):
        fq = cs.wq[q] * _fderiv(cs.f2k, cs.f2p1, cs.f2p2, cs.xq[q])
        for j in range(cs.mx):
            cs.s2[j] += cs.lq[q, j] * fq
    for i in range(cs.n):
        for j in range(cs.n):
            amat[i, j] = 0.0
    for i in range(cs.mx):
        for j in range(cs.mx):
            amat[i, j] = cs.dmat[i, j] - v0 * cs.s1[j]
        amat[i, cs.mx] = -acc1
    for j in range(cs.mx):
        amat[cs.mx, j] = v0 * cs.s2[j]
    amat[cs.mx, cs.mx] = _fderiv(cs.gk, cs.gp1, cs.gp2, v0) + acc2
    for i in range(cs.my):
        for j in range(cs.my + 1):
            amat[cs.mx + 1 + i, cs.mx + j] = cs.dy[i, j]


def rhs_desc(spec, t, y):
    """One right-hand side evaluation (debug/equivalence hook)."""
    cdef _CSystem cs = _csystem_from_spec(spec)
    yv = np.ascontiguousarray(y, dtype=float)
    if yv.shape[0] != cs.n:
        raise ValueError(f"state length {yv.shape[0]} != system dimension {cs.n}")
    out = np.empty(cs.n)
    cdef double[::1] yv_ = yv
    cdef double[::1] out_ = out
    _rhs_c(cs, &yv_[0], &out_[0])
    return out


cdef double _rms_scaled(const double* v, const double* sc, int n) nogil:
    cdef int i
    cdef double s = 0.0, r
    for i in range(n):
        r = v[i] / sc[i]
        s += r * r
    return sqrt(s / n)


def integrate_desc(spec, y0, double t0, double tf, double rtol, double atol,
                   first_step=None, max_step=np.inf, bint dense=True):
    """Integrate the collocated system; returns (ts, ys, ks) arrays.

    Same stepping logic as ``odeint.dp54_loop``: scaled RMS error over the
    embedded pair, step factors in [0.2, 5] with safety 0.9, FSAL reuse,
    final step clipped to land on tf exactly.
    """
    cdef _CSystem cs = _csystem_from_spec(spec)
    cdef int n = cs.n
    y0_arr = np.ascontiguousarray(y0, dtype=float)
    if y0_arr.shape[0] != n:
        raise ValueError(f"state length {y0_arr.shape[0]} != system dimension {n}")
    if not (t0 < tf):
        raise ValueError(f"need t0 < tf, got [{t0}, {tf}]")

    cdef double hmax = float(max_step)
    cdef double y[MAXN]
    cdef double ytmp[MAXN]
    cdef double f0[MAXN]
    cdef double sc[MAXN]
    cdef double errv[MAXN]
    cdef double kst[7][MAXN]
    cdef int i, j, st
    cdef double t = t0, h, err, factor, d0, d1, d2, h0, h1, t_new
    cdef long nsteps = 0
    cdef double tiny = 1e-12 * (tf - t0)
    cdef bint broke

    for i in range(n):
        y[i] = y0_arr[i]
    _rhs_c(cs, y, f0)
    for i in range(n):
        if not isfinite(f0[i]):
            raise RhsEvaluationError(
                "non-finite right-hand side at initial state", t)

    if first_step is not None:
        h = float(first_step)
    else:
        # two-probe starting step, mirroring odeint.initial_step_heuristic
        for i in range(n):
            sc[i] = atol + rtol * fabs(y[i])
        d0 = _rms_scaled(y, sc, n)
        d1 = _rms_scaled(f0, sc, n)
        h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h0 = min(h0, tf - t0, hmax)
        for i in range(n):
            ytmp[i] = y[i] + h0 * f0[i]
        _rhs_c(cs, ytmp, errv)
        for i in range(n):
            errv[i] = errv[i] - f0[i]
        d2 = _rms_scaled(errv, sc, n) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = pow(0.01 / max(d1, d2), 0.2)
        h = min(100 * h0, h1, tf - t0, hmax)
    h = min(h, tf - t0, hmax)

    cap = 1024
    ts_buf = np.empty(cap)
    ys_buf = np.empty((cap, n))
    ks_buf = np.empty((cap, 7, n)) if dense else np.empty((0, 7, n))
    cdef double[::1] ts_v = ts_buf
    cdef double[:, ::1] ys_v = ys_buf
    cdef double[:, :, ::1] ks_v = ks_buf
    cdef Py_ssize_t count = 0
    ts_v[0] = t
    for i in range(n):
        ys_v[0, i] = y[i]
    count = 1

    while t < tf:
        nsteps += 1
        if nsteps > MAX_STEPS:
            raise IntegrationError("step budget exhausted", t)
        if h < tiny:
            raise StepSizeUnderflowError("step size underflow", t)
        if t + h > tf:
            h = tf - t

        for i in range(n):
            kst[0][i] = f0[i]
        broke = False
        for st in range(1, 7):
            for i in range(n):
                ytmp[i] = y[i]
            for j in range(st):
                if TA[st * 7 + j] != 0.0:
                    for i in range(n):
                        ytmp[i] += h * TA[st * 7 + j] * kst[j][i]
            _rhs_c(cs, ytmp, kst[st])
            for i in range(n):
                if not isfinite(kst[st][i]):
                    broke = True
                    break
            if broke:
                break
        if broke:
            h *= MIN_FACTOR
            continue

        for i in range(n):
            ytmp[i] = y[i]       # reused as the 5th-order endpoint
            errv[i] = 0.0
        for j in range(7):
            if TB5[j] != 0.0:
                for i in range(n):
                    ytmp[i] += h * TB5[j] * kst[j][i]
            for i in range(n):
                errv[i] += h * (TB5[j] - TB4[j]) * kst[j][i]
        for i in range(n):
            sc[i] = atol + rtol * max(fabs(y[i]), fabs(ytmp[i]))
        err = _rms_scaled(errv, sc, n)

        if err <= 1.0:
            t_new = t + h
            if count == cap:
                cap *= 2
                ts_buf2 = np.empty(cap)
                ys_buf2 = np.empty((cap, n))
                ts_buf2[:count] = ts_buf
                ys_buf2[:count] = ys_buf
                ts_buf, ys_buf = ts_buf2, ys_buf2
                ts_v, ys_v = ts_buf, ys_buf
                if dense:
                    ks_buf2 = np.empty((cap, 7, n))
                    ks_buf2[:count - 1] = ks_buf[:count - 1]
                    ks_buf = ks_buf2
                    ks_v = ks_buf
            if dense:
                for st in range(7):
                    for i in range(n):
                        ks_v[count - 1, st, i] = kst[st][i]
            t = tf if t + h >= tf else t_new
            for i in range(n):
                y[i] = ytmp[i]
                f0[i] = kst[6][i]      # FSAL
            ts_v[count] = t
            for i in range(n):
                ys_v[count, i] = y[i]
            count += 1
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * pow(err, -0.2)))
            h = min(h * factor, hmax)
        else:
            h *= max(MIN_FACTOR, SAFETY * pow(err, -0.2))

    ts = ts_buf[:count].copy()
    ys = ys_buf[:count].copy()
    ks = ks_buf[:count - 1].copy() if dense else np.zeros((0, 7, n))
    return ts, ys, ks


cdef class _DenseEval:
    """Continuous extension of a stored trajectory (cached segment lookup)."""

    cdef double[::1] ts
    cdef double[:, ::1] ys
    cdef double[:, :, ::1] ks
    cdef Py_ssize_t nseg, last
    cdef double slack

    def __init__(self, ts, ys, ks):
        self.ts = np.ascontiguousarray(ts, dtype=float)
        self.ys = np.ascontiguousarray(ys, dtype=float)
        self.ks = np.ascontiguousarray(ks, dtype=float)
        self.nseg = self.ts.shape[0] - 1
        if self.nseg < 1:
            raise ValueError("trajectory needs at least one step")
        if self.ks.shape[0] != self.nseg:
            raise ValueError("trajectory stored without dense output")
        self.last = 0
        self.slack = 4e-16 * max(fabs(self.ts[0]), fabs(self.ts[self.nseg]), 1.0)

    def eval_at(self, double t):
        """Python-visible evaluation (the loops call the C-level path)."""
        cdef cnp.ndarray[double, ndim=1] out = np.empty(self.ys.shape[1])
        if self.eval(t, <double*>out.data) != 0:
            raise ValueError(f"t={t} outside trajectory range")
        return out

    cdef int _find(self, double t) nogil:
        cdef Py_ssize_t i = self.last
        if i > self.nseg - 1:
            i = self.nseg - 1
        while i > 0 and t < self.ts[i]:
            i -= 1
        while i < self.nseg - 1 and t > self.ts[i + 1]:
            i += 1
        self.last = i
        return <int>i

    cdef int eval(self, double t, double* out) nogil:
        """State at time t; returns -1 when t is out of range."""
        cdef Py_ssize_t i, j, st
        cdef int n = <int>self.ys.shape[1]
        cdef double h, th, s
        cdef double pw[7]
        cdef double thp[4]
        if t < self.ts[0] - self.slack or t > self.ts[self.nseg] + self.slack:
            return -1
        if t <= self.ts[0]:
            t = self.ts[0]
        if t >= self.ts[self.nseg]:
            t = self.ts[self.nseg]
        i = self._find(t)
        if t == self.ts[i]:
            for j in range(n):
                out[j] = self.ys[i, j]
            return 0
        if t == self.ts[i + 1]:
            for j in range(n):
                out[j] = self.ys[i + 1, j]
            return 0
        h = self.ts[i + 1] - self.ts[i]
        th = (t - self.ts[i]) / h
        thp[0] = th
        thp[1] = th * th
        thp[2] = thp[1] * th
        thp[3] = thp[2] * th
        for st in range(7):
            pw[st] = (TP[st * 4] * thp[0] + TP[st * 4 + 1] * thp[1]
                      + TP[st * 4 + 2] * thp[2] + TP[st * 4 + 3] * thp[3])
        for j in range(n):
            s = 0.0
            for st in range(7):
                s += self.ks[i, st, j] * pw[st]
            out[j] = self.ys[i, j] + h * s
        return 0


cdef int _qr_pos_c(double[:, ::1] a, double[:, ::1] q, double* beta,
                   double* vwork, int n) nogil:
    """Householder QR with positive diagonal, in place.

    On exit the upper triangle of ``a`` is R (diagonal > 0) and ``q`` the
    orthogonal factor.  Returns the first rank-deficient diagonal index
    (|R_ii| <= 1e-14 * ||A||_F), or -1 on success.
    """
    cdef int i, j, k, bad
    cdef double scale = 0.0, xnorm2, xnorm, alpha, s, v0, vtv, b, dot, invv0
    for i in range(n):
        for j in range(n):
            scale += a[i, j] * a[i, j]
    scale = sqrt(scale)

    for k in range(n):
        xnorm2 = 0.0
        for i in range(k, n):
            xnorm2 += a[i, k] * a[i, k]
        xnorm = sqrt(xnorm2)
        if xnorm == 0.0:
            beta[k] = 0.0
            continue
        alpha = a[k, k]
        s = -xnorm if alpha >= 0.0 else xnorm
        v0 = alpha - s
        vtv = xnorm2 - alpha * alpha + v0 * v0
        b = 2.0 / vtv
        for j in range(k + 1, n):
            dot = v0 * a[k, j]
            for i in range(k + 1, n):
                dot += a[i, k] * a[i, j]
            dot *= b
            a[k, j] -= dot * v0
            for i in range(k + 1, n):
                a[i, j] -= dot * a[i, k]
        a[k, k] = s
        invv0 = 1.0 / v0
        for i in range(k + 1, n):
            a[i, k] *= invv0
        beta[k] = b * v0 * v0

    for i in range(n):
        for j in range(n):
            q[i, j] = 1.0 if i == j else 0.0
    for k in range(n - 1, -1, -1):
        if beta[k] == 0.0:
            continue
        for j in range(k, n):
            dot = q[k, j]
            for i in range(k + 1, n):
                dot += a[i, k] * q[i, j]
            dot *= beta[k]
            q[k, j] -= dot
            for i in range(k + 1, n):
                q[i, j] -= dot * a[i, k]

    bad = -1
    for k in range(n):
        if fabs(a[k, k]) <= 1e-14 * scale:
            bad = k
            break
    for k in range(n):
        for i in range(k + 1, n):
            a[i, k] = 0.0
        if a[k, k] < 0.0:
            for j in range(k, n):
                a[k, j] = -a[k, j]
            for i in range(n):
                q[i, k] = -q[i, k]
    return bad


def qr_positive_c(a):
    """Positive-diagonal QR via the compiled Householder kernel (test hook)."""
    r = np.array(a, dtype=float, order="C")
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {r.shape}")
    cdef int n = r.shape[0]
    if n > MAXN:
        raise ValueError(f"dimension {n} exceeds compiled cap {MAXN}")
    q = np.empty((n, n))
    cdef double beta[MAXN]
    cdef double vwork[MAXN]
    cdef double[:, ::1] rv = r
    cdef double[:, ::1] qv = q
    cdef int bad = _qr_pos_c(rv, qv, beta, vwork, n)
    if bad >= 0:
        raise RankDeficiencyError(bad, abs(r[bad, bad]),
                                  float(np.linalg.norm(np.asarray(a, dtype=float))))
    return q, r


def dqr_desc(spec, ts, ys, ks, q0, double t_end, double h0, double le_tol,
             int max_rejects=60):
    """QR-method run along a stored reference trajectory.

    Returns (times, step_logs, q_final, reject_count); same stepping and
    rejection logic as ``dqr.dqr_loop`` with the per-step work (dense state
    evaluation, Jacobian assembly, stage products, the two factorizations)
    done in C.
    """
    cdef _CSystem cs = _csystem_from_spec(spec)
    cdef _DenseEval traj = _DenseEval(ts, ys, ks)
    cdef int n = cs.n
    if traj.ys.shape[1] != n:
        raise ValueError(
            f"trajectory dimension {traj.ys.shape[1]} != system dimension {n}")

    q_arr = np.array(q0, dtype=float, order="C")
    if q_arr.shape[0] != n or q_arr.shape[1] != n:
        raise ValueError(f"q0 must be {n}x{n}")

    amat_arr = np.empty((n, n))
    g5_arr = np.empty((n, n))
    g4_arr = np.empty((n, n))
    gst_arr = np.empty((n, n))
    q5_arr = np.empty((n, n))
    q4_arr = np.empty((n, n))
    kst_arr = np.empty((7, n, n))
    cdef double[:, ::1] q = q_arr
    cdef double[:, ::1] amat = amat_arr
    cdef double[:, ::1] g5 = g5_arr
    cdef double[:, ::1] g4 = g4_arr
    cdef double[:, ::1] gst = gst_arr
    cdef double[:, ::1] q5 = q5_arr
    cdef double[:, ::1] q4 = q4_arr
    cdef double[:, :, ::1] kst = kst_arr

    cdef double wstate[MAXN]
    cdef double beta[MAXN]
    cdef double vwork[MAXN]
    cdef double inc5[MAXN]
    cdef double inc4[MAXN]

    cdef double t_max = traj.ts[traj.nseg]
    cdef double t = 0.0, h = h0, coef, errmax, factor, h_next, tst
    cdef double tiny = 1e-12 * max(1.0, t_end)
    cdef int i, j, m, st, rej, bad
    cdef long nrej = 0
    cdef bint accepted, finite_ok

    cap = 4096
    tbuf = np.empty(cap)
    lbuf = np.empty((cap, n))
    cdef double[::1] tv = tbuf
    cdef double[:, ::1] lv = lbuf
    cdef Py_ssize_t count = 0
    tv[0] = 0.0
    count = 1

    while t < t_end:
        if h > t_max - t:
            h = t_max - t
        accepted = False
        for rej in range(max_rejects):
            if h < tiny:
                raise DqrFailure("step size underflow", t)

            # one embedded step of Gamma' = A(t) Gamma from q
            finite_ok = True
            for st in range(7):
                if st == 0:
                    for i in range(n):
                        for j in range(n):
                            gst[i, j] = q[i, j]
                else:
                    for i in range(n):
                        for j in range(n):
                            gst[i, j] = q[i, j]
                    for m in range(st):
                        coef = TA[st * 7 + m]
                        if coef != 0.0:
                            for i in range(n):
                                for j in range(n):
                                    gst[i, j] += h * coef * kst[m, i, j]
                tst = t + TC[st] * h
                if traj.eval(tst, wstate) != 0:
                    raise DqrFailure("reference trajectory too short", tst)
                _jac_c(cs, wstate, amat)
                for i in range(n):
                    for j in range(n):
                        coef = 0.0
                        for m in range(n):
                            coef += amat[i, m] * gst[m, j]
                        kst[st, i, j] = coef
            # stage 7's argument is already the 5th-order endpoint
            for i in range(n):
                for j in range(n):
                    g5[i, j] = gst[i, j]
                    g4[i, j] = q[i, j]
            for m in range(7):
                coef = TB4[m]
                if coef != 0.0:
                    for i in range(n):
                        for j in range(n):
                            g4[i, j] += h * coef * kst[m, i, j]
            for i in range(n):
                for j in range(n):
                    if not (isfinite(g5[i, j]) and isfinite(g4[i, j])):
                        finite_ok = False
            if not finite_ok:
                nrej += 1
                h *= 0.5
                continue

            bad = _qr_pos_c(g5, q5, beta, vwork, n)
            if bad < 0:
                bad = _qr_pos_c(g4, q4, beta, vwork, n)
            if bad >= 0:
                nrej += 1
                h *= 0.5
                continue
            errmax = 0.0
            for i in range(n):
                inc5[i] = log(g5[i, i])
                inc4[i] = log(g4[i, i])
                if fabs(inc5[i] - inc4[i]) > errmax:
                    errmax = fabs(inc5[i] - inc4[i])
            if errmax == 0.0:
                h_next = h * MAX_FACTOR
            else:
                factor = SAFETY * pow(le_tol / errmax, 0.2)
                h_next = h * min(MAX_FACTOR, max(MIN_FACTOR, factor))
            if errmax <= le_tol:
                accepted = True
                break
            nrej += 1
            h = h_next
        if not accepted:
            raise DqrFailure(f"rejected {max_rejects} consecutive steps", t)

        t += h
        if count == cap:
            cap *= 2
            tbuf2 = np.empty(cap)
            lbuf2 = np.empty((cap, n))
            tbuf2[:count] = tbuf
            lbuf2[:count - 1] = lbuf[:count - 1]
            tbuf, lbuf = tbuf2, lbuf2
            tv, lv = tbuf, lbuf
        tv[count] = t
        for i in range(n):
            lv[count - 1, i] = inc5[i]
            for j in range(n):
                q[i, j] = q5[i, j]
        count += 1
        h = h_next

    times = tbuf[:count].copy()
    logs = lbuf[:count - 1].copy()
    return times, logs, q_arr, int(nrej)
