"""Variational systems along reference trajectories.

Linearizing the collocated system about a stored trajectory gives the
time-dependent coefficient matrix A(t) = jacobian(t, y_ref(t)) that the QR
method propagates.  The reference is integrated once with dense output; a
configurable transient is integrated first and discarded so the window
starts on (or near) the attractor, and the stored span extends beyond the
requested horizon so the QR method's final overshooting step stays inside
interpolation range.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import backend
from ._fd import central_jacobian
from .odeint import IvpProblem, Trajectory, integrate

DEFAULT_TRANSIENT = 200.0
DEFAULT_MARGIN = 50.0


@dataclass
class VariationalSystem:
    """Linear system z' = matrix(t) z valid for t in [0, t_max]."""

    n: int
    matrix: Callable[[float], np.ndarray]
    t_max: float = np.inf
    source: tuple = None              # (system, trajectory) when applicable
    kernel_ctx: tuple = field(default=None, repr=False)


def fd_jacobian(system, t, w):
    """Finite-difference Jacobian of a system's rhs (fallback for models
    without analytic derivatives); central differences with step
    1e-6 * max(1, |w_i|) per column."""
    return central_jacobian(system.rhs, t, np.asarray(w, dtype=float))


def linearize_along(system, trajectory):
    """Variational system of a collocated system along a trajectory.

    The coefficient matrix is the system Jacobian evaluated on the dense
    trajectory; when the system carries a kernel descriptor the pair is
    also packaged for the compiled backend.
    """
    if trajectory.dim != system.n:
        raise ValueError(
            f"trajectory dimension {trajectory.dim} != system dimension {system.n}")

    def matrix(t):
        return system.jacobian(t, trajectory.eval(t))

    ctx = None
    if system.kernel is not None and trajectory.ks.shape[0] > 0:
        ctx = (system.kernel, trajectory.ts, trajectory.ys, trajectory.ks)
    return VariationalSystem(system.n, matrix, t_max=trajectory.t1,
                             source=(system, trajectory), kernel_ctx=ctx)


def reference_trajectory(system, y0, span, transient=DEFAULT_TRANSIENT,
                         margin=DEFAULT_MARGIN, rtol=1e-6, atol=1e-7):
    """Integrate the reference orbit for a variational system.

    A transient of the given length is integrated first and discarded
    (time is reset to 0 at its end); the returned dense trajectory covers
    [0, span + margin].  Uses the active kernel backend when the system
    has a descriptor.
    """
    y0 = np.asarray(y0, dtype=float)
    if system.kernel is not None:
        kern = backend.get()
        if transient > 0:
            _, ys, _ = kern.integrate_desc(system.kernel, y0, 0.0, transient,
                                           rtol, atol, dense=False)
            y0 = ys[-1]
        ts, ys, ks = kern.integrate_desc(system.kernel, y0, 0.0,
                                         span + margin, rtol, atol, dense=True)
        return Trajectory(np.asarray(ts), np.asarray(ys), np.asarray(ks))
    if transient > 0:
        warm = integrate(IvpProblem(system.rhs, 0.0, transient, y0,
                                    rtol=rtol, atol=atol), dense=False)
        y0 = warm.ys[-1]
    return integrate(IvpProblem(system.rhs, 0.0, span + margin, y0,
                                rtol=rtol, atol=atol))
