"""Independent references for the QR-method results.

Three routes, none sharing code with the QR path: eigenvalues of the
constant Jacobian at an equilibrium (exponents are real parts), Floquet
multipliers of the monodromy matrix over one period (exponents are
log-moduli over the period), and a uniform-grid trapezoidal solver for
scalar renewal equations (second-order accurate solution oracle).
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import eigenvalues
from .models import REModel
from .odeint import IvpProblem, integrate

# multipliers below this relative modulus map to exponent -inf
ZERO_MODULUS_REL = 1e-16


@dataclass(frozen=True)
class SpectrumResult:
    """Spectrum-derived exponents.

    ``eigenvalues`` holds generator eigenvalues or Floquet multipliers;
    ``exponents`` the derived Lyapunov exponents sorted descending (-inf
    for multipliers at numerical zero, counted in ``n_zero_modulus``).
    ``period`` is None for the generator route.
    """

    eigenvalues: np.ndarray
    exponents: np.ndarray
    period: float | None
    n_zero_modulus: int = 0


def equilibrium_les(system, eq_state, residual_tol=1e-8):
    """Exponents at an equilibrium from the constant Jacobian spectrum."""
    eq_state = np.asarray(eq_state, dtype=float)
    resid = float(np.max(np.abs(system.rhs(0.0, eq_state))))
    scale = 1.0 + float(np.max(np.abs(eq_state)))
    if resid > residual_tol * scale:
        raise ValueError(
            f"state is not an equilibrium: |rhs| = {resid:.3e}")
    evs = eigenvalues(system.jacobian(0.0, eq_state))
    exps = np.sort(evs.real)[::-1]
    return SpectrumResult(evs, exps, None)


def floquet_les(var, period, rtol=1e-9, atol=1e-12):
    """Exponents of a periodic orbit from the monodromy matrix.

    Integrates Phi' = A(t) Phi, Phi(0) = I over one period of the
    variational system and takes eigenvalue moduli.
    """
    n = var.n
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    if period > var.t_max:
        raise ValueError(f"period {period} exceeds variational range {var.t_max}")

    def rhs(t, y):
        return (var.matrix(t) @ y.reshape(n, n)).ravel()

    traj = integrate(IvpProblem(rhs, 0.0, period, np.eye(n).ravel(),
                                rtol=rtol, atol=atol), dense=False)
    monodromy = traj.ys[-1].reshape(n, n)
    mults = eigenvalues(monodromy)
    mod = np.abs(mults)
    floor = ZERO_MODULUS_REL * mod.max()
    exps = np.where(mod > floor, np.log(np.maximum(mod, 1e-300)) / period, -np.inf)
    order = np.argsort(-exps, kind="stable")
    return SpectrumResult(mults, exps[order], float(period),
                          int(np.sum(mod <= floor)))


def trapezoidal_re_solve(model, r, phi, t_end):
    """Uniform-grid trapezoidal solution of a scalar renewal model.

    The grid step is h = tau1 / r and must divide tau2, so the quadrature
    window [t - tau2, t - tau1] lands on grid points; since tau1 > 0 the
    scheme is explicit.  Returns (times, values) for t in [0, t_end]
    (the last grid point is the first one at or beyond t_end).
    ``phi`` gives the history on [-tau2, 0].
    """
    if not isinstance(model, REModel):
        raise TypeError("trapezoidal_re_solve expects an REModel")
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    if model.tau1 <= 0:
        raise ValueError("explicit stepping needs tau1 > 0")
    h = model.tau1 / r
    m2f = model.tau2 / h
    m2 = round(m2f)
    if abs(m2f - m2) > 1e-9:
        raise ValueError(
            f"grid step tau1/r = {h} does not divide tau2 = {model.tau2}")

    nsteps = int(math.ceil(t_end / h - 1e-12))
    width = m2 - r + 1  # quadrature window points from -tau2 to -tau1
    weights = h * np.ones(width)
    weights[0] *= 0.5
    weights[-1] *= 0.5

    x = np.empty(m2 + 1 + nsteps)
    fx = np.empty_like(x)
    hist_t = -model.tau2 + h * np.arange(m2 + 1)
    hist_t[-1] = 0.0
    for i, t in enumerate(hist_t):
        x[i] = float(phi(t))
    fx[:m2 + 1] = model.f(x[:m2 + 1])

    for m in range(1, nsteps + 1):
        g = m2 + m
        x[g] = weights @ fx[m:m + width]
        fx[g] = float(model.f(x[g]))

    times = h * np.arange(nsteps + 1)
    return times, x[m2:]
