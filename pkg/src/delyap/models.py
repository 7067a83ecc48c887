"""Shipped delay models: two scalar renewal equations and a coupled
renewal/differential consumer-resource system.

A renewal model prescribes x(t) = integral of f(x(t + theta)) over
theta in [-tau2, -tau1]; the coupled model replaces the rule by
x(t) = y(t) * integral(f1(x(t + theta))) and couples it with
y'(t) = g(y(t)) + y(t) * integral(f2(x(t + theta))).  Nonlinearities are
instances of ScalarFunc so discretized systems can run on the compiled
backend; the analytic derivative ships with each model.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._kernelspec import (F_EXPDECAY, F_LIN, F_LOGISTIC, F_QUADLOG,
                          ScalarFunc)

# Parameter thresholds of the shipped models (loss of stability of the
# relevant equilibrium).
QUAD_RE_HOPF_GAMMA = 2.0 + math.pi / 2.0
QUAD_RE_PERIOD = 4.0
CANNIBALISM_HOPF_LOG_GAMMA = 1.0 + math.pi / 2.0


@dataclass(frozen=True)
class EquilibriumInfo:
    """Constant solution of a model; ``state`` holds the physical
    components (x,) for renewal models, (x, y) for coupled ones."""

    label: str
    state: tuple


@dataclass(frozen=True)
class REModel:
    """Scalar renewal equation with delay support [-tau2, -tau1]."""

    name: str
    tau1: float
    tau2: float
    f: Callable
    f_prime: Callable
    equilibria: tuple
    kernel: ScalarFunc | None = None


@dataclass(frozen=True)
class DDEModel:
    """Scalar delay differential equation y'(t) = rule(y_t).

    ``rule`` receives a callable evaluating the history segment at any
    theta in [-tau, 0] and returns the derivative.
    """

    name: str
    tau: float
    rule: Callable


@dataclass(frozen=True)
class CoupledModel:
    """Coupled renewal/differential system (scalar components)."""

    name: str
    tau1: float
    tau2: float
    f1: Callable
    f1_prime: Callable
    f2: Callable
    f2_prime: Callable
    g: Callable
    g_prime: Callable
    equilibria: tuple
    kernel_f1: ScalarFunc | None = None
    kernel_f2: ScalarFunc | None = None
    kernel_g: ScalarFunc | None = None


def quad_re(gamma):
    """Renewal model with logistic-type birth rate f(x) = (gamma/2) x (1-x)
    on the delay window [-3, -1].

    Equilibria 0 and (gamma-1)/gamma; the nontrivial one loses stability
    at gamma = 2 + pi/2.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    f = ScalarFunc(F_QUADLOG, float(gamma))
    eqs = (EquilibriumInfo("trivial", (0.0,)),
           EquilibriumInfo("nontrivial", ((gamma - 1.0) / gamma,)))
    return REModel("quad_re", 1.0, 3.0, f, f.deriv, eqs, kernel=f)


def quad_re_periodic_solution(gamma, t):
    """Exact periodic solution of quad_re above the oscillation threshold.

    Valid for gamma >= 2 + pi/2 (the amplitude radicand is negative
    below); the period is 4.
    """
    radicand = 0.5 - 1.0 / gamma - (math.pi / (2.0 * gamma**2)) * (1.0 + math.pi / 4.0)
    if radicand < 0:
        raise ValueError(
            f"no periodic solution at gamma={gamma}; need gamma >= {QUAD_RE_HOPF_GAMMA}")
    t = np.asarray(t, dtype=float)
    out = 0.5 + math.pi / (4.0 * gamma) + math.sqrt(radicand) * np.sin(math.pi * t / 2.0)
    return float(out) if out.ndim == 0 else out


def cannibalism_re(gamma):
    """Renewal model with cannibalism-attenuated birth rate
    f(x) = (gamma/2) x exp(-x) on the delay window [-3, -1].

    Equilibria 0 and log(gamma); the nontrivial one loses stability at
    log(gamma) = 1 + pi/2.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    f = ScalarFunc(F_EXPDECAY, float(gamma))
    eqs = (EquilibriumInfo("trivial", (0.0,)),
           EquilibriumInfo("nontrivial", (math.log(gamma),)))
    return REModel("cannibalism_re", 1.0, 3.0, f, f.deriv, eqs, kernel=f)


def daphnia_transcritical_beta(K=1.0, a_mat=3.0, a_max=4.0):
    """Reproduction rate at which the consumer-free state loses stability."""
    return 1.0 / (K * (a_max - a_mat))


def logistic_daphnia(beta, r=1.0, K=1.0, gamma=1.0, a_mat=3.0, a_max=4.0):
    """Consumer-resource model: population birth rate b(t) renews through
    maturation window [a_mat, a_max] at rate beta per unit resource, the
    logistic resource S(t) is grazed proportionally to the consumers.

        b(t) = S(t) * int_[-a_max, -a_mat] beta * b(t + theta) dtheta
        S'(t) = r S (1 - S/K) - S * int_[-a_max, -a_mat] gamma * b(t + theta) dtheta

    The consumer-free state (0, K) exchanges stability with the coexistence
    state at beta = 1 / (K (a_max - a_mat)).
    """
    if min(beta, r, K, gamma) <= 0:
        raise ValueError("all rates must be positive")
    if not 0 <= a_mat < a_max:
        raise ValueError(f"need 0 <= a_mat < a_max, got {a_mat}, {a_max}")
    f1 = ScalarFunc(F_LIN, float(beta))
    f2 = ScalarFunc(F_LIN, -float(gamma))
    g = ScalarFunc(F_LOGISTIC, float(r), float(K))
    da = a_max - a_mat
    s_bar = 1.0 / (beta * da)
    b_bar = r * (1.0 - s_bar / K) / (gamma * da)
    eqs = (EquilibriumInfo("trivial", (0.0, 0.0)),
           EquilibriumInfo("consumer-free", (0.0, K)),
           EquilibriumInfo("coexistence", (b_bar, s_bar)))
    return CoupledModel("logistic_daphnia", float(a_mat), float(a_max),
                        f1, f1.deriv, f2, f2.deriv, g, g.deriv, eqs,
                        kernel_f1=f1, kernel_f2=f2, kernel_g=g)


def re_fixed_point_residual(model, x):
    """Residual of the constant-solution equation x = f(x) * (tau2 - tau1)."""
    return float(x - model.f(x) * (model.tau2 - model.tau1))


def coupled_fixed_point_residual(model, x, y):
    """Residuals of both constant-solution equations of a coupled model."""
    da = model.tau2 - model.tau1
    r1 = x - y * model.f1(x) * da
    r2 = model.g(y) + y * model.f2(x) * da
    return float(r1), float(r2)
