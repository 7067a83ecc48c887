"""Pseudospectral reduction of delay systems to collocated ODE systems.

A renewal equation is reduced through its integrated state: the unknown
becomes U(t), the values at the interior mesh nodes of the primitive of
the physical solution segment (the primitive vanishes at theta = 0, so the
node at 0 drops out and the ODE matrix is the differentiation matrix with
row and column 0 removed).  The physical value is recovered by
differentiating the interpolant, i.e. through the Lagrange-derivative
row at theta = 0.

The renewal rule's integral over [-tau2, -tau1] is approximated by
Clenshaw-Curtis quadrature on a dedicated mesh of that subinterval (the
integrand has a kink at -tau1 in general, so quadrature never spans it);
the integrand is sampled through a precomputed matrix of Lagrange-basis
derivative values at the quadrature nodes.

Delay differential equations keep their physical values as unknowns: the
node at 0 obeys the model's rule, the remaining rows transport the history
segment with the differentiation matrix.  A coupled system stacks a
renewal block and a differential block, sharing the delay horizon.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _purepy
from ._fd import central_jacobian
from ._kernelspec import SYS_COUPLED, SYS_RE, KernelSpec
from .linalg import solve
from .models import CoupledModel, DDEModel, EquilibriumInfo, REModel
from .spectral import barycentric_eval, chebyshev_mesh, interpolation_matrix


@dataclass(frozen=True)
class SystemLayout:
    """Block structure of the collocated state vector."""

    kind: str          # "re" | "dde" | "coupled"
    m_x: int = 0       # renewal block: m_x unknowns (interior nodes)
    m_y: int = 0       # differential block: m_y + 1 unknowns incl. theta=0
    d_x: int = 1       # component counts kept general; shipped models are scalar
    d_y: int = 1


@dataclass
class DiscreteSystem:
    """Collocated ODE system w' = rhs(t, w) with analytic Jacobian."""

    n: int
    rhs: Callable
    jacobian: Callable
    layout: SystemLayout
    model: object
    mesh_x: object = None      # state mesh of the renewal block ({0} included)
    mesh_y: object = None      # mesh of the differential block
    quad_mesh: object = None   # quadrature mesh on [-tau2, -tau1]
    kernel: KernelSpec | None = field(default=None, repr=False)


def _quad_pieces(model, mesh_x, quad_degree):
    """Quadrature mesh plus the Lagrange-derivative sampling matrix."""
    qmesh = chebyshev_mesh(quad_degree, -model.tau2, -model.tau1)
    basis = interpolation_matrix(mesh_x, qmesh.nodes)
    # l_j' has degree M-1, so interpolating column j of the differentiation
    # matrix evaluates it exactly at the quadrature nodes
    lq = basis @ mesh_x.diff[:, 1:]
    return qmesh, lq


def build_re_system(model, m_x, quad_degree=None):
    """Collocate a renewal model on m_x + 1 Chebyshev nodes.

    The returned system has dimension m_x; the quadrature degree defaults
    to 2 * m_x, which integrates the collocated quadratic rules exactly.
    """
    if not isinstance(model, REModel):
        raise TypeError("build_re_system expects an REModel")
    if m_x < 2:
        raise ValueError(f"m_x must be >= 2, got {m_x}")
    if quad_degree is None:
        quad_degree = 2 * m_x
    mesh_x = chebyshev_mesh(m_x, -model.tau2, 0.0)
    qmesh, lq = _quad_pieces(model, mesh_x, quad_degree)

    if model.kernel is not None:
        spec = KernelSpec(SYS_RE, m_x, 0, mesh_x.diff[1:, 1:], lq,
                          qmesh.cc_weights, (model.kernel.kind,
                                             model.kernel.p1, model.kernel.p2))
        rhs = _purepy.rhs_from_spec(spec)
        jac = _purepy.jac_from_spec(spec)
    else:
        spec = None
        dmat = mesh_x.diff[1:, 1:]
        f, fp = model.f, model.f_prime

        def rhs(t, u):
            return dmat @ u - qmesh.cc_weights @ f(lq @ u)

        def jac(t, u):
            s = lq.T @ (qmesh.cc_weights * fp(lq @ u))
            return dmat - s[None, :]

    return DiscreteSystem(m_x, rhs, jac, SystemLayout("re", m_x=m_x),
                          model, mesh_x=mesh_x, quad_mesh=qmesh, kernel=spec)


def build_dde_system(model, m_y):
    """Collocate a delay differential model on m_y + 1 Chebyshev nodes.

    Row 0 (theta = 0) evaluates the model rule on the interpolated history
    segment; the remaining rows differentiate the segment.  The Jacobian
    falls back to central differences since the rule is a black box.
    """
    if not isinstance(model, DDEModel):
        raise TypeError("build_dde_system expects a DDEModel")
    if m_y < 1:
        raise ValueError(f"m_y must be >= 1, got {m_y}")
    mesh_y = chebyshev_mesh(m_y, -model.tau, 0.0)
    transport = mesh_y.diff[1:, :]
    rule = model.rule

    def rhs(t, v):
        def hist(theta):
            return barycentric_eval(mesh_y, v, theta)
        out = np.empty(m_y + 1)
        out[0] = rule(hist)
        out[1:] = transport @ v
        return out

    def jac(t, v):
        return central_jacobian(rhs, t, v)

    return DiscreteSystem(m_y + 1, rhs, jac,
                          SystemLayout("dde", m_y=m_y), model, mesh_y=mesh_y)


def build_coupled_system(model, m_x, m_y, quad_degree=None):
    """Collocate a coupled renewal/differential model.

    State is [U, V]: U the m_x integrated-state unknowns of the renewal
    component, V the m_y + 1 node values of the differential component
    with V[0] the current value.  Dimension is m_x + m_y + 1.
    """
    if not isinstance(model, CoupledModel):
        raise TypeError("build_coupled_system expects a CoupledModel")
    if m_x < 2 or m_y < 1:
        raise ValueError(f"need m_x >= 2 and m_y >= 1, got {m_x}, {m_y}")
    if quad_degree is None:
        quad_degree = 2 * m_x
    mesh_x = chebyshev_mesh(m_x, -model.tau2, 0.0)
    mesh_y = chebyshev_mesh(m_y, -model.tau2, 0.0)
    qmesh, lq = _quad_pieces(model, mesh_x, quad_degree)
    dy_rows = mesh_y.diff[1:, :]

    if model.kernel_f1 is not None and model.kernel_f2 is not None \
            and model.kernel_g is not None:
        spec = KernelSpec(
            SYS_COUPLED, m_x, m_y, mesh_x.diff[1:, 1:], lq, qmesh.cc_weights,
            (model.kernel_f1.kind, model.kernel_f1.p1, model.kernel_f1.p2),
            dy_rows,
            (model.kernel_f2.kind, model.kernel_f2.p1, model.kernel_f2.p2),
            (model.kernel_g.kind, model.kernel_g.p1, model.kernel_g.p2))
        rhs = _purepy.rhs_from_spec(spec)
        jac = _purepy.jac_from_spec(spec)
    else:
        spec = None
        dmat = mesh_x.diff[1:, 1:]
        wq = qmesh.cc_weights
        f1, f1p = model.f1, model.f1_prime
        f2, f2p = model.f2, model.f2_prime
        g, gp = model.g, model.g_prime

        def rhs(t, w):
            u, v = w[:m_x], w[m_x:]
            xq = lq @ u
            out = np.empty_like(w)
            out[:m_x] = dmat @ u - v[0] * (wq @ f1(xq))
            out[m_x] = g(v[0]) + v[0] * (wq @ f2(xq))
            out[m_x + 1:] = dy_rows @ v
            return out

        def jac(t, w):
            u, v0 = w[:m_x], w[m_x]
            xq = lq @ u
            s1 = lq.T @ (wq * f1p(xq))
            s2 = lq.T @ (wq * f2p(xq))
            n = m_x + m_y + 1
            out = np.zeros((n, n))
            out[:m_x, :m_x] = dmat - v0 * s1[None, :]
            out[:m_x, m_x] = -(wq @ f1(xq))
            out[m_x, :m_x] = v0 * s2
            out[m_x, m_x] = gp(v0) + wq @ f2(xq)
            out[m_x + 1:, m_x:] = dy_rows
            return out

    n = m_x + m_y + 1
    return DiscreteSystem(n, rhs, jac,
                          SystemLayout("coupled", m_x=m_x, m_y=m_y), model,
                          mesh_x=mesh_x, mesh_y=mesh_y, quad_mesh=qmesh,
                          kernel=spec)


def re_initial_vector(system, u):
    """Integrated-state initial vector from physical values at the interior
    mesh nodes: solves D U0 = u, i.e. U0 interpolates the primitive."""
    if system.layout.kind not in ("re", "coupled"):
        raise ValueError("re_initial_vector needs a renewal block")
    m_x = system.layout.m_x
    u = np.asarray(u, dtype=float)
    if u.shape != (m_x,):
        raise ValueError(f"expected {m_x} node values, got shape {u.shape}")
    return solve(system.mesh_x.diff[1:, 1:], u)


def initial_state(system, phi, psi=None):
    """Full initial vector from initial functions.

    ``phi`` (renewal component) and ``psi`` (differential component) are
    callables of theta or constants; ``phi`` is sampled at the interior
    renewal nodes and converted through re_initial_vector, ``psi`` at all
    differential nodes.
    """
    def sample(fun, nodes):
        if callable(fun):
            return np.array([float(fun(th)) for th in nodes])
        return float(fun) * np.ones(len(nodes))

    kind = system.layout.kind
    if kind == "re":
        return re_initial_vector(system, sample(phi, system.mesh_x.nodes[1:]))
    if kind == "coupled":
        if psi is None:
            raise ValueError("coupled system needs psi for the differential block")
        u0 = re_initial_vector(system, sample(phi, system.mesh_x.nodes[1:]))
        v0 = sample(psi, system.mesh_y.nodes)
        return np.concatenate([u0, v0])
    if kind == "dde":
        return sample(phi, system.mesh_y.nodes)
    raise ValueError(f"unknown layout kind {kind}")


def reconstruct_re_state(system, w, theta):
    """Physical renewal value at lag theta from a collocated state.

    The physical segment is the derivative of the integrated-state
    interpolant: sum_j l_j'(theta) U_j, evaluated as the interpolant of
    the differentiated node values.
    """
    if system.layout.kind not in ("re", "coupled"):
        raise ValueError("reconstruct_re_state needs a renewal block")
    u = np.asarray(w, dtype=float)[:system.layout.m_x]
    deriv_nodes = system.mesh_x.diff[:, 1:] @ u
    return barycentric_eval(system.mesh_x, deriv_nodes, theta)


def output_row(system):
    """Row vector mapping a collocated state to the physical value at
    theta = 0 (the current renewal value)."""
    if system.layout.kind not in ("re", "coupled"):
        raise ValueError("output_row needs a renewal block")
    row = np.zeros(system.n)
    row[:system.layout.m_x] = system.mesh_x.diff[0, 1:]
    return row


def equilibrium_state(system, eq):
    """Collocated state vector of a model equilibrium.

    The integrated state of a constant x is x * theta; differential nodes
    carry the constant itself.
    """
    if isinstance(eq, EquilibriumInfo):
        vals = eq.state
    else:
        vals = (float(eq),)
    kind = system.layout.kind
    if kind == "re":
        return vals[0] * system.mesh_x.nodes[1:]
    if kind == "coupled":
        b, s = vals
        return np.concatenate([b * system.mesh_x.nodes[1:],
                               s * np.ones(system.layout.m_y + 1)])
    if kind == "dde":
        return vals[0] * np.ones(system.layout.m_y + 1)
    raise ValueError(f"unknown layout kind {kind}")
