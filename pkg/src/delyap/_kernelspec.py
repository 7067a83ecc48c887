"""Problem descriptors shared by the numpy and compiled kernel backends.

The hot loops (trajectory integration, fundamental-matrix propagation) exist
twice: a numpy implementation in ``_purepy`` and a C twin in ``_core``.  Both
consume the same plain-array description of the collocated system defined
here, so a descriptor built once by ``discretize`` can be handed to either
backend.  The scalar nonlinearities are restricted to a small closed set of
parametric forms; models outside that set simply run on the generic
callable-based path.
"""

from dataclasses import dataclass, field

import numpy as np

# scalar function kinds (mirrored as C constants in _core.pyx)
F_LIN = 0        # p1*x
F_QUADLOG = 1    # 0.5*p1*x*(1 - x)
F_EXPDECAY = 2   # 0.5*p1*x*exp(-x)
F_LOGISTIC = 3   # p1*x*(1 - x/p2)

# system kinds
SYS_RE = 0
SYS_COUPLED = 1


@dataclass(frozen=True)
class ScalarFunc:
    """Scalar nonlinearity from the closed parametric set above.

    Instances are vectorized callables; ``deriv`` evaluates the exact
    derivative.  The (kind, p1, p2) triple is what the compiled backend
    dispatches on.
    """

    kind: int
    p1: float
    p2: float = 0.0

    def __call__(self, x):
        if self.kind == F_LIN:
            return self.p1 * np.asarray(x, dtype=float)
        if self.kind == F_QUADLOG:
            x = np.asarray(x, dtype=float)
            return 0.5 * self.p1 * x * (1.0 - x)
        if self.kind == F_EXPDECAY:
            x = np.asarray(x, dtype=float)
            return 0.5 * self.p1 * x * np.exp(-x)
        if self.kind == F_LOGISTIC:
            x = np.asarray(x, dtype=float)
            return self.p1 * x * (1.0 - x / self.p2)
        raise ValueError(f"unknown scalar kind {self.kind}")

    def deriv(self, x):
        if self.kind == F_LIN:
            return self.p1 * np.ones_like(np.asarray(x, dtype=float))
        if self.kind == F_QUADLOG:
            x = np.asarray(x, dtype=float)
            return 0.5 * self.p1 * (1.0 - 2.0 * x)
        if self.kind == F_EXPDECAY:
            x = np.asarray(x, dtype=float)
            return 0.5 * self.p1 * (1.0 - x) * np.exp(-x)
        if self.kind == F_LOGISTIC:
            x = np.asarray(x, dtype=float)
            return self.p1 * (1.0 - 2.0 * x / self.p2)
        raise ValueError(f"unknown scalar kind {self.kind}")


def _carray(a):
    return np.ascontiguousarray(a, dtype=float)


@dataclass(frozen=True)
class KernelSpec:
    """Plain-array description of a collocated system for the backends.

    For a renewal system the state is U (length ``mx``); for a coupled
    system it is [U, V] with V of length ``my + 1`` and V[0] the current
    value of the differential component.
    """

    sys_kind: int
    mx: int
    my: int              # 0 for pure renewal systems
    dmat: np.ndarray     # (mx, mx) trimmed differentiation matrix of the U block
    lq: np.ndarray       # (qn, mx) Lagrange-derivative values at quadrature nodes
    qweights: np.ndarray  # (qn,) quadrature weights on the delay subinterval
    f1: tuple            # (kind, p1, p2) integrand of the renewal rule
    dy_rows: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    f2: tuple = (0, 0.0, 0.0)   # coupled only: integrand acting on the V block
    g: tuple = (0, 0.0, 0.0)    # coupled only: intrinsic dynamics of V[0]

    def __post_init__(self):
        object.__setattr__(self, "dmat", _carray(self.dmat))
        object.__setattr__(self, "lq", _carray(self.lq))
        object.__setattr__(self, "qweights", _carray(self.qweights))
        object.__setattr__(self, "dy_rows", _carray(self.dy_rows))

    @property
    def n(self):
        if self.sys_kind == SYS_RE:
            return self.mx
        return self.mx + self.my + 1
