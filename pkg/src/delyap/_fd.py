"""Central finite differences for Jacobians of vector fields."""

import numpy as np


def central_jacobian(fun, t, w, rel_step=1e-6):
    """Jacobian of fun(t, .) at w by central differences.

    Column i uses step rel_step * max(1, |w_i|).
    """
    w = np.asarray(w, dtype=float)
    n = w.size
    f0 = np.asarray(fun(t, w), dtype=float)
    jac = np.empty((f0.size, n))
    for i in range(n):
        h = rel_step * max(1.0, abs(w[i]))
        wp = w.copy()
        wm = w.copy()
        wp[i] += h
        wm[i] -= h
        jac[:, i] = (np.asarray(fun(t, wp)) - np.asarray(fun(t, wm))) / (2.0 * h)
    return jac
