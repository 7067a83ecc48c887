"""Lyapunov exponents of renewal and delay equations.

The pipeline: collocate the infinite-dimensional delay problem on Chebyshev
meshes (``discretize``), integrate the resulting ODE (``odeint``), linearize
along the computed orbit (``linearize``), and run the discrete QR method on
the variational system (``dqr``).  ``oracle`` provides independent spectra
(equilibrium eigenvalues, Floquet multipliers, a trapezoidal time stepper)
for validation, and ``cli`` wraps everything for the command line.  Hot
kernels live in a compiled extension with a pure-Python twin; ``backend``
picks one at import time.
"""

from .backend import active_name, available, set_default
from .discretize import (build_coupled_system, build_dde_system,
                         build_re_system, initial_state, output_row,
                         reconstruct_re_state)
from .dqr import DqrConfig, DqrFailure, LyapunovRun, dqr_lyapunov
from .linearize import (VariationalSystem, linearize_along,
                        reference_trajectory)
from .models import (cannibalism_re, logistic_daphnia, quad_re,
                     quad_re_periodic_solution)
from .odeint import IntegrationError, IvpProblem, Trajectory, integrate
from .oracle import equilibrium_les, floquet_les, trapezoidal_re_solve

__version__ = "0.1.0"

__all__ = [
    "DqrConfig", "DqrFailure", "IntegrationError", "IvpProblem",
    "LyapunovRun", "Trajectory", "VariationalSystem", "active_name",
    "available", "build_coupled_system", "build_dde_system",
    "build_re_system", "cannibalism_re", "dqr_lyapunov", "equilibrium_les",
    "floquet_les", "initial_state", "integrate", "linearize_along",
    "logistic_daphnia", "output_row", "quad_re", "quad_re_periodic_solution",
    "reconstruct_re_state", "reference_trajectory", "set_default",
    "trapezoidal_re_solve", "__version__",
]
