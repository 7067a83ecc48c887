"""Build script for the optional compiled kernel core.

The package is pure Python except for ``delyap._core``, a Cython twin of
``delyap._purepy`` holding the hot loops (adaptive RK stepping and the
QR-reorthonormalized fundamental-matrix propagation).  If Cython or a C
compiler is unavailable the extension is simply skipped and the package
falls back to the numpy implementation at import time.
"""

import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is None or not os.path.exists("src/delyap/_core.pyx"):
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "delyap._core",
                ["src/delyap/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
