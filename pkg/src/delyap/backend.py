"""Kernel backend selection.

The hot loops ship twice: ``delyap._core`` (Cython extension) and
``delyap._purepy`` (numpy twin).  The compiled module is preferred when it
imported successfully; the environment variable DELYAP_BACKEND or an
explicit set_default() call overrides the choice.  Both modules expose the
same descriptor-level API, so callers just use ``backend.get()``.
"""

import importlib
import os

_CHOICES = ("auto", "compiled", "pure")
_default = os.environ.get("DELYAP_BACKEND", "auto")
_modules = {}


def _load(name):
    if name not in _modules:
        modname = "delyap._core" if name == "compiled" else "delyap._purepy"
        try:
            _modules[name] = importlib.import_module(modname)
        except ImportError:
            _modules[name] = None
    return _modules[name]


def available():
    """Names of the backends importable in this installation."""
    return tuple(n for n in ("compiled", "pure") if _load(n) is not None)


def set_default(name):
    global _default
    if name not in _CHOICES:
        raise ValueError(f"backend must be one of {_CHOICES}, got {name!r}")
    if name != "auto" and _load(name) is None:
        raise ValueError(f"backend {name!r} is not available")
    _default = name


def get(name=None):
    """Resolve a backend module (the default one when name is None)."""
    name = name or _default
    if name == "auto":
        mod = _load("compiled") or _load("pure")
    else:
        mod = _load(name)
    if mod is None:
        raise RuntimeError(f"backend {name!r} unavailable")
    return mod


def active_name():
    return "compiled" if get().COMPILED else "pure"
