"""Kernel backend selection.

The compiled numba kernels are used by default. Set ``MLBICGSTABT_NUMBA=0``
before import (or call :func:`set_backend`) to run the pure numpy fallback.
"""

import importlib
import os

_KERNELS = (
    "csr_matvec",
    "csr_matvec_adjoint",
    "csr_lower_solve",
    "csr_upper_solve",
    "csr_lower_solve_adjoint",
    "csr_upper_solve_adjoint",
    "ilu_threshold",
)

_FALSY = {"0", "false", "no", "off"}


def _numba_requested():
    return os.environ.get("MLBICGSTABT_NUMBA", "1").strip().lower() not in _FALSY


def load(name):
    """Return the kernel module for backend ``name`` ('numba' or 'numpy')."""
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(f"{__name__}._{name}")


def set_backend(name):
    """Rebind the module-level kernels to backend ``name``."""
    global backend
    mod = load(name)
    for fn in _KERNELS:
        globals()[fn] = getattr(mod, fn)
    backend = mod.name
    return backend


backend = None
if _numba_requested():
    try:
        set_backend("numba")
    except ImportError:
        set_backend("numpy")
else:
    set_backend("numpy")
