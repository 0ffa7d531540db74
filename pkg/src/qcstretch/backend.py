"""Kernel backend selection.

The default backend is the numba-compiled one; set QCS_BACKEND=numpy to
force the pure-numpy fallback (or QCS_BACKEND=numba to require numba).
QCS_THREADS caps the numba thread pool when present.
"""

import os

GUARD = 1e-300

_ENV_BACKEND = "QCS_BACKEND"
_ENV_THREADS = "QCS_THREADS"


def _apply_thread_cap():
    raw = os.environ.get(_ENV_THREADS, "").strip()
    if not raw:
        return
    try:
        want = int(raw)
    except ValueError:
        raise ValueError(f"{_ENV_THREADS} must be an integer, got {raw!r}")
    if want < 1:
        raise ValueError(f"{_ENV_THREADS} must be >= 1, got {want}")
    import numba

    numba.set_num_threads(min(want, numba.config.NUMBA_NUM_THREADS))


def load_kernels(name=None):
    """Import and return a kernel module by name ('numba' or 'numpy')."""
    choice = (name or os.environ.get(_ENV_BACKEND, "")).strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"unknown backend {choice!r}; expected 'numba' or 'numpy'")
    if choice == "numpy":
        from . import _kernels_numpy

        return _kernels_numpy
    try:
        from . import _kernels_numba
    except ImportError:
        if choice == "numba":
            raise
        from . import _kernels_numpy

        return _kernels_numpy
    _apply_thread_cap()
    return _kernels_numba


kernels = load_kernels()
BACKEND_NAME = kernels.BACKEND
