"""Kernel backend selection.

``AUGMC_BACKEND=numpy`` forces the pure-numpy kernels; the default is
``numba`` when it imports, else numpy.
"""
import os

BACKEND_ENV = "AUGMC_BACKEND"


def _select():
    requested = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba":
        try:
            from augmc import kernels_numba
            return "numba", kernels_numba
        except ImportError:
            pass
    from augmc import kernels_numpy
    return "numpy", kernels_numpy


BACKEND, kernels = _select()


def get_kernels(name=None):
    """Return the kernel module for ``name``, or the active one."""
    if name is None:
        return kernels
    if name == "numba":
        from augmc import kernels_numba
        return kernels_numba
    if name == "numpy":
        from augmc import kernels_numpy
        return kernels_numpy
    raise ValueError(f"unknown backend {name!r}")
