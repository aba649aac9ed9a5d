"""Kernel selection: compiled extension when importable, numpy otherwise.

``COHLEN_BACKEND=numpy`` forces the fallback.
"""

import importlib
import os


def load(name=None):
    """Return the kernel module for ``name`` ("cython" or "numpy")."""
    if name == "numpy":
        return importlib.import_module("cohlen._kernels_py")
    if name == "cython":
        return importlib.import_module("cohlen._kernels")
    raise ValueError(f"unknown backend {name!r}")


def _select():
    if os.environ.get("COHLEN_BACKEND", "").lower() == "numpy":
        return load("numpy")
    try:
        return load("cython")
    except ImportError:
        return load("numpy")


kernels = _select()
BACKEND = kernels.BACKEND
