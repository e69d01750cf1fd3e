"""Kernel backend selection.

The compiled ``_core`` extension is used when it imports; otherwise the
numpy/LAPACK fallback.  Setting ``SDWAVE_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("SDWAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as kernels  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _pykernels


def get_kernels(name=None):
    """Return the kernel module for ``name`` ('cython', 'python') or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
