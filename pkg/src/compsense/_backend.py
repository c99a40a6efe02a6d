"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy fallback. Set ``COMPSENSE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from compsense import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("COMPSENSE_PURE_PYTHON") != "1":
    try:
        from compsense import _ckernels
    except ImportError:
        pass
    else:
        kernels = _ckernels
        BACKEND = "cython"

splitmix64_fill = kernels.splitmix64_fill
top_k_indices = kernels.top_k_indices
iht_loop_real = kernels.iht_loop_real


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    found = {"python": _pykernels}
    try:
        from compsense import _ckernels
    except ImportError:
        return found
    found["cython"] = _ckernels
    return found
