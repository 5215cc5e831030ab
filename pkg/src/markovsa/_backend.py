"""Kernel backend selection.

The compiled extension is used when importable. Setting the environment
variable ``MARKOVSA_BACKEND=python`` forces the pure-Python kernels.
"""
import os

from . import _kernels_py

_requested = os.environ.get("MARKOVSA_BACKEND", "auto").lower()

if _requested == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        kernels = _kernels_py
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
