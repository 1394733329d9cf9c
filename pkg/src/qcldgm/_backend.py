"""Kernel backend selection.

The compiled extension is used when importable; setting ``QCLDGM_PURE=1``
forces the numpy fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from qcldgm import _pykernels

pure: ModuleType = _pykernels
compiled: ModuleType | None

try:
    from qcldgm import _kernels as compiled  # type: ignore[no-redef]
except ImportError:  # extension not built
    compiled = None

if compiled is not None and os.environ.get("QCLDGM_PURE", "") not in ("1", "true", "yes"):
    kernels: ModuleType = compiled
    name = "cython"
else:
    kernels = pure
    name = "python"


def use(backend: str) -> None:
    """Switch kernels at runtime ("cython" or "python")."""
    global kernels, name
    if backend == "python":
        kernels, name = pure, "python"
    elif backend == "cython":
        if compiled is None:
            raise RuntimeError("compiled kernels are not built")
        kernels, name = compiled, "cython"
    else:
        raise ValueError(f"unknown backend {backend!r}")
