"""Backend selection for the hot kernels.

The compiled extension ``sispace._ckernels`` is used when it imports; set
``SISPACE_PURE_PYTHON=1`` to force the numpy fallback.  ``BACKEND`` names the
active choice and ``get_backend(name)`` returns either implementation.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()

if _compiled is not None and os.environ.get("SISPACE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    _active: ModuleType = _compiled
    BACKEND = "cython"
else:
    _active = _kernels_py
    BACKEND = "python"


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def eigvalsh_batch(mats, tol: float = 1e-14, max_sweeps: int = 30):
    return _active.eigvalsh_batch(mats, tol, max_sweeps)


def offset_difference_energy(values, offsets, weights) -> float:
    return _active.offset_difference_energy(values, offsets, weights)
