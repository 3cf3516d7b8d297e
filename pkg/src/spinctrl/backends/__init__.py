"""Path-kernel backend selection.

The compiled Cython core is used when importable, otherwise the vectorized
numpy implementation; SPINCTRL_BACKEND=cython|numpy|auto overrides.  Both
expose run_paths() with identical semantics.  Each backend is bitwise
deterministic on its own; the two differ from each other at rounding level
(dense-coupling summation order), so artifacts record which one produced
them.
"""

from __future__ import annotations

import os

from . import numpy_backend

_BACKENDS = {"numpy": numpy_backend}

try:  # compiled core is optional; the fallback covers every feature
    from . import _cykernels  # type: ignore[attr-defined]

    _BACKENDS["cython"] = _cykernels
except ImportError:
    _cykernels = None

_active = None


def available_backends() -> tuple:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Resolve a backend module by name, 'auto'/None meaning best available."""
    global _active
    if name in (None, "", "auto"):
        name = os.environ.get("SPINCTRL_BACKEND", "auto")
    if name in (None, "", "auto"):
        name = "cython" if "cython" in _BACKENDS else "numpy"
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = _BACKENDS[name]
    return _active


def active_backend():
    global _active
    if _active is None:
        get_backend()
    return _active


def backend_name() -> str:
    return active_backend().NAME
