"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the numpy
implementation is the fallback. Override with SLICENORMALS_BACKEND=python
or SLICENORMALS_BACKEND=compiled, or at runtime via use_backend().
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:
    _kernels_cy = None

_BACKENDS = {"python": _kernels_py}
if _kernels_cy is not None:
    _BACKENDS["compiled"] = _kernels_cy


def _initial():
    name = os.environ.get("SLICENORMALS_BACKEND", "").strip()
    if name:
        if name not in _BACKENDS:
            raise ImportError(
                f"SLICENORMALS_BACKEND={name!r} is not available; "
                f"choices are {sorted(_BACKENDS)}"
            )
        return _BACKENDS[name]
    return _BACKENDS.get("compiled", _kernels_py)


_active = _initial()


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active.BACKEND_NAME


def use_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choices are {sorted(_BACKENDS)}")
    _active = _BACKENDS[name]


def get_kernels(name: str | None = None):
    if name is None:
        return _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choices are {sorted(_BACKENDS)}")
    return _BACKENDS[name]
