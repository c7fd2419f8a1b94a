"""Selects the kernel implementation: compiled extension or numpy fallback.

The compiled module is preferred when importable; set KPRL_BACKEND=python
or KPRL_BACKEND=compiled to force one. Both expose the same A2CCore class.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build environment
    _kernels = None

from .errors import ParameterError

_MODULES = {"python": _kernels_py}
if _kernels is not None:
    _MODULES["compiled"] = _kernels


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_MODULES))


def default_backend() -> str:
    forced = os.environ.get("KPRL_BACKEND")
    if forced:
        if forced not in _MODULES:
            raise ParameterError(
                f"KPRL_BACKEND={forced!r} is not available; "
                f"choose from {available_backends()}"
            )
        return forced
    return "compiled" if "compiled" in _MODULES else "python"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: best available)."""
    if name is None:
        name = default_backend()
    if name not in _MODULES:
        raise ParameterError(
            f"backend {name!r} is not available; choose from {available_backends()}"
        )
    return _MODULES[name]


BACKEND = default_backend()
