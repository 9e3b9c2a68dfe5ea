"""Simulation kernel selection.

The compiled extension is preferred when importable; the numpy reference
implementation is the fallback. Set SOCIALLEARN_BACKEND to ``compiled`` or
``python`` to force one (forcing an unavailable backend raises).
"""

from __future__ import annotations

import os

from . import _reference

try:
    from . import _speedups
except ImportError:  # pragma: no cover - depends on the build environment
    _speedups = None

_BACKENDS = {"python": _reference}
if _speedups is not None:
    _BACKENDS["compiled"] = _speedups


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Resolve a kernel module by name, environment override, or default."""
    if name is None:
        name = os.environ.get("SOCIALLEARN_BACKEND")
    if name is None:
        name = "compiled" if "compiled" in _BACKENDS else "python"
    if name not in _BACKENDS:
        raise ValueError(
            f"backend {name!r} not available; choices: {available_backends()}"
        )
    return _BACKENDS[name]


DEFAULT = get_backend().NAME
