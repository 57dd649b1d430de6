"""Numeric backend selection.

Prefers the compiled extension ``ipmsim._kernels`` when it imported cleanly,
otherwise falls back to the pure-Python twin.  Set ``IPMSIM_BACKEND`` to
``compiled`` or ``python`` to force one side (``compiled`` raises if the
extension is unavailable).
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on how the wheel was built
    _kernels = None

_FORCED = os.environ.get("IPMSIM_BACKEND", "").strip().lower()
if _FORCED == "python":
    kernels = _kernels_py
elif _FORCED == "compiled":
    if _kernels is None:
        raise ImportError(
            "IPMSIM_BACKEND=compiled but the ipmsim._kernels extension is not built"
        )
    kernels = _kernels
elif _FORCED:
    raise ImportError(f"IPMSIM_BACKEND must be 'compiled' or 'python', got {_FORCED!r}")
else:
    kernels = _kernels if _kernels is not None else _kernels_py


def backend_name() -> str:
    """Name of the active backend: ``"compiled"`` or ``"python"``."""
    return kernels.BACKEND_NAME


def compiled_available() -> bool:
    """True when the compiled extension imported successfully."""
    return _kernels is not None
