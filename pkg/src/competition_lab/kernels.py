"""Kernel selection: compiled extension when available, pure Python otherwise.

Both implementations share the KernelState object and consume the same random
stream, so a given seed yields bit-identical trajectories either way. Set
COMPETITION_LAB_KERNEL=python to force the fallback (used by the benchmark).
"""

from __future__ import annotations

import os

from . import _kernel_py
from ._kernel_py import (  # noqa: F401  (re-exported constants)
    BLUE,
    EMPTY,
    MODE_ABORT,
    MODE_CLOSED,
    MODE_WRAP,
    MODEL_COMPETITION,
    MODEL_RICHARDSON,
    MODEL_VOTER,
    REASON_ABSORBED,
    REASON_BOUNDARY,
    REASON_EXTINCTION,
    REASON_NAMES,
    REASON_TIME,
    RED,
    KernelState,
)

try:
    from . import _speedups

    HAVE_SPEEDUPS = True
except ImportError:  # pragma: no cover - depends on build environment
    _speedups = None
    HAVE_SPEEDUPS = False


def get_advance(impl: str = "auto"):
    """Return the advance() function for the requested implementation.

    impl: "auto" (compiled if built), "compiled", or "python".
    """
    if impl == "auto":
        impl = os.environ.get("COMPETITION_LAB_KERNEL", "auto")
    if impl == "auto":
        impl = "compiled" if HAVE_SPEEDUPS else "python"
    if impl == "python":
        return _kernel_py.advance
    if impl == "compiled":
        if not HAVE_SPEEDUPS:
            raise RuntimeError("compiled kernel requested but _speedups is not built")
        return _speedups.advance
    raise ValueError(f"unknown kernel implementation {impl!r}")


def active_kernel_name() -> str:
    if os.environ.get("COMPETITION_LAB_KERNEL") == "python" or not HAVE_SPEEDUPS:
        return "python"
    return "compiled"
