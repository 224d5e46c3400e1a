"""Kernel backend selection.

The compiled extension is used when it was built; setting
``RURALPLAN_PURE=1`` forces the numpy fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("RURALPLAN_PURE") != "1":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels

pivot = _impl.pivot
capex_scan = _impl.capex_scan
vcc_counts = _pykernels.vcc_counts


def backends() -> dict:
    """Available kernel modules keyed by name (for tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass
    return out
