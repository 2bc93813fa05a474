"""Backend switch for the Monte Carlo kernels.

Set ``SCALEKERNEL_DISABLE_NUMBA=1`` to force the vectorized numpy path;
``SCALEKERNEL_THREADS`` caps the numba thread pool (0 or unset = all cores).
"""
from __future__ import annotations

import os
import warnings

_FALSY = {"", "0", "false", "no", "off"}

# numba probes an old system TBB and falls back to another layer; nothing to act on
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    flag = os.environ.get("SCALEKERNEL_DISABLE_NUMBA", "").strip().lower()
    return HAVE_NUMBA and flag in _FALSY


def configure_threads() -> int:
    """Apply ``SCALEKERNEL_THREADS`` to numba and return the effective count."""
    if not HAVE_NUMBA:
        return 1
    raw = os.environ.get("SCALEKERNEL_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    limit = numba.config.NUMBA_NUM_THREADS
    n = limit if n <= 0 else min(n, limit)
    numba.set_num_threads(n)
    return n
