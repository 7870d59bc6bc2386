"""Selection between numba-compiled kernels and the pure numpy/Python path.

Set ``FLOWMC_DISABLE_NUMBA=1`` in the environment to force the fallback
path (also used automatically when numba cannot be imported).
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("FLOWMC_DISABLE_NUMBA", "").strip().lower()

try:  # pragma: no cover - depends on the environment
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` with numba in nopython mode when enabled."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func
