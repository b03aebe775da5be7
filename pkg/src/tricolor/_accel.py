"""Numba switch.

Set ``TRICOLOR_DISABLE_NUMBA=1`` to run the pure numpy/Python fallbacks.
"""

from __future__ import annotations

import os

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None

DISABLED = os.environ.get("TRICOLOR_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = numba is not None and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is active, identity otherwise."""
    kwargs.setdefault("cache", True)
    if not USE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)
