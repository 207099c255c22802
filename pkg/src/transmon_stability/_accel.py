"""Backend selection for the hot numeric kernels.

Kernels exist in two flavours: a loop form compiled with numba and a
vectorised numpy form. ``TRANSMON_STABILITY_BACKEND`` picks one at import
time (``numba`` or ``numpy``); when unset, numba is used if it imports.
"""

from __future__ import annotations

import os

_requested = os.environ.get("TRANSMON_STABILITY_BACKEND", "").strip().lower()

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    _njit = None
    HAVE_NUMBA = False

if _requested not in ("", "numba", "numpy"):
    raise ImportError(
        f"TRANSMON_STABILITY_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numba" and not HAVE_NUMBA:  # pragma: no cover
    raise ImportError("TRANSMON_STABILITY_BACKEND=numba but numba is not installed")

BACKEND = "numpy" if (_requested == "numpy" or not HAVE_NUMBA) else "numba"


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator.

    The jitted variants are only dispatched to when ``BACKEND == "numba"``;
    wrapping still happens so both variants can be exercised side by side.
    """
    if _njit is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", False)
    return _njit(*args, **kwargs)
