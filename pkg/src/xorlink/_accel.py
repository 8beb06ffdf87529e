"""Optional numba acceleration.

Every hot function in the package is decorated with :func:`njit` from this
module. When numba is importable and ``XORLINK_NO_NUMBA`` is unset, that is
the real ``numba.njit``; otherwise it is a pass-through decorator and the
same code runs as ordinary Python/numpy. Both paths execute identical
statements, so results are the same either way (only speed differs).
"""

from __future__ import annotations

import os

__all__ = ["njit", "using_numba"]


def _numba_disabled() -> bool:
    return os.environ.get("XORLINK_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


_USING_NUMBA = False

if not _numba_disabled():
    try:
        from numba import njit as _numba_njit

        _USING_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via XORLINK_NO_NUMBA instead
        _USING_NUMBA = False

if _USING_NUMBA:
    njit = _numba_njit
else:

    def njit(*args, **kwargs):
        """Pass-through stand-in for numba.njit (accepts and ignores options)."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def using_numba() -> bool:
    """True when functions decorated with :func:`njit` are actually compiled."""
    return _USING_NUMBA
