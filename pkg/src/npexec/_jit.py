"""Kernel compilation switch.

Hot loops are written in the numba-compatible subset of Python and wrapped
with :func:`kernel`. Setting ``NPEXEC_NO_JIT=1`` (or running without numba)
leaves them as plain Python, and the analysis kernels switch to their
vectorised numpy counterparts.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("NPEXEC_NO_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

JIT_ENABLED = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def kernel(fn):
    if JIT_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def python_impl(fn):
    """The undecorated function behind ``fn`` (itself when JIT is off)."""
    return getattr(fn, "py_func", fn)
