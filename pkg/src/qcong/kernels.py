"""Backend selection for the hot series kernels.

The compiled Cython module is used when it was built; otherwise the numpy
fallback is imported. Setting ``QCONG_BACKEND=python`` before import forces
the fallback (used by the benchmark and the cross-backend tests).
"""

from __future__ import annotations

import os

from qcong import _fallback

fallback = _fallback

if os.environ.get("QCONG_BACKEND", "").lower() == "python":
    compiled = None
else:
    try:
        from qcong import _kernels as compiled
    except ImportError:
        compiled = None

active = compiled if compiled is not None else fallback
BACKEND = "compiled" if compiled is not None else "python"

mul_trunc = active.mul_trunc
sparse_mul = active.sparse_mul
sparse_div = active.sparse_div
