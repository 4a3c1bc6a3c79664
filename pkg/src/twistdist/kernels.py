"""Backend dispatch for the hot kernels.

Imports the compiled extension when available, otherwise the pure NumPy
fallback.  Set ``TWISTDIST_PURE_PY=1`` to force the fallback (used by the
benchmark and by tests that compare the two backends).
"""

from __future__ import annotations

import os

if os.environ.get("TWISTDIST_PURE_PY"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND_NAME

kronecker_one = _impl.kronecker_one
kronecker_table = _impl.kronecker_table
kronecker_col = _impl.kronecker_col
sweep_sum = _impl.sweep_sum
