"""Backend selection for the peeling kernel.

The compiled extension is preferred; the pure-Python implementation is a
drop-in replacement.  Set SPARDA_PURE_PYTHON=1 to force the fallback (used
by the benchmark and the backend-parity tests).
"""

import os

if os.environ.get("SPARDA_PURE_PYTHON"):
    from ._peel_py import peel_residual

    BACKEND = "python"
else:
    try:
        from ._peel_core import peel_residual  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - build-env dependent
        from ._peel_py import peel_residual  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["peel_residual", "BACKEND"]
