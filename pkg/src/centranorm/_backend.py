"""Select the numerical-kernel backend at import time.

The compiled extension is preferred when present; setting ``CN_PURE_PYTHON``
to a non-empty value other than ``0`` forces the NumPy fallback (useful for
benchmarking and debugging).
"""

import os

from . import _kernels_py

if os.environ.get("CN_PURE_PYTHON", "0").strip() not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

BACKEND = "compiled" if getattr(kernels, "IS_COMPILED", False) else "python"
