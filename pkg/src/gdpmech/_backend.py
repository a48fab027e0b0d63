"""Select the kernel implementation at import time.

The compiled extension is used when it imports cleanly.  Setting the
environment variable ``GDPMECH_PURE_PYTHON`` to a non-empty value other than
``0`` forces the numpy fallback, which is handy for benchmarking and for
checking that both paths agree.
"""

import os

from . import _kernels_py

_force_pure = os.environ.get("GDPMECH_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
