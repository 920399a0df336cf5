"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``LRCHAIN_BACKEND=python`` to force the fallback.
"""

import os

if os.environ.get("LRCHAIN_BACKEND", "").lower() == "python":
    from lrchain import _kernels_py as kernels
else:
    try:
        from lrchain import _kernels as kernels
    except ImportError:
        from lrchain import _kernels_py as kernels

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND"]
