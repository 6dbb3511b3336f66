"""Backend selection for the two hot kernels.

The compiled extension is used when available; setting the environment
variable ``CHERNOFF_PURE_PYTHON=1`` (before import) forces the NumPy
fallback. ``BACKEND`` reports which implementation is active.
"""

import os

from . import fallback

if os.environ.get("CHERNOFF_PURE_PYTHON"):
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from . import _fastkern as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built; fully supported configuration
        _impl = fallback
        BACKEND = "python"

kernel_matrix = _impl.kernel_matrix
make_sampler = _impl.make_sampler

__all__ = ["BACKEND", "kernel_matrix", "make_sampler", "fallback"]
