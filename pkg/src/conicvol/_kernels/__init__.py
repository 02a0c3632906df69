"""Contouring kernels with import-time backend selection.

The compiled extension is used when available; the NumPy implementation is
the fallback.  Override with CONICVOL_KERNELS=ext|pure|auto (default auto).
"""

import os

from . import _pure

_backend = os.environ.get("CONICVOL_KERNELS", "auto").lower()
if _backend not in ("auto", "ext", "pure"):
    raise RuntimeError(f"CONICVOL_KERNELS={_backend!r}: expected auto, ext or pure")

if _backend == "pure":
    _impl = _pure
else:
    try:
        from . import _fast as _impl
    except ImportError:
        if _backend == "ext":
            raise
        _impl = _pure

contour_measures = _impl.contour_measures


def backend_name() -> str:
    """Which kernel implementation is active ('ext' or 'pure')."""
    return _impl.BACKEND
