"""Numerical kernels with a compiled fast path.

The Cython extension is used when it was built and importable; otherwise the
numpy implementation is selected. Setting ``EIGENCLASS_PURE_PYTHON=1`` forces
the fallback.
"""
import os

from . import _fallback

try:
    if os.environ.get("EIGENCLASS_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("compiled kernels disabled by EIGENCLASS_PURE_PYTHON")
    from . import _jacobi as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _fallback.jacobi_eigh}
if _compiled is not None:
    BACKENDS["cython"] = _compiled.jacobi_eigh

BACKEND = "cython" if _compiled is not None else "python"
jacobi_eigh = BACKENDS[BACKEND]

__all__ = ["BACKEND", "BACKENDS", "jacobi_eigh"]
