"""Select the kernel backend at import time.

The compiled ``_core`` extension is used when it was built; otherwise the
numpy implementation in ``_core_py`` is used.  Setting ``GCM_PURE_PYTHON=1``
forces the fallback.
"""
import os

if os.environ.get("GCM_PURE_PYTHON", "") not in ("", "0"):
    from . import _core_py as _impl
else:
    try:
        from . import _core as _impl
    except ImportError:
        from . import _core_py as _impl

BACKEND = _impl.BACKEND
bessel_pair = _impl.bessel_pair
hermite_coeffs = _impl.hermite_coeffs
horner_eval = _impl.horner_eval
