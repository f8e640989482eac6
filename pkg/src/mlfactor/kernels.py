"""Kernel backend selection.

The compiled GMP extension is used when it was built; otherwise the pure-Python
fallback is loaded. Set ``MLFACTOR_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("MLFACTOR_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
fermat_search = _impl.fermat_search
strong_probable_prime = _impl.strong_probable_prime
