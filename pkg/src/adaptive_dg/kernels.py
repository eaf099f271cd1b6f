"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``ADAPTIVE_DG_BACKEND=python`` forces the fallback.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

if os.environ.get("ADAPTIVE_DG_BACKEND", "").lower() == "python" or _ckernels is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

_impl = BACKENDS[BACKEND]
nvb_closure = _impl.nvb_closure
nvb_bisect = _impl.nvb_bisect
pcg_jacobi = _impl.pcg_jacobi


def get_backend(name):
    """Return the kernel module for ``name`` ('python' or 'cython')."""
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available") from None
