"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``PHASELAB_DISABLE_NUMBA=1``
to force the numpy path; it is also used when numba cannot be imported.
Both implementations stay importable as ``kernels.numpy_impl`` and
``kernels.numba_impl`` (the latter is ``None`` without numba) so they can be
cross-checked and benchmarked side by side.
"""
import os

from . import _numpy as numpy_impl

_FLAG = "PHASELAB_DISABLE_NUMBA"


def _numba_disabled():
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    from . import _numba as numba_impl
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

if numba_impl is not None and not _numba_disabled():
    _impl = numba_impl
    BACKEND = "numba"
else:
    _impl = numpy_impl
    BACKEND = "numpy"

csr_matvec = _impl.csr_matvec
pcg = _impl.pcg
assemble_flux = _impl.assemble_flux
flux_divergence = _impl.flux_divergence

CONVERGED = numpy_impl.CONVERGED
MAX_ITER = numpy_impl.MAX_ITER
BREAKDOWN = numpy_impl.BREAKDOWN

__all__ = [
    "BACKEND",
    "csr_matvec",
    "pcg",
    "assemble_flux",
    "flux_divergence",
    "numpy_impl",
    "numba_impl",
]
