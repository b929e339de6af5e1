"""Backend selection for the hot sampling kernels.

The compiled Cython extension is preferred when importable; otherwise the
pure-Python reference implementation is used. Both produce bit-identical
trajectories for identical inputs. Set ``REGENBOOT_BACKEND=python`` to force
the fallback (used by the benchmark and the parity tests).
"""

import os

from . import _pykernels

if os.environ.get("REGENBOOT_BACKEND", "").lower() == "python":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND_NAME

reflected_em_chunk = _impl.reflected_em_chunk
finite_chain_chunk = _impl.finite_chain_chunk
grid_chain_chunk = _impl.grid_chain_chunk

__all__ = [
    "BACKEND",
    "reflected_em_chunk",
    "finite_chain_chunk",
    "grid_chain_chunk",
]
