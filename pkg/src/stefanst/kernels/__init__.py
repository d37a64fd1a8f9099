"""Hot-kernel backend selection.

The compiled Cython extension is preferred when present; the numpy
implementation in :mod:`stefanst.kernels.pure` is the fallback. Set
``STEFANST_KERNELS=python`` or ``=cython`` to force a backend.
"""

import os

from . import pure as _pure

_choice = os.environ.get("STEFANST_KERNELS", "").strip().lower()

if _choice == "python":
    _impl = _pure
elif _choice == "cython":
    from . import _core as _impl
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
scalar_slab = _impl.scalar_slab
ns_slab = _impl.ns_slab
reinit_distance = _impl.reinit_distance
