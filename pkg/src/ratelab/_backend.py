"""Pick the compiled kernels when available, else the NumPy fallback.

Set ``RATELAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("RATELAB_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback

NAME = "python" if _impl is _fallback else "cython"

trajectory = _impl.trajectory
gelfand_scan = _impl.gelfand_scan

GD, MOMENTUM, RMSPROP, ADAM = _fallback.GD, _fallback.MOMENTUM, _fallback.RMSPROP, _fallback.ADAM
BUDGET, FLOOR, DIVERGED = _fallback.BUDGET, _fallback.FLOOR, _fallback.DIVERGED


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found
