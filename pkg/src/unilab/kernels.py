"""Hot-kernel backend selection.

The compiled extension ``unilab._ckernels`` is used when it imports; otherwise
the numpy implementations in ``unilab._pykernels`` are used.  Setting
``UNILAB_PURE_PYTHON=1`` forces the fallback.
"""
import os

from unilab import _pykernels
from unilab._pykernels import (  # noqa: F401  (status / set-kind codes)
    LP_INFEASIBLE,
    LP_MAX_ITER,
    LP_NUMERIC,
    LP_OPTIMAL,
    LP_UNBOUNDED,
    SET_BALL,
    SET_L1,
    SET_SIMPLEX,
)

_impl = _pykernels
BACKEND = "python"
if not os.environ.get("UNILAB_PURE_PYTHON"):
    try:
        from unilab import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

project_simplex = _impl.project_simplex
project_l1_ball = _impl.project_l1_ball
project_ball = _impl.project_ball
simplex_excess_rows = _impl.simplex_excess_rows
l1_polar_min_rows = _impl.l1_polar_min_rows
pg_quadratic = _impl.pg_quadratic
lp_simplex = _impl.lp_simplex


def backends():
    """Map of available backend name -> kernel module (for tests and benchmarks)."""
    found = {"python": _pykernels}
    try:
        from unilab import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
