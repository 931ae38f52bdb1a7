"""Kernel backend selection.

The compiled backend is used when its extension module built; setting
``LISFORM_PURE_PYTHON=1`` forces the pure backend (useful for the benchmark
and for debugging).  Both expose the identical function surface.
"""

import os

from . import _pure

if os.environ.get("LISFORM_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND

mono_eval = _impl.mono_eval
sym_eval = _impl.sym_eval
lis_pos = _impl.lis_pos
lis_vel = _impl.lis_vel
ellipse_res = _impl.ellipse_res
pair_dist = _impl.pair_dist
positions = _impl.positions
min_pair_distance = _impl.min_pair_distance
cover_cells = _impl.cover_cells


def backends():
    """Return the available backend modules keyed by name."""
    out = {"python": _pure}
    try:
        from . import _fast

        out["cython"] = _fast
    except ImportError:
        pass
    return out
