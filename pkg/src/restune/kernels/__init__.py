"""Hot simulation kernels with backend selection at import time.

The compiled Cython extension is used when available; otherwise the
pure-Python reference implementation takes over.  Set ``RESTUNE_PURE_PY=1``
to force the fallback (useful for the backend-parity tests and benchmark).

Both backends implement the same two functions and produce bit-identical
output:

``drop_positions(cor, z0, radius, g, dt, n_frames, substeps)``
    1-D vertical drop onto the plane z=0.

``plane2d_positions(cor, x0, z0, vx0, vz0, nx, nz, radius, g, dt, n_frames,
substeps)``
    2-D ball against an inclined plane through the origin.
"""

import os

from . import _ballcore_py

if os.environ.get("RESTUNE_PURE_PY"):
    _impl = _ballcore_py
    BACKEND = "python"
else:
    try:
        from . import _ballcore as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _ballcore_py
        BACKEND = "python"

drop_positions = _impl.drop_positions
plane2d_positions = _impl.plane2d_positions

drop_positions_py = _ballcore_py.drop_positions
plane2d_positions_py = _ballcore_py.plane2d_positions

__all__ = [
    "BACKEND",
    "drop_positions",
    "plane2d_positions",
    "drop_positions_py",
    "plane2d_positions_py",
]
