"""Pure-Python reference implementation of the ball integration kernels.

Semi-implicit Euler with event-corrected contacts: within each substep the
exact contact time is solved on the substep's linear position update, the
velocity is reflected there, and integration continues for the remainder of
the substep.  Positions never penetrate the contact surface at substep
boundaries.

The compiled Cython kernel (`_ballcore.pyx`) mirrors this code operation for
operation; the two must stay bit-identical.
"""

import numpy as np

# Contact events resolved per substep before the ball is declared at rest.
MAX_EVENTS = 8


def drop_positions(cor, z0, radius, g, dt, n_frames, substeps):
    """Height of a ball dropped onto the plane z=0, sampled at frame times.

    Returns an array of ``n_frames`` centre heights; element 0 is the initial
    state.  ``cor`` scales the vertical speed at each plane contact.
    """
    out = np.empty(n_frames, dtype=np.float64)
    out[0] = z0
    z = z0
    v = 0.0
    h = dt / substeps
    for i in range(1, n_frames):
        for _ in range(substeps):
            v = v - g * h
            t_rem = h
            resolved = False
            for _ in range(MAX_EVENTS):
                z_new = z + v * t_rem
                if z_new >= radius or v >= 0.0:
                    z = z_new
                    resolved = True
                    break
                tau = (radius - z) / v
                if tau > t_rem:
                    tau = t_rem
                z = radius
                v = -cor * v
                t_rem = t_rem - tau
                if v == 0.0:
                    resolved = True
                    break
            if not resolved:
                z = radius
                v = 0.0
        out[i] = z
    return out


def plane2d_positions(cor, x0, z0, vx0, vz0, nx, nz, radius, g, dt, n_frames, substeps):
    """2-D ball versus an inclined plane through the origin with unit normal
    (nx, nz).

    On contact the velocity component along the normal is scaled by -cor and
    the tangential component is preserved.  Returns an (n_frames, 2) array of
    (x, z) centre positions; row 0 is the initial state.
    """
    out = np.empty((n_frames, 2), dtype=np.float64)
    out[0, 0] = x0
    out[0, 1] = z0
    x = x0
    z = z0
    vx = vx0
    vz = vz0
    h = dt / substeps
    for i in range(1, n_frames):
        for _ in range(substeps):
            vz = vz - g * h
            t_rem = h
            resolved = False
            for _ in range(MAX_EVENTS):
                x1 = x + vx * t_rem
                z1 = z + vz * t_rem
                s1 = nx * x1 + nz * z1
                vn = nx * vx + nz * vz
                if s1 >= radius or vn >= 0.0:
                    x = x1
                    z = z1
                    resolved = True
                    break
                s0 = nx * x + nz * z
                tau = (radius - s0) / vn
                if tau < 0.0:
                    tau = 0.0
                if tau > t_rem:
                    tau = t_rem
                x = x + vx * tau
                z = z + vz * tau
                scale = (1.0 + cor) * vn
                vx = vx - scale * nx
                vz = vz - scale * nz
                t_rem = t_rem - tau
            if not resolved:
                # Pathological chattering: project onto the surface and kill
                # the normal velocity component.
                s0 = nx * x + nz * z
                x = x + (radius - s0) * nx
                z = z + (radius - s0) * nz
                vn = nx * vx + nz * vz
                vx = vx - vn * nx
                vz = vz - vn * nz
        out[i, 0] = x
        out[i, 1] = z
    return out
