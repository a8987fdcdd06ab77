# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled ball integration kernels.

Mirrors `_ballcore_py` operation for operation so the two backends produce
bit-identical trajectories (the build disables FP contraction).
"""

import numpy as np

DEF MAX_EVENTS = 8


def drop_positions(double cor, double z0, double radius, double g,
                   double dt, int n_frames, int substeps):
    out = np.empty(n_frames, dtype=np.float64)
    cdef double[::1] o = out
    cdef double z = z0
    cdef double v = 0.0
    cdef double h = dt / substeps
    cdef double t_rem, z_new, tau
    cdef int i, s, ev
    cdef bint resolved
    o[0] = z0
    for i in range(1, n_frames):
        for s in range(substeps):
            v = v - g * h
            t_rem = h
            resolved = False
            for ev in range(MAX_EVENTS):
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
        o[i] = z
    return out


def plane2d_positions(double cor, double x0, double z0, double vx0, double vz0,
                      double nx, double nz, double radius, double g,
                      double dt, int n_frames, int substeps):
    out = np.empty((n_frames, 2), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double x = x0
    cdef double z = z0
    cdef double vx = vx0
    cdef double vz = vz0
    cdef double h = dt / substeps
    cdef double t_rem, x1, z1, s1, vn, s0, tau, scale
    cdef int i, s, ev
    cdef bint resolved
    o[0, 0] = x0
    o[0, 1] = z0
    for i in range(1, n_frames):
        for s in range(substeps):
            vz = vz - g * h
            t_rem = h
            resolved = False
            for ev in range(MAX_EVENTS):
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
                s0 = nx * x + nz * z
                x = x + (radius - s0) * nx
                z = z + (radius - s0) * nz
                vn = nx * vx + nz * vz
                vx = vx - vn * nx
                vz = vz - vn * nz
        o[i, 0] = x
        o[i, 1] = z
    return out
