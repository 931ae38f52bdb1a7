# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend; same surface as ``_pure``."""

from libc.math cimport cos, sin, sqrt, fabs, hypot, INFINITY

import numpy as np

BACKEND = "cython"


cpdef tuple mono_eval(double dtau, double Tp, double g0, double gd0, double dgd):
    cdef double u2 = dtau * dtau
    cdef double u3 = u2 * dtau
    cdef double Tp2 = Tp * Tp
    cdef double Tp3 = Tp2 * Tp
    cdef double g = dgd * (-0.5 * u3 * dtau / Tp3 + u3 / Tp2) + gd0 * dtau + g0
    cdef double gd = dgd * (-2.0 * u3 / Tp3 + 3.0 * u2 / Tp2) + gd0
    cdef double gdd = 6.0 * dgd * (-u2 / Tp3 + dtau / Tp2)
    cdef double gddd = 6.0 * dgd * (-2.0 * dtau / Tp3 + 1.0 / Tp2)
    return g, gd, gdd, gddd


cpdef tuple sym_eval(double dtau, double Tp, double g0, double dg):
    cdef double u2 = dtau * dtau
    cdef double u3 = u2 * dtau
    cdef double Tp5 = Tp * Tp * Tp * Tp * Tp
    cdef double rem = Tp - dtau
    cdef double g = dg * (10.0 * Tp * Tp - 15.0 * Tp * dtau + 6.0 * u2) * u3 / Tp5 + g0
    cdef double gd = 30.0 * dg / Tp5 * u2 * rem * rem
    cdef double gdd = 60.0 * dg / Tp5 * dtau * (Tp * Tp - 3.0 * Tp * dtau + 2.0 * u2)
    cdef double gddd = 60.0 * dg / Tp5 * (Tp * Tp - 6.0 * Tp * dtau + 6.0 * u2)
    return g, gd, gdd, gddd


cpdef tuple lis_pos(double A, double B, int a, int b, double psi, double s):
    return A * cos(psi - a * s), B * sin(psi + b * s)


cpdef tuple lis_vel(double A, double B, int a, int b, double psi, double s,
                    double psid, double sd):
    cdef double vx = -A * sin(psi - a * s) * (psid - a * sd)
    cdef double vy = B * cos(psi + b * s) * (psid + b * sd)
    return vx, vy, hypot(vx, vy)


cpdef double ellipse_res(double A, double B, int n, double x, double y, double s):
    cdef double ns = n * s
    cdef double c = cos(ns)
    return y * y / (B * B) + x * x / (A * A) - 2.0 * x * y * sin(ns) / (A * B) - c * c


cpdef double pair_dist(double A, double B, int a, int b,
                       double psi_i, double psi_j, double s):
    cdef double pp = 0.5 * (psi_i + psi_j)
    cdef double pm = 0.5 * (psi_i - psi_j)
    cdef double sa = A * sin(pp - a * s)
    cdef double cb = B * cos(pp + b * s)
    return 2.0 * fabs(sin(pm)) * sqrt(sa * sa + cb * cb)


def positions(double A, double B, int a, int b, psis, ss):
    cdef double[::1] p = np.ascontiguousarray(psis, dtype=np.float64)
    cdef double[::1] q = np.ascontiguousarray(ss, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    xs = np.empty(n, dtype=np.float64)
    ys = np.empty(n, dtype=np.float64)
    cdef double[::1] xv = xs
    cdef double[::1] yv = ys
    cdef Py_ssize_t k
    for k in range(n):
        xv[k] = A * cos(p[k] - a * q[k])
        yv[k] = B * sin(p[k] + b * q[k])
    return xs, ys


def min_pair_distance(x, y, z, active, double band):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef unsigned char[:, ::1] av = np.ascontiguousarray(active, dtype=np.uint8)
    cdef Py_ssize_t T = xv.shape[0]
    cdef Py_ssize_t N = xv.shape[1]
    cdef double best = INFINITY
    cdef Py_ssize_t bt = -1, bi = -1, bj = -1
    cdef Py_ssize_t t, i, j
    cdef double dx, dy, d2
    for t in range(T):
        for i in range(N):
            if not av[t, i]:
                continue
            for j in range(i + 1, N):
                if not av[t, j]:
                    continue
                if fabs(zv[t, i] - zv[t, j]) >= band:
                    continue
                dx = xv[t, i] - xv[t, j]
                dy = yv[t, i] - yv[t, j]
                d2 = dx * dx + dy * dy
                if d2 < best * best:
                    best = sqrt(d2)
                    bt, bi, bj = t, i, j
    return best, bt, bi, bj


def cover_cells(xs, ys, double r_s, cx, cy, covered):
    cdef double[::1] px = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] py = np.ascontiguousarray(ys, dtype=np.float64)
    cdef double[::1] gx = np.ascontiguousarray(cx, dtype=np.float64)
    cdef double[::1] gy = np.ascontiguousarray(cy, dtype=np.float64)
    cdef unsigned char[:, ::1] cov = covered
    cdef double r2 = r_s * r_s
    cdef Py_ssize_t np_, nx, ny, k, ix, iy
    cdef double dx, dy
    np_ = px.shape[0]
    nx = gx.shape[0]
    ny = gy.shape[0]
    for iy in range(ny):
        for ix in range(nx):
            if cov[iy, ix]:
                continue
            for k in range(np_):
                dx = gx[ix] - px[k]
                dy = gy[iy] - py[k]
                if dx * dx + dy * dy <= r2:
                    cov[iy, ix] = 1
                    break
    return covered
