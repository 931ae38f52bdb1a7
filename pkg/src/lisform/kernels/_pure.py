"""Pure-Python kernel backend.

Mirrors the Cython backend (``_fast.pyx``) function-for-function; the
dispatcher in ``__init__`` picks whichever is importable.  Scalar kernels use
``math``; batch kernels use numpy.
"""

import math

import numpy as np

BACKEND = "python"


def mono_eval(dtau, Tp, g0, gd0, dgd):
    """Quartic rate-change trajectory value and first three derivatives.

    ``dtau`` is the time since the segment start, already clamped by the
    caller to [0, Tp].
    """
    u2 = dtau * dtau
    u3 = u2 * dtau
    Tp2 = Tp * Tp
    Tp3 = Tp2 * Tp
    g = dgd * (-0.5 * u3 * dtau / Tp3 + u3 / Tp2) + gd0 * dtau + g0
    gd = dgd * (-2.0 * u3 / Tp3 + 3.0 * u2 / Tp2) + gd0
    gdd = 6.0 * dgd * (-u2 / Tp3 + dtau / Tp2)
    gddd = 6.0 * dgd * (-2.0 * dtau / Tp3 + 1.0 / Tp2)
    return g, gd, gdd, gddd


def sym_eval(dtau, Tp, g0, dg):
    """Quintic rest-to-rest trajectory value and first three derivatives."""
    u2 = dtau * dtau
    u3 = u2 * dtau
    Tp5 = Tp * Tp * Tp * Tp * Tp
    g = dg * (10.0 * Tp * Tp - 15.0 * Tp * dtau + 6.0 * u2) * u3 / Tp5 + g0
    rem = Tp - dtau
    gd = 30.0 * dg / Tp5 * u2 * rem * rem
    gdd = 60.0 * dg / Tp5 * dtau * (Tp * Tp - 3.0 * Tp * dtau + 2.0 * u2)
    gddd = 60.0 * dg / Tp5 * (Tp * Tp - 6.0 * Tp * dtau + 6.0 * u2)
    return g, gd, gdd, gddd


def lis_pos(A, B, a, b, psi, s):
    return A * math.cos(psi - a * s), B * math.sin(psi + b * s)


def lis_vel(A, B, a, b, psi, s, psid, sd):
    vx = -A * math.sin(psi - a * s) * (psid - a * sd)
    vy = B * math.cos(psi + b * s) * (psid + b * sd)
    return vx, vy, math.hypot(vx, vy)


def ellipse_res(A, B, n, x, y, s):
    ns = n * s
    return (
        y * y / (B * B)
        + x * x / (A * A)
        - 2.0 * x * y * math.sin(ns) / (A * B)
        - math.cos(ns) ** 2
    )


def pair_dist(A, B, a, b, psi_i, psi_j, s):
    pp = 0.5 * (psi_i + psi_j)
    pm = 0.5 * (psi_i - psi_j)
    sa = A * math.sin(pp - a * s)
    cb = B * math.cos(pp + b * s)
    return 2.0 * abs(math.sin(pm)) * math.sqrt(sa * sa + cb * cb)


def positions(A, B, a, b, psis, ss):
    psis = np.asarray(psis, dtype=float)
    ss = np.asarray(ss, dtype=float)
    return A * np.cos(psis - a * ss), B * np.sin(psis + b * ss)


def min_pair_distance(x, y, z, active, band):
    """Closest same-altitude-band approach over a (T, N) position history.

    Pairs count only where both agents are active and |z_i - z_j| < band.
    Returns (dmin, t_index, i, j); dmin is inf when no pair ever qualifies.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    active = np.asarray(active, dtype=bool)
    n = x.shape[1]
    best = math.inf
    best_t, best_i, best_j = -1, -1, -1
    for i in range(n):
        for j in range(i + 1, n):
            mask = active[:, i] & active[:, j] & (np.abs(z[:, i] - z[:, j]) < band)
            if not mask.any():
                continue
            dx = x[mask, i] - x[mask, j]
            dy = y[mask, i] - y[mask, j]
            d2 = dx * dx + dy * dy
            k = int(np.argmin(d2))
            d = math.sqrt(float(d2[k]))
            if d < best:
                best = d
                best_t = int(np.flatnonzero(mask)[k])
                best_i, best_j = i, j
    return best, best_t, best_i, best_j


def cover_cells(xs, ys, r_s, cx, cy, covered):
    """Mark grid cells whose centers fall within r_s of any sample point.

    ``cx``/``cy`` are the 1-D center coordinates; ``covered`` is an
    (len(cy), len(cx)) uint8 array updated in place.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    r2 = r_s * r_s
    gx = np.asarray(cx, dtype=float)[None, :]
    gy = np.asarray(cy, dtype=float)[:, None]
    chunk = max(1, int(2e6 // (len(cx) * len(cy) + 1)) or 1)
    for k0 in range(0, len(xs), chunk):
        px = xs[k0 : k0 + chunk]
        py = ys[k0 : k0 + chunk]
        d2 = (gx[None, :, :] - px[:, None, None]) ** 2 + (
            gy[None, :, :] - py[:, None, None]
        ) ** 2
        covered |= (d2 <= r2).any(axis=0)
    return covered
