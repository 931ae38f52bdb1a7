"""Trace analysis: safety/coverage metrics and criteria verification.

Everything here is a pure function of a recorded trace plus the mission
config, so a saved trace re-verifies to the same report as the live run.
"""

from __future__ import annotations

import math

import numpy as np

from .. import kernels
from ..geometry import FormationConfig, Region
from .trace import SimTrace

AIRBORNE_Z = 1e-9
GROUND_MODES = ("Grounded", "Landed")


def _tick_tables(trace: SimTrace):
    """Reshape the row stream into (T, N) arrays over the union of agent ids.

    Returns (times, ids, x, y, z, speed, active, surveil) where ``active``
    marks airborne rows and ``surveil`` rows in curve-following mode.
    """
    if not len(trace):
        return None
    ids = sorted(set(trace.ids))
    col = {a: k for k, a in enumerate(ids)}
    times = sorted(set(trace.t))
    row_of = {t: k for k, t in enumerate(times)}
    T, N = len(times), len(ids)
    shape = (T, N)
    x = np.full(shape, np.nan)
    y = np.full(shape, np.nan)
    z = np.full(shape, np.nan)
    sp = np.full(shape, np.nan)
    active = np.zeros(shape, dtype=bool)
    surveil = np.zeros(shape, dtype=bool)
    for k in range(len(trace)):
        r, c = row_of[trace.t[k]], col[trace.ids[k]]
        x[r, c] = trace.x[k]
        y[r, c] = trace.y[k]
        z[r, c] = trace.z[k]
        sp[r, c] = trace.speed[k]
        mode = trace.mode[k]
        airborne = trace.z[k] > AIRBORNE_Z and mode not in GROUND_MODES
        active[r, c] = airborne
        surveil[r, c] = airborne and mode == "Surveil"
    return np.asarray(times), ids, x, y, z, sp, active, surveil


def min_pair_distance(trace: SimTrace, band: float):
    """Closest approach among airborne pairs inside the altitude band."""
    tab = _tick_tables(trace)
    if tab is None:
        return math.inf, None, None, None
    times, ids, x, y, z, _, active, _ = tab
    # Inactive cells are NaN; the active mask keeps them out of every pair.
    x = np.where(active, x, 0.0)
    y = np.where(active, y, 0.0)
    z = np.where(active, z, 1e12)
    d, t_idx, i, j = kernels.min_pair_distance(x, y, z, active, band)
    if t_idx < 0:
        return math.inf, None, None, None
    return d, float(times[t_idx]), ids[i], ids[j]


def max_speed(trace: SimTrace):
    tab = _tick_tables(trace)
    if tab is None:
        return 0.0, None, None
    times, ids, _, _, _, sp, active, _ = tab
    sp = np.where(active, sp, -1.0)
    k = int(np.argmax(sp))
    r, c = divmod(k, sp.shape[1])
    return float(sp[r, c]), float(times[r]), ids[c]


def max_adjacent_distance(trace: SimTrace):
    """Largest gap between ring-adjacent curve-following agents.

    Ring order is recovered per tick by polar angle about the origin; the
    formation locus is a convex origin-centered conic, so polar order equals
    curve order.
    """
    tab = _tick_tables(trace)
    if tab is None:
        return 0.0, None
    times, ids, x, y, _, _, _, surveil = tab
    worst, worst_t = 0.0, None
    for r in range(x.shape[0]):
        cols = np.flatnonzero(surveil[r])
        if len(cols) < 2:
            continue
        ang = np.arctan2(y[r, cols], x[r, cols])
        order = cols[np.argsort(ang)]
        px, py = x[r, order], y[r, order]
        dx = np.diff(np.append(px, px[0]))
        dy = np.diff(np.append(py, py[0]))
        d = float(np.max(np.hypot(dx, dy)))
        if d > worst:
            worst, worst_t = d, float(times[r])
    return worst, worst_t


def coverage_check(
    trace: SimTrace,
    region: Region,
    r_s: float,
    cell: float,
    t0: float = -math.inf,
    t1: float = math.inf,
) -> float:
    """Fraction of grid-cell centers sensed by an airborne agent in [t0, t1]."""
    if cell > r_s / 5 + 1e-12:
        raise ValueError("grid cell must not exceed r_s/5")
    nx = max(1, math.ceil(2 * region.A / cell))
    ny = max(1, math.ceil(2 * region.B / cell))
    cx = -region.A + (np.arange(nx) + 0.5) * (2 * region.A / nx)
    cy = -region.B + (np.arange(ny) + 0.5) * (2 * region.B / ny)
    covered = np.zeros((ny, nx), dtype=np.uint8)
    ts = np.asarray(trace.t)
    zs = np.asarray(trace.z)
    modes = np.asarray(trace.mode)
    sel = (ts >= t0) & (ts <= t1) & (zs > AIRBORNE_Z)
    sel &= ~np.isin(modes, GROUND_MODES)
    if sel.any():
        kernels.cover_cells(
            np.asarray(trace.x)[sel], np.asarray(trace.y)[sel], r_s, cx, cy, covered
        )
    return float(covered.sum()) / covered.size


def phase_timings(trace: SimTrace) -> list[dict]:
    return [ev for ev in trace.events if ev["event"] == "phase"]


def metrics(trace: SimTrace, config: FormationConfig, region: Region) -> dict:
    """Headline safety metrics plus a coverage figure over the first window."""
    if not len(trace):
        return {"status": "no data"}
    band = 2.0 * config.r_dm
    dmin, dmin_t, di, dj = min_pair_distance(trace, band)
    vmax, vmax_t, vid = max_speed(trace)
    adj, adj_t = max_adjacent_distance(trace)
    surveil_ts = [
        trace.t[k]
        for k in range(len(trace))
        if trace.mode[k] == "Surveil" and trace.speed[k] > 0
    ]
    cov = None
    if surveil_ts:
        w0 = surveil_ts[0]
        cov = coverage_check(
            trace, region, config.r_s, config.r_s / 10, w0, w0 + config.T_cov
        )
    return {
        "min_pair_dist_m": None if math.isinf(dmin) else dmin,
        "min_pair_dist_t": dmin_t,
        "min_pair_dist_ids": None if di is None else [di, dj],
        "max_speed_mps": vmax,
        "max_speed_t": vmax_t,
        "max_speed_id": vid,
        "max_adjacent_dist_m": adj,
        "max_adjacent_dist_t": adj_t,
        "coverage_fraction": cov,
        "phase_timings": phase_timings(trace),
    }


def verify(
    trace: SimTrace, config: FormationConfig, region: Region, criteria=None
) -> dict:
    """Pass/fail report per enabled criterion with worst cases and timestamps."""
    enabled = criteria or ["collision", "speed", "adjacency", "coverage", "reconfig"]
    m = metrics(trace, config, region)
    if m.get("status") == "no data":
        return {"status": "no data", "criteria": {}, "ok": True}
    out = {}
    if "collision" in enabled:
        d = m["min_pair_dist_m"]
        out["collision"] = {
            "pass": d is None or d > 2 * config.r_dm,
            "worst": d,
            "t": m["min_pair_dist_t"],
            "limit": 2 * config.r_dm,
            "ids": m["min_pair_dist_ids"],
        }
    if "speed" in enabled:
        out["speed"] = {
            "pass": m["max_speed_mps"] <= config.V_max * (1 + 1e-6),
            "worst": m["max_speed_mps"],
            "t": m["max_speed_t"],
            "limit": config.V_max,
        }
    if "adjacency" in enabled:
        out["adjacency"] = {
            "pass": m["max_adjacent_dist_m"] <= 2 * config.r_s + 1e-9,
            "worst": m["max_adjacent_dist_m"],
            "t": m["max_adjacent_dist_t"],
            "limit": 2 * config.r_s,
        }
    if "coverage" in enabled:
        cov = m["coverage_fraction"]
        out["coverage"] = {
            "pass": cov is None or cov >= 1.0 - 1e-12,
            "worst": cov,
            "t": None,
            "limit": 1.0,
        }
    if "reconfig" in enabled:
        worst_gap, worst_res, t_at = 0.0, 0.0, None
        seen = False
        for ev in trace.events:
            if ev["event"] == "reconfig_complete":
                seen = True
                if ev["max_gap_err"] > worst_gap:
                    worst_gap, t_at = ev["max_gap_err"], ev["t"]
                worst_res = max(worst_res, ev["max_residual"])
        out["reconfig"] = {
            "pass": (not seen) or (worst_gap < 1e-9 and worst_res < 1e-9),
            "worst": worst_gap,
            "t": t_at,
            "limit": 1e-9,
        }
    ok = all(v["pass"] for v in out.values())
    return {"criteria": out, "ok": ok, "metrics": m}
