"""Smooth scalar transition trajectories.

Two minimum-jerk-integral families cover every maneuver in the mission:

* a quartic *monotone* trajectory that changes a parameter's rate between two
  constant values (acceleration/deceleration along the curve), and
* a quintic *symmetric* trajectory that moves a parameter between two rest
  states, peaking at the midpoint (slides along the formation ellipse and,
  embedded in a straight segment, point-to-point waypoint flights).

Both are immutable after construction and evaluate in closed form at any
time.  Queries outside [T0, Tf] hold the endpoint rate (constant for the
monotone family, zero for the symmetric family) so a caller polling one tick
past the end sees a continuous state; the returned ``clamped`` flag reports
it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from . import kernels
from .geometry import Point2, Vec2


class TrajState(NamedTuple):
    g: float
    gdot: float
    gddot: float
    gdddot: float
    clamped: bool


@dataclass(frozen=True)
class MonotoneTrajectory:
    """Rate change ``gdot0 -> gdotf`` over [T0, T0+Tp] with zero end accelerations.

    The rate is monotone in the window, so it never leaves
    [min(gdot0, gdotf), max(gdot0, gdotf)].
    """

    T0: float
    Tp: float
    g0: float
    gdot0: float
    gdotf: float

    def __post_init__(self):
        if not self.Tp > 0.0:
            raise ValueError("transition window must have positive duration")

    @property
    def Tf(self) -> float:
        return self.T0 + self.Tp

    @property
    def gf(self) -> float:
        return self.g0 + 0.5 * self.Tp * (self.gdot0 + self.gdotf)

    def eval(self, t: float) -> TrajState:
        if t < self.T0:
            return TrajState(self.g0 + self.gdot0 * (t - self.T0), self.gdot0, 0.0, 0.0, True)
        if t > self.Tf:
            return TrajState(self.gf + self.gdotf * (t - self.Tf), self.gdotf, 0.0, 0.0, True)
        out = kernels.mono_eval(t - self.T0, self.Tp, self.g0, self.gdot0, self.gdotf - self.gdot0)
        return TrajState(*out, False)


def monotone_make(
    T0: float, g0: float, gf: float, gdot0: float, gdotf: float
) -> MonotoneTrajectory:
    """Build the rate change that lands on ``gf`` exactly; Tp follows from the endpoints."""
    if gdot0 + gdotf == 0.0:
        raise ValueError("no monotone transition between two zero rates with displacement")
    Tp = 2.0 * (gf - g0) / (gdotf + gdot0)
    if not Tp > 0.0:
        raise ValueError("endpoint values inconsistent with rate signs (Tp <= 0)")
    return MonotoneTrajectory(T0, Tp, g0, gdot0, gdotf)


def monotone_make_timed(
    T0: float, Tp: float, g0: float, gdot0: float, gdotf: float
) -> MonotoneTrajectory:
    """Build the rate change over a given window; the final value follows."""
    return MonotoneTrajectory(T0, Tp, g0, gdot0, gdotf)


@dataclass(frozen=True)
class SymmetricTrajectory:
    """Rest-to-rest move ``g0 -> gf`` over [T0, T0+Tp].

    |gdot| peaks at the midpoint with value 15|gf-g0|/(8*Tp).
    """

    T0: float
    Tp: float
    g0: float
    gf: float

    def __post_init__(self):
        if not self.Tp > 0.0:
            raise ValueError("transition window must have positive duration")

    @property
    def Tf(self) -> float:
        return self.T0 + self.Tp

    @property
    def gdot_peak(self) -> float:
        return 15.0 * abs(self.gf - self.g0) / (8.0 * self.Tp)

    def eval(self, t: float) -> TrajState:
        if t < self.T0:
            return TrajState(self.g0, 0.0, 0.0, 0.0, True)
        if t > self.Tf:
            return TrajState(self.gf, 0.0, 0.0, 0.0, True)
        out = kernels.sym_eval(t - self.T0, self.Tp, self.g0, self.gf - self.g0)
        return TrajState(*out, False)


def symmetric_make(T0: float, Tp: float, g0: float, gf: float) -> SymmetricTrajectory:
    return SymmetricTrajectory(T0, Tp, g0, gf)


class WaypointState(NamedTuple):
    p: Point2
    v: Vec2
    clamped: bool


@dataclass(frozen=True)
class WaypointTransition:
    """Straight-line rest-to-rest flight from p0 to pf.

    The window is stretched so the midpoint speed 15*d/(8*Tp) never exceeds
    ``V_max``; a longer ``Tp_floor`` can force a later arrival (used to hold
    an entering agent back until the formation has stopped).  p0 == pf gives
    a hold-in-place of duration ``Tp_floor``.
    """

    p0: Point2
    pf: Point2
    T0: float
    Tp: float
    d_f: float

    @property
    def Tf(self) -> float:
        return self.T0 + self.Tp

    def eval(self, t: float) -> WaypointState:
        if self.d_f == 0.0:
            return WaypointState(self.p0, Vec2(0.0, 0.0), not (self.T0 <= t <= self.Tf))
        if t < self.T0:
            return WaypointState(self.p0, Vec2(0.0, 0.0), True)
        if t > self.Tf:
            return WaypointState(self.pf, Vec2(0.0, 0.0), True)
        g, gd, _, _ = kernels.sym_eval(t - self.T0, self.Tp, 0.0, self.d_f)
        ux = (self.pf[0] - self.p0[0]) / self.d_f
        uy = (self.pf[1] - self.p0[1]) / self.d_f
        return WaypointState(
            Point2(self.p0[0] + g * ux, self.p0[1] + g * uy),
            Vec2(gd * ux, gd * uy),
            False,
        )


def waypoint_make(
    p0: Point2, pf: Point2, T0: float, V_max: float, Tp_floor: float = 0.0
) -> WaypointTransition:
    if V_max <= 0.0:
        raise ValueError("V_max must be positive")
    d_f = math.hypot(pf[0] - p0[0], pf[1] - p0[1])
    Tp = max(Tp_floor, 15.0 * d_f / (8.0 * V_max))
    return WaypointTransition(Point2(*p0), Point2(*pf), T0, Tp, d_f)
