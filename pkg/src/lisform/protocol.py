"""Decentralized reconfiguration decision logic.

Pure functions for the three fleet operations (remove / add / replace):
choosing a safe stopping parameter away from the degenerate-ellipse windows,
re-expressing curve parameters on the destination curve, electing the
transition leader, assigning destination slots, and sizing the common
transition window.  Sequencing and message passing live in the simulator;
nothing here holds state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .geometry import (
    TWO_PI,
    LissajousSpec,
    Point2,
    Region,
    Vec2,
    forward_gap,
    position,
    signed_gap,
    wrap_angle,
)
from .trajectories import SymmetricTrajectory, symmetric_make

SNAP_EPS = 1e-9


class ProtocolStateError(RuntimeError):
    """Raised when message-derived state is inconsistent (corruption upstream)."""


class ParamPair(NamedTuple):
    s: float
    psi: float


def grid_ceil(psi: float, n_d: int, o_d: int) -> float:
    """Nearest destination-grid value at or above ``psi`` (offset-aware).

    Values within SNAP_EPS of a grid point count as on it.
    """
    off = o_d * math.pi / 2.0
    k = math.ceil((psi - off) * n_d / TWO_PI - SNAP_EPS)
    return k * TWO_PI / n_d + off


def grid_floor(psi: float, n_d: int, o_d: int) -> float:
    """Nearest destination-grid value at or below ``psi`` (offset-aware)."""
    off = o_d * math.pi / 2.0
    k = math.floor((psi - off) * n_d / TWO_PI + SNAP_EPS)
    return k * TWO_PI / n_d + off


def destination_grid(n_d: int, o_d: int) -> list[float]:
    """The N_d formation phases on the destination curve, wrapped to [0, 2*pi)."""
    off = o_d * math.pi / 2.0
    return [wrap_angle(TWO_PI * p / n_d + off) for p in range(n_d)]


@dataclass(frozen=True)
class AvoidSet:
    """Stopping-parameter windows around the degenerate (diagonal) ellipses.

    Transits along an ellipse stopped inside one of these open intervals
    cannot be guaranteed collision-free for hull radius ``r_dm``; the set is
    the whole circle (infeasible) when ``delta_s`` reaches half the diagonal
    spacing.
    """

    n_c: int
    delta_s: float

    @property
    def feasible(self) -> bool:
        return self.delta_s < math.pi / (2.0 * self.n_c)

    def diagonal(self, k: int) -> float:
        return (2 * k - 1) * math.pi / (2.0 * self.n_c)

    def interval_index(self, s: float):
        """Index k of the avoid interval containing ``s``, or None."""
        if not self.feasible:
            return 0
        sw = wrap_angle(s)
        d = sw * 2.0 * self.n_c / math.pi
        m = 2 * round((d - 1.0) / 2.0) + 1
        k = (m + 1) // 2
        if k < 1:
            k += 2 * self.n_c
        elif k > 2 * self.n_c:
            k -= 2 * self.n_c
        gap = abs(signed_gap(sw - self.diagonal(k)))
        return k if gap < self.delta_s else None

    def contains(self, s: float) -> bool:
        return self.interval_index(s) is not None

    def intervals(self) -> list[tuple[float, float]]:
        return [
            (self.diagonal(k) - self.delta_s, self.diagonal(k) + self.delta_s)
            for k in range(1, 2 * self.n_c + 1)
        ]


def avoid_set(
    n_c: int, r_dm: float, region: Region, delta_psi_min: float
) -> AvoidSet:
    """Build the avoid set for a transit whose minimum phase separation is given."""
    if not (0.0 < delta_psi_min <= math.pi):
        raise ValueError("minimum phase separation must lie in (0, pi]")
    delta_s = (
        math.pi
        / (2.0 * n_c)
        * (r_dm * region.diag / (region.A * region.B))
        / abs(math.sin(delta_psi_min / 2.0))
    )
    return AvoidSet(n_c, delta_s)


def select_stop(s_at_TR: float, n_c: int, avoid: AvoidSet | None) -> float:
    """Stopping parameter: a fixed look-ahead of pi/(8*N_c), pushed past any avoid window.

    Returns the unwrapped continuation of ``s_at_TR`` (always > it) so the
    caller can hand it straight to a deceleration trajectory.
    """
    s_tilde = s_at_TR + math.pi / (8.0 * n_c)
    if avoid is None:
        return s_tilde
    k = avoid.interval_index(s_tilde)
    if k is None:
        return s_tilde
    upper = avoid.diagonal(k) + avoid.delta_s
    return s_tilde + (upper - wrap_angle(s_tilde))


def transform_params(
    p: ParamPair, curve_c: LissajousSpec, curve_d: LissajousSpec
) -> ParamPair:
    """Re-express resting curve parameters on another curve, preserving position.

    Both parameter sets describe the same point on the same instantaneous
    formation ellipse; defined only between distinct curves.
    """
    if (curve_c.a, curve_c.b) == (curve_d.a, curve_d.b):
        raise ValueError("parameter transformation between identical curves")
    s_d_raw = p.s * curve_c.n / curve_d.n
    coef = (curve_d.a * curve_c.b - curve_c.a * curve_d.b) / curve_c.n
    psi_d = p.psi + coef * s_d_raw
    return ParamPair(s=wrap_angle(s_d_raw), psi=wrap_angle(psi_d))


@dataclass(frozen=True)
class ReconfigAssignment:
    """Destination slots and signed phase displacements for one transition."""

    leader_id: int
    direction: int  # +1: increasing psi, -1: decreasing
    psi_dest: dict[int, float]  # wrapped destination grid value per agent
    delta: dict[int, float]  # signed displacement per agent (|delta| < 2*pi)
    delta_max: float
    n_rank: dict[int, int]  # rank of each agent behind the leader


def _ranks(
    psi_d: Mapping[int, float], leader: int, direction: int, n_c: int
) -> dict[int, int]:
    """Agent rank along the transition direction, counted in pre-move slots."""
    psi_l = psi_d[leader]
    out = {}
    for i, psi in psi_d.items():
        gap = forward_gap(psi_l, psi) if direction > 0 else forward_gap(psi, psi_l)
        r = gap * n_c / TWO_PI
        n_i = int(round(r))
        if abs(r - n_i) > 1e-6:
            raise ProtocolStateError(
                f"agent {i} not on the pre-move slot grid (rank residue {r - n_i:.2e})"
            )
        if n_i == n_c:
            n_i = 0
        out[i] = n_i
    return out


def removal_plan(
    psi_d: Mapping[int, float], i_n: int, i_p: int, n_c: int, o_d: int
) -> ReconfigAssignment:
    """Slot assignment for shrinking the formation by one agent.

    ``psi_d`` holds the transformed phases of the N_c - 1 remaining agents;
    ``i_n``/``i_p`` are the removed agent's former next/previous neighbours.
    The closer of the two to a destination slot (along its own search
    direction) leads, and everyone walks the same way around the ellipse.
    """
    n_d = n_c - 1
    if n_d < 2:
        raise ValueError("removal would leave fewer than 2 agents")
    if len(psi_d) != n_d:
        raise ValueError("expected the phases of exactly N_c - 1 agents")
    spacing_d = TWO_PI / n_d
    spacing_c = TWO_PI / n_c

    cl_n = grid_ceil(psi_d[i_n], n_d, o_d)
    delta_n = cl_n - psi_d[i_n]
    cl_p = grid_floor(psi_d[i_p], n_d, o_d)
    delta_p = psi_d[i_p] - cl_p

    if delta_n <= delta_p:
        leader, direction, lead_dest, lead_delta = i_n, 1, cl_n, delta_n
    else:
        leader, direction, lead_dest, lead_delta = i_p, -1, cl_p, delta_p

    ranks = _ranks(psi_d, leader, direction, n_c)
    psi_dest, delta = {}, {}
    for i, n_i in ranks.items():
        mag = lead_delta + n_i * (spacing_d - spacing_c)
        delta[i] = direction * mag
        psi_dest[i] = wrap_angle(lead_dest + direction * n_i * spacing_d)
        target = psi_d[i] + delta[i]
        if abs(signed_gap(target - psi_dest[i])) > 1e-6:
            raise ProtocolStateError(f"agent {i} displacement does not land on its slot")
    delta_max = max(abs(d) for d in delta.values())
    return ReconfigAssignment(leader, direction, psi_dest, delta, delta_max, ranks)


class AdditionSlot(NamedTuple):
    i_p: int  # agent preceding the free slot pair
    delta1: float  # gap from i_p up to the first destination slot
    delta2: float  # slack past the second destination slot within i_p's interval
    psi_ia_D: float  # destination phase assigned to the entering agent (wrapped)
    entry_point: Point2


def addition_entry(
    psi_d: Mapping[int, float],
    n_c: int,
    o_d: int,
    s_df: float,
    curve_d: LissajousSpec,
    region: Region,
) -> AdditionSlot:
    """Locate the unique slot pair that frees a place for the entering agent.

    Exactly one pre-move interval contains two destination slots; the agent
    ahead of it is ``i_p`` and the newcomer takes whichever of the two slots
    leaves the shorter shuffle for everyone else.
    """
    n_d = n_c + 1
    if len(psi_d) != n_c:
        raise ValueError("expected the phases of exactly N_c agents")
    cands = []
    for i, psi in psi_d.items():
        d1 = grid_ceil(psi, n_d, o_d) - psi
        d2 = TWO_PI / n_c - (d1 + TWO_PI / n_d)
        if d2 > SNAP_EPS:
            cands.append((i, d1, d2))
    if len(cands) != 1:
        raise ProtocolStateError(
            f"expected exactly one double-slot interval, found {len(cands)}"
        )
    i_p, d1, d2 = cands[0]
    if d1 > d2:
        psi_ia = psi_d[i_p] + d1
    else:
        psi_ia = psi_d[i_p] + TWO_PI / n_c - d2
    entry = position(curve_d, region, psi_ia, s_df)
    return AdditionSlot(i_p, d1, d2, wrap_angle(psi_ia), entry)


def addition_plan(
    psi_d: Mapping[int, float], slot: AdditionSlot, n_c: int, o_d: int
) -> ReconfigAssignment:
    """Slot assignment for growing the formation by one agent.

    The agent adjacent to the newcomer's slot leads; with a denser
    destination grid every follower's displacement only shrinks, so the
    leader's is the longest.
    """
    n_d = n_c + 1
    if slot.delta1 > slot.delta2:
        leader, direction = slot.i_p, -1
    else:
        psi_n_expect = psi_d[slot.i_p] + TWO_PI / n_c
        leader = min(
            (i for i in psi_d if i != slot.i_p),
            key=lambda i: abs(signed_gap(psi_d[i] - psi_n_expect)),
        )
        direction = 1

    psi_dest, delta = {}, {}
    for i, psi in psi_d.items():
        dest = (
            grid_floor(psi, n_d, o_d) if direction < 0 else grid_ceil(psi, n_d, o_d)
        )
        delta[i] = dest - psi
        psi_dest[i] = wrap_angle(dest)
    ranks = _ranks(psi_d, leader, direction, n_c)
    delta_max = abs(delta[leader])
    if delta_max + 1e-9 < max(abs(d) for d in delta.values()):
        raise ProtocolStateError("leader does not hold the longest displacement")
    return ReconfigAssignment(leader, direction, psi_dest, delta, delta_max, ranks)


def replacement_entry(
    psi_ir: float, s_f: float, curve_c: LissajousSpec, region: Region
) -> Point2:
    """Ground-track point directly below the replaced agent once stopped."""
    return position(curve_c, region, psi_ir, s_f)


def outward_normal(
    curve: LissajousSpec, region: Region, psi: float, s_o: float
) -> Vec2:
    """Unit outward normal of the stopped formation ellipse at phase ``psi``."""
    sgn = 1.0 if math.cos(curve.n * s_o) >= 0.0 else -1.0
    nx = sgn * region.B * math.cos(psi + curve.b * s_o)
    ny = sgn * region.A * math.sin(psi - curve.a * s_o)
    norm = math.hypot(nx, ny)
    if norm < 1e-12:
        raise ProtocolStateError("degenerate normal (zero-length) at the exchange point")
    return Vec2(nx / norm, ny / norm)


def exchange_waypoint(
    curve: LissajousSpec, region: Region, psi: float, s_o: float, r_dm: float
) -> tuple[Point2, Vec2]:
    """Offset point 3*r_dm along the outward normal, clearing the exchange column."""
    n = outward_normal(curve, region, psi, s_o)
    p = position(curve, region, psi, s_o)
    return Point2(p.x + 3.0 * r_dm * n.x, p.y + 3.0 * r_dm * n.y), n


def psi_rate_limit(region: Region, V_max: float) -> float:
    """Largest phase rate whose worst-case physical speed stays below V_max."""
    return V_max / region.diag


def symmetric_window(
    delta_max: float,
    region: Region,
    V_max: float,
    T0: float,
    psi_now: Mapping[int, float],
    delta: Mapping[int, float],
) -> tuple[float, dict[int, SymmetricTrajectory]]:
    """Common transition window sized so the longest mover peaks at the speed limit."""
    if not delta_max > 0.0:
        raise ValueError("delta_max must be positive")
    Tp = 15.0 * delta_max * region.diag / (8.0 * V_max)
    trajs = {
        i: symmetric_make(T0, Tp, psi_now[i], psi_now[i] + delta[i]) for i in psi_now
    }
    return Tp, trajs
