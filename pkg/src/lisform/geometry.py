"""Lissajous-curve formation geometry.

Closed-form kinematics of an N-agent formation riding a Lissajous curve
inside a rectangular region, the curve-selection search, and the mission
initialization that sizes the formation from sensor/communication ranges.

Conventions: SI meters/seconds, angles in radians.  An agent's position is

    x = A*cos(psi - a*s),  y = B*sin(psi + b*s)

with per-agent phase ``psi`` and a shared running parameter ``s``.  For a
fixed ``s`` the formation lies on one ellipse of a one-parameter conic
family; ``psi`` moves an agent along that ellipse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd
from typing import NamedTuple

from . import kernels

TWO_PI = 2.0 * math.pi


def wrap_angle(x: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:  # tiny negatives round up to the period itself
        r = 0.0
    return r


def signed_gap(x: float) -> float:
    """Reduce an angle difference to (-pi, pi]."""
    r = math.fmod(x, TWO_PI)
    if r > math.pi:
        r -= TWO_PI
    elif r <= -math.pi:
        r += TWO_PI
    return r


def forward_gap(frm: float, to: float) -> float:
    """One-sided gap from ``frm`` to ``to`` in the increasing direction, in [0, 2*pi)."""
    return wrap_angle(to - frm)


class Point2(NamedTuple):
    x: float
    y: float


class Vec2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Region:
    """Rectangular patrol region given by its half-dimensions."""

    A: float  # half-width (m)
    B: float  # half-height (m)

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0):
            raise ValueError("region half-dimensions must be positive")

    @property
    def diag(self) -> float:
        return math.hypot(self.A, self.B)


@dataclass(frozen=True)
class LissajousSpec:
    """Curve constants: co-prime (a, b) plus the phase-offset flag ``o``.

    ``o = 1`` marks the quarter-turn phase offset (offset angle o*pi/2) that
    keeps the traversal non-degenerate when ``a`` is even.
    """

    a: int
    b: int
    o: int

    def __post_init__(self):
        if self.a < 1 or self.b < 1:
            raise ValueError("curve constants must be positive integers")
        if gcd(self.a, self.b) != 1:
            raise ValueError(f"(a, b) = ({self.a}, {self.b}) are not co-prime")
        if self.o not in (0, 1):
            raise ValueError("offset flag must be 0 or 1")
        if self.o != 1 - (self.a % 2):
            raise ValueError("offset flag inconsistent with parity of a")

    @property
    def n(self) -> int:
        return self.a + self.b

    @property
    def offset(self) -> float:
        return self.o * math.pi / 2.0

    def formation_psis(self) -> list[float]:
        """Equi-parametric agent phases 2*pi*(i-1)/N + o*pi/2, i = 1..N."""
        return [wrap_angle(TWO_PI * i / self.n + self.offset) for i in range(self.n)]


@dataclass(frozen=True)
class FormationConfig:
    """Mission-wide constants produced by :func:`initialize_mission`."""

    N: int
    N_min: int
    N_max: int
    N_extra: int
    sdot_nom: float  # nominal parametric rate (1/s)
    r_s: float  # actual sensor footprint radius (m)
    r_com: float  # actual communication radius (m)
    r_sm: float  # required sensor radius lower bound (m)
    r_cm: float  # required communication radius lower bound (m)
    r_du: float  # per-curve hull-radius upper bound (m)
    r_dm: float  # mission-wide hull-radius upper bound (m)
    T_cov: float  # full-coverage time bound (s)
    V_max: float
    eta: float
    h_F: float = 1.5
    h_L: float = 0.5

    def __post_init__(self):
        if not (0 < self.h_L < self.h_F):
            raise ValueError("altitudes must satisfy 0 < h_L < h_F")
        if self.r_dm > self.r_du + 1e-12:
            raise ValueError("mission hull bound exceeds per-curve bound")


def curve_select(A: float, B: float, N: int) -> LissajousSpec:
    """Pick the co-prime (a, b) with a + b = N nearest to the coverage-optimal split.

    The target split a* = B^2*N/(A^2+B^2) minimizes the coverage time and
    maximizes the agent-size bound; the search walks outward from the nearest
    integer, alternating sides, until a co-prime pair is found.
    """
    if N < 2:
        raise ValueError("need at least 2 agents for a co-prime split")
    a_star = B * B * N / (A * A + B * B)
    d_u = math.ceil(a_star) - a_star
    d_l = a_star - math.floor(a_star)
    c = 1
    k_c, m = 0, 0
    if d_u <= d_l or a_star < 1:
        k_c, m = math.ceil(a_star), 0
    if d_u > d_l or a_star > N - 1:
        k_c, m = math.floor(a_star), 1
    while gcd(k_c, N - k_c) != 1:
        k_c += (-1) ** (c + m) * c
        c += 1
    a, b = k_c, N - k_c
    return LissajousSpec(a, b, 1 - (a % 2))


@dataclass(frozen=True)
class Mission:
    region: Region
    spec: LissajousSpec
    config: FormationConfig
    initial_positions: tuple[Point2, ...]


def initialize_mission(
    L: float,
    H: float,
    r_s: float,
    r_com: float,
    V_max: float,
    N_extra: int,
    eta: float,
    h_F: float = 1.5,
    h_L: float = 0.5,
) -> Mission:
    """Size the formation and pick the operating curve from mission inputs.

    Returns the region, the curve for N = N_min + 1 agents, the mission
    constants (including the hull-radius bound minimized over every fleet
    size the mission may reconfigure through), and the initial positions on
    the curve at s = 0.
    """
    if min(L, H, r_s, r_com, V_max) <= 0:
        raise ValueError("lengths and V_max must be positive")
    if N_extra < 1:
        raise ValueError("N_extra must be at least 1")
    if eta < 1.0:
        raise ValueError("safety factor eta must be >= 1")
    region = Region(L / 2.0, H / 2.0)
    R = eta * region.diag
    r_1 = r_s if r_s < R else R
    r_2 = r_com if r_com < 2.0 * R else 2.0 * R
    N_s = math.ceil(math.pi / abs(math.asin(r_1 / R)))
    N_c = math.ceil(math.pi / abs(math.asin(r_2 / (2.0 * R))))
    N_min = max(N_s, N_c)
    N_max = N_min + N_extra

    specs = [curve_select(region.A, region.B, N_min + j) for j in range(N_extra + 1)]
    r_d = [
        region.A * region.B / math.hypot(region.A * sp.a, region.B * sp.b)
        for sp in specs
    ]
    r_dm = min(r_d) * math.sin(math.pi / N_max)

    N = N_min + 1
    spec = specs[1]
    bnd = bounds(region, spec, eta, V_max)
    cfg = FormationConfig(
        N=N,
        N_min=N_min,
        N_max=N_max,
        N_extra=N_extra,
        sdot_nom=bnd["sdot_nom"],
        r_s=r_s,
        r_com=r_com,
        r_sm=bnd["r_sm"],
        r_cm=bnd["r_cm"],
        r_du=bnd["r_du"],
        r_dm=r_dm,
        T_cov=bnd["T_cov"],
        V_max=V_max,
        eta=eta,
        h_F=h_F,
        h_L=h_L,
    )
    pts = tuple(position(spec, region, psi, 0.0) for psi in spec.formation_psis())
    return Mission(region, spec, cfg, pts)


def bounds(region: Region, spec: LissajousSpec, eta: float, V_max: float) -> dict:
    """Formation bounds for one curve: ranges, size bound, rates, coverage time."""
    N = spec.n
    diag = region.diag
    sin_n = math.sin(math.pi / N)
    root = math.hypot(region.A * spec.a, region.B * spec.b)
    return {
        "r_sm": eta * sin_n * diag,
        "r_cm": 2.0 * eta * sin_n * diag,
        "r_du": sin_n * region.A * region.B / root,
        "T_cov": TWO_PI * root / (N * V_max),
        "D_M": 2.0 * sin_n * diag,
        "sdot_nom": V_max / root,
    }


def position(spec: LissajousSpec, region: Region, psi: float, s: float) -> Point2:
    return Point2(*kernels.lis_pos(region.A, region.B, spec.a, spec.b, psi, s))


def velocity(
    spec: LissajousSpec,
    region: Region,
    psi: float,
    s: float,
    psidot: float,
    sdot: float,
) -> tuple[Vec2, float]:
    vx, vy, speed = kernels.lis_vel(
        region.A, region.B, spec.a, spec.b, psi, s, psidot, sdot
    )
    return Vec2(vx, vy), speed


def ellipse_residual(region: Region, point: Point2, s: float, N: int) -> float:
    """Residual of the instantaneous formation conic; zero iff on the locus."""
    return kernels.ellipse_res(region.A, region.B, N, point[0], point[1], s)


def pair_distance(
    region: Region, spec: LissajousSpec, psi_i: float, psi_j: float, s: float
) -> float:
    """Euclidean distance between two agents sharing ``s`` (sign-folded closed form)."""
    return kernels.pair_dist(region.A, region.B, spec.a, spec.b, psi_i, psi_j, s)
