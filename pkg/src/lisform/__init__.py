"""Multi-agent surveillance formations on Lissajous curves.

Closed-form formation geometry, smooth transition trajectories, the
decentralized add/remove/replace reconfiguration protocol, a deterministic
fixed-timestep simulator, a scenario CLI, and a live websocket gateway.
"""

from .geometry import (
    FormationConfig,
    LissajousSpec,
    Mission,
    Point2,
    Region,
    Vec2,
    bounds,
    curve_select,
    ellipse_residual,
    initialize_mission,
    pair_distance,
    position,
    velocity,
)
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "FormationConfig",
    "LissajousSpec",
    "Mission",
    "Point2",
    "Region",
    "Vec2",
    "bounds",
    "curve_select",
    "ellipse_residual",
    "initialize_mission",
    "pair_distance",
    "position",
    "velocity",
    "KERNEL_BACKEND",
]
