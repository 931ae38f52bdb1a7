"""Scenario files: mission inputs plus a timed operator command script.

JSON schema (units spelled out in the field names):

    {
      "name": "matlab_sim_1",
      "init": {"L_m": 10, "H_m": 7, "r_s_m": 4.7, "r_com_m": 9.5,
               "V_max_mps": 0.5, "N_extra": 2, "eta": 1.05,
               "h_F_m": 1.5, "h_L_m": 0.5},
      "dt_s": 0.01,
      "duration_s": 190.0,
      "base_xy_m": [6.0, 0.0],          # optional; default outside the region
      "commands": [{"t_s": 0.0, "cmd": "take_off"},
                   {"tick": 1200, "cmd": "remove", "id": 2}],
      "verify": ["collision", "speed", "adjacency", "coverage", "reconfig"]
    }

Commands give either a time (``t_s``) or an exact tick; replay files written
by the live gateway use ticks.  A scenario must leave one full coverage
window after its last command (``allow_short_duration`` opts out, used by
replay files).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .geometry import Mission, initialize_mission

COMMANDS = ("take_off", "start", "land", "add", "remove", "replace")
CRITERIA = ("collision", "speed", "adjacency", "coverage", "reconfig")


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    init: dict
    dt: float
    duration: float
    commands: list[dict]  # each {"tick": int, "cmd": ..., ["id": int]}
    base_xy: tuple | None = None
    verify: list[str] = field(default_factory=lambda: list(CRITERIA))
    mission: Mission = None

    def build_world(self):
        from .sim.engine import make_world

        world = make_world(self.mission, dt=self.dt, base_xy=self.base_xy)
        for c in self.commands:
            payload = {k: v for k, v in c.items() if k != "tick"}
            world.enqueue_command(payload, tick=c["tick"])
        return world


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise ScenarioError(f"{where}: missing field '{key}'")
    return obj[key]


def parse_scenario(doc: dict, name: str = "scenario") -> Scenario:
    init = _need(doc, "init", name)
    for f in ("L_m", "H_m", "r_s_m", "r_com_m", "V_max_mps", "N_extra", "eta"):
        _need(init, f, f"{name}.init")
    dt = float(doc.get("dt_s", 0.01))
    if dt <= 0:
        raise ScenarioError(f"{name}: dt_s must be positive")
    duration = float(_need(doc, "duration_s", name))
    if duration < 0:
        raise ScenarioError(f"{name}: duration_s must be nonnegative")

    mission = initialize_mission(
        init["L_m"],
        init["H_m"],
        init["r_s_m"],
        init["r_com_m"],
        init["V_max_mps"],
        int(init["N_extra"]),
        float(init["eta"]),
        h_F=float(init.get("h_F_m", 1.5)),
        h_L=float(init.get("h_L_m", 0.5)),
    )

    cmds = []
    last_tick = -1
    for k, c in enumerate(doc.get("commands", [])):
        where = f"{name}.commands[{k}]"
        kind = _need(c, "cmd", where)
        if kind not in COMMANDS:
            raise ScenarioError(f"{where}: unknown command '{kind}'")
        if "tick" in c:
            tick = int(c["tick"])
        else:
            t_s = float(_need(c, "t_s", where))
            if t_s < 0:
                raise ScenarioError(f"{where}: command time must be nonnegative")
            tick = int(round(t_s / dt))
        if tick <= last_tick:
            raise ScenarioError(f"{where}: command times must be strictly increasing")
        last_tick = tick
        out = {"tick": tick, "cmd": kind}
        if kind in ("remove", "replace"):
            out["id"] = int(_need(c, "id", where))
        cmds.append(out)

    if cmds and not doc.get("allow_short_duration", False):
        tail = duration - cmds[-1]["tick"] * dt
        if tail < mission.config.T_cov:
            raise ScenarioError(
                f"{name}: duration must cover the last command plus one coverage "
                f"window ({mission.config.T_cov:.1f} s); short by "
                f"{mission.config.T_cov - tail:.1f} s"
            )

    crits = doc.get("verify", list(CRITERIA))
    for c in crits:
        if c not in CRITERIA:
            raise ScenarioError(f"{name}: unknown verify criterion '{c}'")

    base = doc.get("base_xy_m")
    return Scenario(
        name=doc.get("name", name),
        init=dict(init),
        dt=dt,
        duration=duration,
        commands=cmds,
        base_xy=tuple(base) if base else None,
        verify=list(crits),
        mission=mission,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, col {exc.colno}: {exc.msg}")
    return parse_scenario(doc, name=str(path))


def bundled_names() -> list[str]:
    root = resources.files("lisform.scenarios")
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> Scenario:
    root = resources.files("lisform.scenarios")
    doc = json.loads((root / f"{name}.json").read_text(encoding="utf-8"))
    return parse_scenario(doc, name=name)


def config_echo(sc: Scenario) -> dict:
    """Config document written beside traces and served by the gateway."""
    m = sc.mission
    c = m.config
    return {
        "region": {"A_m": m.region.A, "B_m": m.region.B},
        "curve": {"a": m.spec.a, "b": m.spec.b, "o": m.spec.o},
        "config": {
            "N": c.N,
            "N_min": c.N_min,
            "N_max": c.N_max,
            "N_extra": c.N_extra,
            "sdot_nom": c.sdot_nom,
            "r_s_m": c.r_s,
            "r_com_m": c.r_com,
            "r_sm_m": c.r_sm,
            "r_cm_m": c.r_cm,
            "r_du_m": c.r_du,
            "r_dm_m": c.r_dm,
            "T_cov_s": c.T_cov,
            "V_max_mps": c.V_max,
            "eta": c.eta,
            "h_F_m": c.h_F,
            "h_L_m": c.h_L,
        },
        "dt_s": sc.dt,
        "duration_s": sc.duration,
    }
