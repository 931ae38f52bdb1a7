"""Deterministic fixed-timestep world model.

Agents follow the formation kinematics through a per-agent mode machine;
cooperation happens over range-limited radio (messages flood hop-by-hop along
whatever connectivity exists, one hop per tick).  Every decision an agent
takes follows from its own state plus received payloads, so the behaviour
matches a decentralized deployment while staying reproducible: identical
config, command stream, and timestep give bit-identical traces.

Mode machine: Grounded -> TakingOff -> Surveil, then per reconfiguration
Decelerating -> Transformed -> AwaitAssignment -> SymTransition ->
Accelerating -> Surveil, with WaypointMove / AltitudeChange / ReturningToBase
/ Landed covering the entering and exiting legs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from ..geometry import (
    TWO_PI,
    FormationConfig,
    LissajousSpec,
    Point2,
    Region,
    curve_select,
    ellipse_residual,
    position,
    velocity,
    wrap_angle,
)
from ..protocol import (
    SNAP_EPS,
    ParamPair,
    ProtocolStateError,
    avoid_set,
    exchange_waypoint,
    grid_ceil,
    grid_floor,
    select_stop,
    transform_params,
)
from ..trajectories import (
    MonotoneTrajectory,
    SymmetricTrajectory,
    WaypointTransition,
    monotone_make,
    symmetric_make,
    waypoint_make,
)
from .trace import SimTrace

# Agent modes (trace strings)
GROUNDED = "Grounded"
TAKING_OFF = "TakingOff"
SURVEIL = "Surveil"
DECELERATING = "Decelerating"
TRANSFORMED = "Transformed"
AWAIT_ASSIGNMENT = "AwaitAssignment"
SYM_TRANSITION = "SymTransition"
WAYPOINT_MOVE = "WaypointMove"
ALTITUDE_CHANGE = "AltitudeChange"
ACCELERATING = "Accelerating"
RETURNING_TO_BASE = "ReturningToBase"
LANDED = "Landed"

# Mission phases (gateway strings)
PH_GROUND = "GROUND"
PH_TAKEOFF = "TAKEOFF"
PH_READY = "READY"
PH_SURVEIL = "SURVEIL"
PH_RECONFIG = "RECONFIG"
PH_LAND = "LAND"
PH_DONE = "DONE"


@dataclass(frozen=True)
class Msg:
    kind: str
    src: int
    seq: int
    payload: dict

    @property
    def key(self):
        return (self.src, self.seq)


@dataclass
class Ack:
    ok: bool
    reason: str
    tick: int
    cmd: dict


@dataclass
class Agent:
    id: int
    curve: LissajousSpec
    psi: float
    s: float
    z: float = 0.0
    psidot: float = 0.0
    sdot: float = 0.0
    mode: str = GROUNDED
    fixed_xy: Optional[Point2] = None
    alt_target: Optional[float] = None
    follow_curve_in_ramp: bool = False
    seg_s: Optional[MonotoneTrajectory] = None
    seg_psi: Optional[SymmetricTrajectory] = None
    seg_wp: Optional[WaypointTransition] = None
    pending_dec: Optional[tuple] = None  # (T0, s_cf)
    pending_sym: Optional[tuple] = None  # (T0, Tp, delta)
    pending_acc: Optional[tuple] = None  # (T0, n_d)
    role: Optional[str] = None  # exiting | entering | replacement
    comm_silent: bool = False
    contacted: bool = False
    arrived: bool = False
    proto: dict = field(default_factory=dict)
    seen: set = field(default_factory=set)
    inbox: list = field(default_factory=list)
    outbox: list = field(default_factory=list)

    def pos(self, region: Region, t: float) -> Point2:
        if self.mode in (WAYPOINT_MOVE, RETURNING_TO_BASE) and self.seg_wp:
            return self.seg_wp.eval(t).p
        if self.fixed_xy is not None:
            return self.fixed_xy
        return position(self.curve, region, self.psi, self.s)

    def hspeed(self, region: Region, t: float) -> float:
        if self.mode in (WAYPOINT_MOVE, RETURNING_TO_BASE) and self.seg_wp:
            v = self.seg_wp.eval(t).v
            return math.hypot(v.x, v.y)
        if self.fixed_xy is not None:
            return 0.0
        _, speed = velocity(self.curve, region, self.psi, self.s, self.psidot, self.sdot)
        return speed

    @property
    def airborne(self) -> bool:
        return self.z > 1e-9 and self.mode not in (GROUNDED, LANDED)


class World:
    """Simulation kernel: command intake, radio, agent updates, trace."""

    def __init__(
        self,
        region: Region,
        spec: LissajousSpec,
        config: FormationConfig,
        dt: float = 0.01,
        climb_rate: float = 0.5,
        base_xy=None,
    ):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.region = region
        self.curve = spec
        self.config = config
        self.dt = dt
        self.climb_rate = climb_rate
        self.base_xy = (
            Point2(*base_xy) if base_xy else Point2(region.A + 2 * config.r_s, 0.0)
        )
        if abs(self.base_xy.x) <= region.A and abs(self.base_xy.y) <= region.B:
            raise ValueError("base must lie outside the patrol rectangle")

        self.tick = 0
        self.mission_running = False
        self.phase = PH_GROUND
        self.trace = SimTrace()
        self.agents: dict[int, Agent] = {}
        self.formation_ids: set[int] = set()
        self.op: Optional[dict] = None
        self.margin_ticks = config.N_max + 3
        self._msg_seq = 0
        self._in_flight: list[Msg] = []
        self._cmd_queue: list[tuple[int, dict]] = []
        self._acks: list[Ack] = []
        self.command_log: list[tuple[int, dict]] = []

        for k, psi in enumerate(spec.formation_psis()):
            p = position(spec, region, psi, 0.0)
            self.agents[k + 1] = Agent(id=k + 1, curve=spec, psi=psi, s=0.0, fixed_xy=p)
            self.formation_ids.add(k + 1)
        if config.h_F - config.h_L < 4 * config.r_dm:
            self.trace.add_event(
                0.0, "warning", detail="h_F - h_L below 4*r_dm; vertical clearance tight"
            )
        self._t0_recorded = False
        self.trace.add_event(0.0, "phase", phase=self.phase)

    # ------------------------------------------------------------------ util
    @property
    def t(self) -> float:
        return self.tick * self.dt

    def _send(self, ag: Agent, kind: str, payload: dict, self_handle: bool = True) -> Msg:
        """Stage a flood broadcast; the sender also acts on its own message."""
        self._msg_seq += 1
        msg = Msg(kind, ag.id, self._msg_seq, payload)
        ag.seen.add(msg.key)
        ag.outbox.append(msg)
        if self_handle:
            self._handle_msg(ag, msg)
        return msg

    def _formation_agents(self) -> list[Agent]:
        return [self.agents[i] for i in sorted(self.formation_ids)]

    def _curve_for(self, n: int) -> LissajousSpec:
        return curve_select(self.region.A, self.region.B, n)

    def nominal_rate(self, curve: LissajousSpec) -> float:
        """Speed-limited parametric rate for the given curve."""
        return self.config.V_max / math.hypot(
            self.region.A * curve.a, self.region.B * curve.b
        )

    def _ring_neighbors(self, target: int) -> tuple[int, int]:
        """(next, previous) formation neighbours of ``target`` along +psi."""
        ids = sorted(self.formation_ids, key=lambda i: wrap_angle(self.agents[i].psi))
        k = ids.index(target)
        return ids[(k + 1) % len(ids)], ids[(k - 1) % len(ids)]

    # ------------------------------------------------------------- commands
    def enqueue_command(self, cmd: dict, tick: Optional[int] = None) -> int:
        """Schedule an operator command; returns the tick at which it applies."""
        eff = self.tick if tick is None else tick
        if eff < self.tick:
            raise ValueError("command scheduled in the past")
        self._cmd_queue.append((eff, cmd))
        return eff

    def _drain_commands(self):
        due = [c for c in self._cmd_queue if c[0] <= self.tick]
        for item in due:
            self._cmd_queue.remove(item)
            self._acks.append(self.issue_command(item[1]))

    def issue_command(self, cmd: dict) -> Ack:
        """Validate and apply one operator command at the current tick."""
        name = cmd.get("cmd")
        ok, reason = True, ""
        if name == "take_off":
            if self.phase != PH_GROUND:
                ok, reason = False, "not on ground"
            else:
                for ag in self._formation_agents():
                    ag.mode = TAKING_OFF
                    ag.alt_target = self.config.h_F
        elif name == "start":
            if self.phase != PH_READY:
                ok, reason = False, "not ready"
            else:
                self.mission_running = True
                for ag in self._formation_agents():
                    ag.sdot = self.nominal_rate(ag.curve)
        elif name == "land":
            if self.phase not in (PH_READY, PH_SURVEIL):
                ok, reason = False, "busy"
            else:
                self.mission_running = False
                for ag in self._formation_agents():
                    ag.sdot = 0.0
                    ag.psidot = 0.0
                    ag.fixed_xy = ag.pos(self.region, self.t)
                    ag.mode = ALTITUDE_CHANGE
                    ag.alt_target = 0.0
        elif name in ("remove", "replace"):
            target = cmd.get("id")
            if self.op is not None:
                ok, reason = False, "busy"
            elif self.phase != PH_SURVEIL:
                ok, reason = False, "not surveilling"
            elif target not in self.formation_ids:
                ok, reason = False, "unknown id"
            elif name == "remove" and len(self.formation_ids) - 1 < self.config.N_min:
                ok, reason = False, "below N_min"
            elif name == "remove":
                self._begin_removal(target)
            else:
                self._begin_replacement(target)
        elif name == "add":
            if self.op is not None:
                ok, reason = False, "busy"
            elif self.phase != PH_SURVEIL:
                ok, reason = False, "not surveilling"
            elif len(self.formation_ids) + 1 > self.config.N_max:
                ok, reason = False, "above N_max"
            else:
                self._begin_addition()
        else:
            ok, reason = False, "unknown command"
        if ok:
            self.command_log.append((self.tick, dict(cmd)))
        self.trace.add_event(
            self.t, "command", cmd=dict(cmd), ok=ok, reason=reason, tick=self.tick
        )
        return Ack(ok, reason, self.tick, dict(cmd))

    # ------------------------------------------------------ op initiation
    def _begin_removal(self, target: int):
        n_c = len(self.formation_ids)
        i_n, i_p = self._ring_neighbors(target)
        ag = self.agents[target]
        ag.role = "exiting"
        self._send(
            ag,
            "RemovalAlert",
            {"ir": target, "in": i_n, "ip": i_p, "n_c": n_c},
            self_handle=False,
        )
        ag.comm_silent = True
        # Ride the curve down at the nominal rate to hold formation spacing
        # until clear of the formation altitude band, then break for base.
        ag.mode = ALTITUDE_CHANGE
        ag.alt_target = self.config.h_L
        ag.follow_curve_in_ramp = True
        self.formation_ids.discard(target)
        self.op = {
            "kind": "remove",
            "n_c": n_c,
            "n_d": n_c - 1,
            "ir": target,
            "i_n": i_n,
            "i_p": i_p,
            "exit_ids": {target},
            "member_ids": set(self.formation_ids),
        }
        self.trace.add_event(self.t, "reconfig_start", kind="remove", id=target)

    def _spawn_at_base(self, role: str) -> Agent:
        aid = max(self.agents) + 1
        ag = Agent(
            id=aid,
            curve=self.curve,
            psi=0.0,
            s=0.0,
            fixed_xy=self.base_xy,
            role=role,
            mode=TAKING_OFF,
            alt_target=self.config.h_L,
        )
        self.agents[aid] = ag
        return ag

    def _begin_addition(self):
        n_c = len(self.formation_ids)
        ag = self._spawn_at_base("entering")
        self.op = {
            "kind": "add",
            "n_c": n_c,
            "n_d": n_c + 1,
            "ia": ag.id,
            "i_c": None,
            "member_ids": set(self.formation_ids),
            "exit_ids": set(),
        }
        self.trace.add_event(self.t, "reconfig_start", kind="add", id=ag.id)

    def _begin_replacement(self, target: int):
        n_c = len(self.formation_ids)
        ag = self._spawn_at_base("replacement")
        ag.proto["target"] = target
        self.op = {
            "kind": "replace",
            "n_c": n_c,
            "n_d": n_c,
            "ir": target,
            "iR": ag.id,
            "i_c": None,
            "member_ids": set(self.formation_ids),
            "exit_ids": {target},
        }
        self.trace.add_event(
            self.t, "reconfig_start", kind="replace", id=target, new_id=ag.id
        )

    # ------------------------------------------------------------- stepping
    def step(self):
        if not self._t0_recorded:
            self._t0_recorded = True
            self._record_rows(self.t)
        self._drain_commands()
        snap = {a.id: a.pos(self.region, self.t) for a in self.agents.values()}
        receivers = self._deliver(snap)
        self._resolve_contact_initiator(receivers, snap)
        for aid in sorted(self.agents):
            ag = self.agents[aid]
            while ag.inbox:
                self._handle_msg(ag, ag.inbox.pop(0))
        self._hail_checks(snap)
        t_next = (self.tick + 1) * self.dt
        for aid in sorted(self.agents):
            self._update_agent(self.agents[aid], t_next)
        self._exchange_trigger(t_next)
        for aid in sorted(self.agents):
            ag = self.agents[aid]
            self._in_flight.extend((m, aid) for m in ag.outbox)
            ag.outbox.clear()
        self.tick += 1
        self._record_rows(t_next)
        self._monitors(t_next)
        self._update_phase(t_next)

    def run(self, duration: float) -> SimTrace:
        for _ in range(int(round(duration / self.dt))):
            self.step()
        return self.trace

    def drain_acks(self) -> list[Ack]:
        out, self._acks = self._acks, []
        return out

    # --------------------------------------------------------------- radio
    def _deliver(self, snap) -> dict:
        """One flood hop: each in-flight copy reaches agents in range of its carrier."""
        receivers: dict[tuple, list[int]] = {}
        r_com = self.config.r_com
        for msg, carrier in self._in_flight:
            if carrier not in self.agents:
                continue
            sp = snap[carrier]
            for aid in sorted(self.agents):
                if aid == carrier:
                    continue
                ag = self.agents[aid]
                if msg.key in ag.seen:
                    continue
                q = snap[aid]
                if math.hypot(sp.x - q.x, sp.y - q.y) <= r_com:
                    ag.seen.add(msg.key)
                    ag.inbox.append(msg)
                    if not ag.comm_silent:
                        ag.outbox.append(msg)  # relay next tick
                    receivers.setdefault(msg.key, []).append(aid)
        self._in_flight = []
        return receivers

    def _resolve_contact_initiator(self, receivers, snap):
        """The closest formation receiver of a hail becomes the stop initiator."""
        if not self.op or self.op.get("i_c") is not None:
            return
        want = {"add": "AdditionRequest", "replace": "ReplaceRequest"}.get(self.op["kind"])
        if want is None:
            return
        requester = self.op.get("ia") or self.op.get("iR")
        rp = snap[requester]
        cands = []
        for aid in set(sum(receivers.values(), [])):
            if aid not in self.op["member_ids"]:
                continue
            if any(m.kind == want for m in self.agents[aid].inbox):
                q = snap[aid]
                cands.append((math.hypot(rp.x - q.x, rp.y - q.y), aid))
        if cands:
            self.op["i_c"] = min(cands)[1]

    def _hail_checks(self, snap):
        """Entering/replacement agents hail the formation once in radio range."""
        if not self.op:
            return
        for aid in sorted(self.agents):
            ag = self.agents[aid]
            if ag.role not in ("entering", "replacement") or ag.contacted:
                continue
            if ag.mode != AWAIT_ASSIGNMENT or ag.arrived:
                continue
            p = snap[ag.id]
            in_range = any(
                math.hypot(p.x - snap[m].x, p.y - snap[m].y) <= self.config.r_com
                for m in self.op["member_ids"]
            )
            if in_range:
                if ag.role == "entering":
                    self._send(ag, "AdditionRequest", {"ia": ag.id}, self_handle=False)
                else:
                    self._send(
                        ag,
                        "ReplaceRequest",
                        {"iR": ag.id, "ir": ag.proto["target"]},
                        self_handle=False,
                    )
                ag.contacted = True

    # ------------------------------------------------------------ messages
    def _handle_msg(self, ag: Agent, msg: Msg):
        handler = getattr(self, "_on_" + msg.kind, None)
        if handler:
            handler(ag, msg)

    def _on_RemovalAlert(self, ag: Agent, msg: Msg):
        if ag.id not in self.formation_ids:
            return
        ag.proto.update(
            op="remove", ir=msg.payload["ir"], i_n=msg.payload["in"], i_p=msg.payload["ip"]
        )
        if ag.id == msg.payload["in"]:
            self._initiate_stop(ag, "remove", {"ir": msg.payload["ir"]})

    def _on_AdditionRequest(self, ag: Agent, msg: Msg):
        if self.op and self.op["kind"] == "add" and ag.id == self.op.get("i_c"):
            self._initiate_stop(ag, "add", {"ia": msg.payload["ia"]})

    def _on_ReplaceRequest(self, ag: Agent, msg: Msg):
        if ag.id in self.formation_ids:
            ag.proto.update(op="replace", ir=msg.payload["ir"], iR=msg.payload["iR"])
        if self.op and self.op["kind"] == "replace" and ag.id == self.op.get("i_c"):
            self._initiate_stop(ag, "replace", dict(msg.payload))

    def _initiate_stop(self, ag: Agent, kind: str, extra: dict):
        if "stop" in ag.proto:
            return
        n_c = self.op["n_c"]
        if kind == "remove":
            av = avoid_set(n_c, self.config.r_dm, self.region, TWO_PI / n_c)
        elif kind == "add":
            av = avoid_set(n_c, self.config.r_dm, self.region, TWO_PI / (n_c + 1))
        else:
            av = None
        if av is not None and not av.feasible:
            raise ProtocolStateError("no feasible stopping ellipse for this hull radius")
        s_cf = select_stop(ag.s, n_c, av)
        payload = {
            "op": kind,
            "s_cf": s_cf,
            "T0": self.t + self.margin_ticks * self.dt,
            "n_c": n_c,
        }
        payload.update(extra)
        self._send(ag, "StopParam", payload)

    def _on_StopParam(self, ag: Agent, msg: Msg):
        if ag.id not in self.formation_ids or "stop" in ag.proto:
            return
        p = msg.payload
        ag.proto["op"] = p["op"]
        ag.proto["stop"] = p
        ag.pending_dec = (p["T0"], p["s_cf"])
        rate = self.nominal_rate(ag.curve)
        g0_pred = ag.s + rate * (p["T0"] - self.t)
        halt_T = p["T0"] + 2.0 * (p["s_cf"] - g0_pred) / rate
        ag.proto["halt_T"] = halt_T
        if p["op"] == "add":
            self._prepare_addition_info(ag, p, halt_T)
        elif p["op"] == "remove":
            self._prepare_removal_deltas(ag, p)
        elif p["op"] == "replace" and ag.id == p.get("ir"):
            self._send(
                ag,
                "EntryParams",
                {
                    "op": "replace",
                    "to": p["iR"],
                    "psi_ir": wrap_angle(ag.psi),
                    "s_cf": p["s_cf"],
                    "halt_T": halt_T,
                },
                self_handle=False,
            )

    def _stop_transform(self, ag: Agent, p: dict):
        """Post-stop parameters of this agent on the destination curve."""
        n_d = p["n_c"] + (1 if p["op"] == "add" else -1)
        curve_d = self._curve_for(n_d)
        q = transform_params(
            ParamPair(wrap_angle(p["s_cf"]), wrap_angle(ag.psi)), self.curve, curve_d
        )
        return curve_d, q

    def _prepare_removal_deltas(self, ag: Agent, p: dict):
        if ag.id not in (ag.proto.get("i_n"), ag.proto.get("i_p")):
            return
        curve_d, q = self._stop_transform(ag, p)
        if ag.id == ag.proto["i_n"]:
            cl = grid_ceil(q.psi, curve_d.n, curve_d.o)
            role, delta = "n", cl - q.psi
        else:
            cl = grid_floor(q.psi, curve_d.n, curve_d.o)
            role, delta = "p", q.psi - cl
        self._send(
            ag,
            "AssignmentInfo",
            {"op": "remove", "role": role, "id": ag.id, "delta": delta, "psi_d": q.psi},
        )

    def _prepare_addition_info(self, ag: Agent, p: dict, halt_T: float):
        curve_d, q = self._stop_transform(ag, p)
        n_c, n_d = p["n_c"], curve_d.n
        d1 = grid_ceil(q.psi, n_d, curve_d.o) - q.psi
        d2 = TWO_PI / n_c - (d1 + TWO_PI / n_d)
        if d2 > SNAP_EPS:
            psi_ia = q.psi + (d1 if d1 > d2 else TWO_PI / n_c - d2)
            i_n, _ = self._ring_neighbors(ag.id)
            self._send(
                ag,
                "AdditionInfo",
                {
                    "i_p": ag.id,
                    "i_n": i_n,
                    "d1": d1,
                    "d2": d2,
                    "psi_ip_d": q.psi,
                    "psi_ia_D": wrap_angle(psi_ia),
                    "halt_T": halt_T,
                },
            )
            self._send(
                ag,
                "EntryParams",
                {
                    "op": "add",
                    "to": p["ia"],
                    "psi_ia_D": wrap_angle(psi_ia),
                    "s_cf": p["s_cf"],
                    "n_c": n_c,
                    "halt_T": halt_T,
                },
                self_handle=False,
            )

    def _on_AssignmentInfo(self, ag: Agent, msg: Msg):
        if ag.id not in self.formation_ids or "stop" not in ag.proto:
            return
        ag.proto.setdefault("deltas", {})[msg.payload["role"]] = msg.payload
        info = ag.proto["deltas"]
        if "n" not in info or "p" not in info or "assign" in ag.proto:
            return
        dn, dp = info["n"], info["p"]
        n_c = ag.proto["stop"]["n_c"]
        n_d = n_c - 1
        if dn["delta"] <= dp["delta"]:
            lead, direction = dn, 1
        else:
            lead, direction = dp, -1
        curve_d, q = self._stop_transform(ag, ag.proto["stop"])
        gap = wrap_angle((q.psi - lead["psi_d"]) * direction)
        n_i = int(round(gap * n_c / TWO_PI)) % n_c
        delta = direction * (lead["delta"] + n_i * (TWO_PI / n_d - TWO_PI / n_c))
        delta_max = lead["delta"] + TWO_PI * (n_c - 2) / (n_c * (n_c - 1))
        self._stage_sym(ag, q, delta, delta_max)

    def _on_AdditionInfo(self, ag: Agent, msg: Msg):
        p = msg.payload
        if ag.role == "entering":
            ag.proto["add_info"] = p
            return
        if ag.id not in self.formation_ids or "stop" not in ag.proto:
            return
        if "assign" in ag.proto:
            return
        curve_d, q = self._stop_transform(ag, ag.proto["stop"])
        n_d = curve_d.n
        if p["d1"] > p["d2"]:
            dest = grid_floor(q.psi, n_d, curve_d.o)
            delta_max = TWO_PI / n_d - p["d1"]
        else:
            dest = grid_ceil(q.psi, n_d, curve_d.o)
            delta_max = TWO_PI / n_d - p["d2"]
        self._stage_sym(ag, q, dest - q.psi, delta_max)

    def _stage_sym(self, ag: Agent, q: ParamPair, delta: float, delta_max: float):
        Tp = 15.0 * delta_max * self.region.diag / (8.0 * self.config.V_max)
        T0 = ag.proto["halt_T"] + self.margin_ticks * self.dt
        ag.proto["assign"] = {"delta": delta, "delta_max": delta_max, "T0": T0, "Tp": Tp}
        ag.pending_sym = (T0, Tp, delta)

    def _on_EntryParams(self, ag: Agent, msg: Msg):
        p = msg.payload
        if ag.id != p["to"] or ag.arrived or ag.seg_wp is not None:
            return
        if p["op"] == "add":
            curve_d = self._curve_for(p["n_c"] + 1)
            s_df = wrap_angle(wrap_angle(p["s_cf"]) * p["n_c"] / curve_d.n)
            target = position(curve_d, self.region, p["psi_ia_D"], s_df)
            ag.proto["join"] = {"curve": curve_d, "psi": p["psi_ia_D"], "s": s_df}
        else:
            target = position(
                self.curve, self.region, p["psi_ir"], wrap_angle(p["s_cf"])
            )
            ag.proto["join"] = {"curve": self.curve, "psi": p["psi_ir"], "s": p["s_cf"]}
        floor = max(0.0, p["halt_T"] - self.t)
        here = ag.pos(self.region, self.t)
        ag.seg_wp = waypoint_make(here, target, self.t, self.config.V_max, floor)
        ag.fixed_xy = None
        ag.mode = WAYPOINT_MOVE

    def _on_ExchangeReady(self, ag: Agent, msg: Msg):
        p = msg.payload
        if p["stage"] == "arrived" and ag.id == p.get("ir"):
            ag.proto["iR_arrived"] = True
        elif p["stage"] == "cleared" and ag.id == p.get("iR"):
            ag.mode = ALTITUDE_CHANGE
            ag.alt_target = self.config.h_F

    def _on_AccelerateCmd(self, ag: Agent, msg: Msg):
        eligible = ag.id in self.formation_ids or ag.role in ("entering", "replacement")
        if eligible and ag.pending_acc is None and ag.mode != ACCELERATING:
            ag.pending_acc = (msg.payload["T0"], msg.payload["n_d"])

    def _send_accelerate(self, ag: Agent):
        if "accel_sent" in ag.proto:
            return
        ag.proto["accel_sent"] = True
        self._send(
            ag,
            "AccelerateCmd",
            {"T0": self.t + self.margin_ticks * self.dt, "n_d": self.op["n_d"]},
        )

    # ------------------------------------------------------------- updates
    def _update_agent(self, ag: Agent, t: float):
        cfg = self.config
        if ag.pending_dec and t >= ag.pending_dec[0] and ag.mode == SURVEIL:
            T0, s_cf = ag.pending_dec
            ag.seg_s = monotone_make(T0, ag.s, s_cf, self.nominal_rate(ag.curve), 0.0)
            ag.mode = DECELERATING
            ag.pending_dec = None
        if ag.pending_sym and t >= ag.pending_sym[0] and ag.mode == AWAIT_ASSIGNMENT:
            T0, Tp, delta = ag.pending_sym
            ag.seg_psi = symmetric_make(T0, Tp, ag.psi, ag.psi + delta)
            ag.mode = SYM_TRANSITION
            ag.pending_sym = None
        if ag.pending_acc and t >= ag.pending_acc[0] and ag.mode == AWAIT_ASSIGNMENT:
            T0, n_d = ag.pending_acc
            ag.seg_s = monotone_make(
                T0, ag.s, ag.s + math.pi / (8 * n_d), 0.0, self.nominal_rate(ag.curve)
            )
            ag.mode = ACCELERATING
            ag.pending_acc = None

        mode = ag.mode
        if mode in (GROUNDED, LANDED):
            return
        if mode == TAKING_OFF:
            self._ramp_z(ag)
            if ag.z == ag.alt_target:
                ag.alt_target = None
                if ag.role in ("entering", "replacement"):
                    ag.mode = AWAIT_ASSIGNMENT
                else:
                    ag.mode = SURVEIL
                    ag.fixed_xy = None
            return
        if mode == SURVEIL:
            if self.mission_running and ag.sdot:
                ag.s += ag.sdot * self.dt
            return
        if mode in (DECELERATING, ACCELERATING):
            st = ag.seg_s.eval(t)
            ag.s, ag.sdot = st.g, st.gdot
            if t >= ag.seg_s.Tf:
                ag.seg_s = None
                if mode == DECELERATING:
                    ag.sdot = 0.0
                    self._after_halt(ag)
                else:
                    ag.sdot = self.nominal_rate(ag.curve)
                    ag.mode = SURVEIL
                    ag.role = None
                    ag.proto.clear()
            return
        if mode == TRANSFORMED:
            ag.mode = AWAIT_ASSIGNMENT
            return
        if mode == SYM_TRANSITION:
            st = ag.seg_psi.eval(t)
            ag.psi, ag.psidot = st.g, st.gdot
            if t >= ag.seg_psi.Tf:
                ag.psidot = 0.0
                ag.seg_psi = None
                ag.mode = AWAIT_ASSIGNMENT
                if self.op and self.op["kind"] == "remove" and ag.id == self.op["i_n"]:
                    self._send_accelerate(ag)
            return
        if mode == AWAIT_ASSIGNMENT:
            self._await_hooks(ag, t)
            return
        if mode in (WAYPOINT_MOVE, RETURNING_TO_BASE):
            if ag.seg_wp is not None and t >= ag.seg_wp.Tf:
                dest = ag.seg_wp.pf
                ag.seg_wp = None
                ag.fixed_xy = dest
                if mode == RETURNING_TO_BASE:
                    ag.mode = ALTITUDE_CHANGE
                    ag.alt_target = 0.0
                else:
                    self._after_waypoint(ag)
            return
        if mode == ALTITUDE_CHANGE:
            if ag.follow_curve_in_ramp and ag.sdot:
                ag.s += ag.sdot * self.dt
            self._ramp_z(ag)
            if ag.z == ag.alt_target:
                ag.alt_target = None
                ag.follow_curve_in_ramp = False
                self._after_alt(ag)
            return

    def _ramp_z(self, ag: Agent):
        dz = self.climb_rate * self.dt
        if ag.z < ag.alt_target:
            ag.z = min(ag.alt_target, ag.z + dz)
        else:
            ag.z = max(ag.alt_target, ag.z - dz)

    # --------------------------------------------------------- mode hooks
    def _after_halt(self, ag: Agent):
        if ag.proto.get("op") in ("remove", "add"):
            curve_d, q = self._stop_transform(ag, ag.proto["stop"])
            ag.curve = curve_d
            ag.s = q.s
            ag.psi = q.psi
            ag.mode = TRANSFORMED
        else:
            ag.mode = AWAIT_ASSIGNMENT

    def _after_waypoint(self, ag: Agent):
        ag.mode = AWAIT_ASSIGNMENT
        ag.arrived = True
        join = ag.proto.get("join")
        if join:
            ag.curve = join["curve"]
            ag.psi = join["psi"]
            ag.s = join["s"]
            ag.fixed_xy = None
        if ag.role == "replacement":
            self._send(
                ag,
                "ExchangeReady",
                {"stage": "arrived", "ir": ag.proto["target"]},
                self_handle=False,
            )

    def _after_alt(self, ag: Agent):
        cfg = self.config
        if ag.z == 0.0:
            ag.mode = LANDED
            ag.role = None
            return
        if ag.role == "exiting" and ag.z == cfg.h_L:
            ag.sdot = 0.0
            here = ag.pos(self.region, self.t)
            ag.fixed_xy = None
            ag.seg_wp = waypoint_make(here, self.base_xy, self.t, cfg.V_max)
            ag.mode = RETURNING_TO_BASE
            return
        if ag.role == "entering" and ag.z == cfg.h_F:
            ag.mode = AWAIT_ASSIGNMENT
            ag.proto["at_formation_alt"] = True
            return
        if ag.role == "replacement" and ag.z == cfg.h_F:
            ag.mode = AWAIT_ASSIGNMENT
            self._send_accelerate(ag)
            return
        ag.mode = AWAIT_ASSIGNMENT

    def _await_hooks(self, ag: Agent, t: float):
        cfg = self.config
        if ag.role != "entering" or not ag.arrived:
            return
        info = ag.proto.get("add_info")
        if info is None:
            return
        if "ascend" not in ag.proto:
            i_l = info["i_p"] if info["d1"] > info["d2"] else info["i_n"]
            p = ag.pos(self.region, t)
            q = self.agents[i_l].pos(self.region, t)
            if math.hypot(p.x - q.x, p.y - q.y) > 2 * cfg.r_dm:
                ag.proto["ascend"] = True
                ag.mode = ALTITUDE_CHANGE
                ag.alt_target = cfg.h_F
            return
        if ag.proto.get("at_formation_alt") and "accel_sent" not in ag.proto:
            if t >= self._addition_sym_end(info):
                self._send_accelerate(ag)

    def _addition_sym_end(self, info: dict) -> float:
        n_d = self.op["n_d"]
        delta_max = TWO_PI / n_d - max(info["d1"], info["d2"])
        Tp = 15.0 * delta_max * self.region.diag / (8.0 * self.config.V_max)
        return info["halt_T"] + self.margin_ticks * self.dt + Tp

    def _exchange_trigger(self, t: float):
        """Replacement exchange: sideways clear-out, then the altitude swap."""
        if not self.op or self.op["kind"] != "replace":
            return
        ir = self.agents.get(self.op["ir"])
        if ir is None:
            return
        if (
            ir.mode == AWAIT_ASSIGNMENT
            and "exchange" not in ir.proto
            and ir.proto.get("iR_arrived")
            and ir.sdot == 0.0
            and t >= ir.proto.get("halt_T", math.inf)
        ):
            ir.proto["exchange"] = True
            wp, _ = exchange_waypoint(
                ir.curve, self.region, ir.psi, wrap_angle(ir.s), self.config.r_dm
            )
            here = ir.pos(self.region, t)
            d_f = math.hypot(wp.x - here.x, wp.y - here.y)
            ir.seg_wp = waypoint_make(
                here, wp, t, self.config.V_max, 15.0 * d_f / (4.0 * self.config.V_max)
            )
            ir.fixed_xy = None
            ir.mode = WAYPOINT_MOVE
        elif (
            ir.mode == AWAIT_ASSIGNMENT
            and ir.proto.get("exchange")
            and ir.arrived
            and "cleared_sent" not in ir.proto
        ):
            ir.proto["cleared_sent"] = True
            self._send(
                ir,
                "ExchangeReady",
                {"stage": "cleared", "iR": self.op["iR"]},
                self_handle=False,
            )
            ir.role = "exiting"
            self.formation_ids.discard(ir.id)
            ir.fixed_xy = ir.pos(self.region, t)
            ir.mode = ALTITUDE_CHANGE
            ir.alt_target = self.config.h_L

    # ------------------------------------------------------------- recording
    def _record_rows(self, t: float):
        for aid in sorted(self.agents):
            ag = self.agents[aid]
            p = ag.pos(self.region, t)
            self.trace.add_row(t, aid, p.x, p.y, ag.z, ag.hspeed(self.region, t), ag.mode)

    def _monitors(self, t: float):
        cfg = self.config
        band = 2 * cfg.r_dm
        air = [self.agents[i] for i in sorted(self.agents) if self.agents[i].airborne]
        for a in air:
            sp = a.hspeed(self.region, t)
            if sp > cfg.V_max * (1 + 1e-6) + 1e-12:
                self.trace.add_event(t, "speed_violation", id=a.id, speed=sp)
        for i, a in enumerate(air):
            pa = a.pos(self.region, t)
            for b in air[i + 1 :]:
                if abs(a.z - b.z) >= band:
                    continue
                pb = b.pos(self.region, t)
                d = math.hypot(pa.x - pb.x, pa.y - pb.y)
                if d <= band:
                    self.trace.add_event(t, "collision", ids=[a.id, b.id], dist=d, limit=band)

    def _update_phase(self, t: float):
        members = self._formation_agents()
        if members and all(a.mode == GROUNDED for a in members):
            new_phase = PH_GROUND
        elif any(a.mode == TAKING_OFF for a in members):
            new_phase = PH_TAKEOFF
        elif self.agents and all(a.mode == LANDED for a in self.agents.values()):
            new_phase = PH_DONE
        elif any(
            a.mode == ALTITUDE_CHANGE and a.alt_target == 0.0 for a in members
        ) or (not self.mission_running and any(a.mode == LANDED for a in members)):
            new_phase = PH_LAND
        elif self.op is not None:
            self._check_op_complete(t)
            new_phase = PH_RECONFIG if self.op is not None else PH_SURVEIL
        elif not self.mission_running:
            new_phase = PH_READY
        else:
            new_phase = PH_SURVEIL
        if new_phase != self.phase:
            self.phase = new_phase
            self.trace.add_event(t, "phase", phase=new_phase)

    def _check_op_complete(self, t: float):
        op = self.op
        formation = [self.agents[i] for i in sorted(op["member_ids"] - op["exit_ids"])]
        if op["kind"] == "add":
            formation.append(self.agents[op["ia"]])
        elif op["kind"] == "replace":
            formation.append(self.agents[op["iR"]])
        if not all(
            a.mode == SURVEIL and a.sdot == self.nominal_rate(a.curve)
            for a in formation
        ):
            return
        if not all(self.agents[i].mode == LANDED for i in op["exit_ids"]):
            return
        self.formation_ids = {a.id for a in formation}
        self.curve = formation[0].curve
        n_d = op["n_d"]
        psis = sorted(wrap_angle(a.psi) for a in formation)
        gaps = [wrap_angle(psis[(k + 1) % n_d] - psis[k]) for k in range(n_d)]
        max_gap_err = max(abs(g - TWO_PI / n_d) for g in gaps)
        max_res = 0.0
        for a in formation:
            p = a.pos(self.region, t)
            max_res = max(
                max_res,
                abs(ellipse_residual(self.region, p, wrap_angle(a.s), a.curve.n)),
            )
        self.trace.add_event(
            t,
            "reconfig_complete",
            kind=op["kind"],
            n_d=n_d,
            max_gap_err=max_gap_err,
            max_residual=max_res,
        )
        self.op = None


def make_world(mission, dt: float = 0.01, climb_rate: float = 0.5, base_xy=None) -> World:
    """World from an initialized mission bundle."""
    return World(mission.region, mission.spec, mission.config, dt, climb_rate, base_xy)
