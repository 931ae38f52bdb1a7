"""Live session gateway: websocket snapshots down, operator commands up.

The kernel steps on its own thread (wall-clock paced, optionally scaled or
unpaced); network I/O stays on the asyncio side.  The only shared structures
are a serialized command queue (multi-producer, kernel-consumer) and a
latest-snapshot slot (kernel-writer, any-reader).  Slow consumers miss
snapshots, never commands.

Wire formats:
  snapshot (server -> client):
      {"t": 3.2, "agents": [{"id": 1, "x": .., "y": .., "z": ..,
                             "mode": "Surveil", "speed": ..}, ...],
       "phase": "SURVEIL", "curve": {"a":..,"b":..,"o":..},
       "ellipse": {"u":..,"v":..}, "config": {...}}
  command (client -> server):  {"cmd": "remove", "id": 2}
  ack (server -> client):      {"ack": {...cmd}, "ok": true, "reason": "",
                                "tick": 1234}

Every accepted command is logged with its effective tick; replaying that
stream through the scenario runner reproduces the session trace byte for
byte.
"""

from __future__ import annotations

import asyncio
import json
import math
import os
import queue
import threading
import time

from fastapi import FastAPI
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.websockets import WebSocket, WebSocketDisconnect

from .geometry import wrap_angle
from .scenario import Scenario, config_echo
from .sim.metrics import verify as verify_trace

SNAPSHOT_HZ = 20.0
VALID_CMDS = ("take_off", "start", "land", "add", "remove", "replace")


class LiveSession:
    """One simulation run driven in (scaled) real time."""

    def __init__(self, scenario: Scenario, out_dir=None, speedup: float = 1.0, paced: bool = True):
        self.scenario = scenario
        self.world = scenario.build_world()
        self.out_dir = out_dir
        self.speedup = max(1e-9, speedup)
        self.paced = paced
        self.snapshot: dict | None = None
        self.finished = threading.Event()
        self._stop = threading.Event()
        self._cmds: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._loop, name="lisform-kernel", daemon=True)
        self._publish()

    # ------------------------------------------------------------- control
    def start(self):
        self._thread.start()

    def stop(self):
        self._stop.set()
        self._thread.join(timeout=30)

    def submit(self, cmd: dict, reply):
        """Queue a command; ``reply(ack_dict)`` runs on the kernel thread."""
        self._cmds.put((cmd, reply))

    # -------------------------------------------------------------- kernel
    def _loop(self):
        w = self.world
        total = int(round(self.scenario.duration / w.dt))
        next_wall = time.monotonic()
        while not self._stop.is_set() and w.tick < total:
            self._drain()
            w.step()
            self._publish()
            if self.paced:
                next_wall += w.dt / self.speedup
                lag = next_wall - time.monotonic()
                if lag > 0:
                    time.sleep(lag)
                else:
                    next_wall = time.monotonic()
        self._drain()
        if self.out_dir:
            os.makedirs(self.out_dir, exist_ok=True)
            w.trace.write_jsonl(os.path.join(self.out_dir, "trace.jsonl"))
            with open(os.path.join(self.out_dir, "config.json"), "w", encoding="utf-8") as fh:
                json.dump(config_echo(self.scenario), fh, indent=2)
            report = verify_trace(
                w.trace, self.scenario.mission.config, self.scenario.mission.region,
                self.scenario.verify,
            )
            with open(os.path.join(self.out_dir, "report.json"), "w", encoding="utf-8") as fh:
                json.dump(report, fh, indent=2)
        self.finished.set()
        while not self._stop.is_set():  # commands are never silently dropped
            try:
                cmd, reply = self._cmds.get(timeout=0.05)
            except queue.Empty:
                continue
            reply({"ack": cmd, "ok": False, "reason": "session finished", "tick": w.tick})

    def _drain(self):
        while True:
            try:
                cmd, reply = self._cmds.get_nowait()
            except queue.Empty:
                return
            ack = self.world.issue_command(cmd)
            reply({"ack": ack.cmd, "ok": ack.ok, "reason": ack.reason, "tick": ack.tick})

    def _publish(self):
        w = self.world
        t = w.t
        agents = []
        for aid in sorted(w.agents):
            ag = w.agents[aid]
            p = ag.pos(w.region, t)
            agents.append(
                {
                    "id": aid,
                    "x": p.x,
                    "y": p.y,
                    "z": ag.z,
                    "mode": ag.mode,
                    "speed": ag.hspeed(w.region, t),
                }
            )
        members = [w.agents[i] for i in sorted(w.formation_ids)]
        s_now = wrap_angle(members[0].s) if members else 0.0
        curve = members[0].curve if members else w.curve
        self.snapshot = {
            "t": t,
            "agents": agents,
            "phase": w.phase,
            "curve": {"a": curve.a, "b": curve.b, "o": curve.o},
            "ellipse": {
                "u": wrap_angle(curve.a * s_now),
                "v": wrap_angle(curve.b * s_now),
            },
            "config": {
                "A_m": w.region.A,
                "B_m": w.region.B,
                "r_s_m": w.config.r_s,
                "r_dm_m": w.config.r_dm,
                "N": len(w.formation_ids),
                "N_min": w.config.N_min,
                "N_max": w.config.N_max,
                "V_max_mps": w.config.V_max,
            },
        }

    # ------------------------------------------------------------ exports
    def replay_scenario_doc(self) -> dict:
        """Scenario document that reproduces this session's trace exactly."""
        doc = {
            "name": self.scenario.name + "_replay",
            "init": dict(self.scenario.init),
            "dt_s": self.world.dt,
            "duration_s": self.scenario.duration,
            "allow_short_duration": True,
            "commands": [
                dict(cmd, tick=tick) for tick, cmd in self.world.command_log
            ],
            "verify": list(self.scenario.verify),
        }
        if self.scenario.base_xy:
            doc["base_xy_m"] = list(self.scenario.base_xy)
        return doc


def _valid_command(cmd) -> str:
    if not isinstance(cmd, dict) or cmd.get("cmd") not in VALID_CMDS:
        return "malformed command"
    if cmd["cmd"] in ("remove", "replace") and not isinstance(cmd.get("id"), int):
        return "missing integer id"
    return ""


def create_app(session: LiveSession, console_dir=None) -> FastAPI:
    app = FastAPI(title="lisform gateway")

    @app.get("/config")
    def get_config():
        return JSONResponse(config_echo(session.scenario))

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        loop = asyncio.get_event_loop()
        outbound: asyncio.Queue = asyncio.Queue()

        async def sender():
            last_t = -math.inf
            while True:
                try:
                    msg = outbound.get_nowait()
                    await ws.send_text(json.dumps(msg, separators=(",", ":")))
                    continue
                except asyncio.QueueEmpty:
                    pass
                snap = session.snapshot
                if snap is not None and snap["t"] > last_t:
                    last_t = snap["t"]
                    await ws.send_text(json.dumps(snap, separators=(",", ":")))
                await asyncio.sleep(1.0 / SNAPSHOT_HZ)

        task = asyncio.ensure_future(sender())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    cmd = json.loads(text)
                except json.JSONDecodeError:
                    outbound.put_nowait({"ack": None, "ok": False, "reason": "malformed json", "tick": session.world.tick})
                    continue
                err = _valid_command(cmd)
                if err:
                    outbound.put_nowait({"ack": cmd if isinstance(cmd, dict) else None, "ok": False, "reason": err, "tick": session.world.tick})
                    continue
                session.submit(
                    cmd, lambda ack: loop.call_soon_threadsafe(outbound.put_nowait, ack)
                )
        except WebSocketDisconnect:
            pass
        finally:
            task.cancel()

    if console_dir and os.path.isdir(console_dir):
        index = os.path.join(console_dir, "index.html")

        @app.get("/")
        def root():
            return FileResponse(index)

        app.mount("/", StaticFiles(directory=console_dir), name="console")
    else:

        @app.get("/")
        def root_stub():
            return HTMLResponse(
                "<html><body><h3>lisform gateway</h3>"
                "<p>ws endpoint at <code>/ws</code>, config at <code>/config</code>; "
                "build the console under frontend/ and pass --console-dir to serve it.</p>"
                "</body></html>"
            )

    return app
