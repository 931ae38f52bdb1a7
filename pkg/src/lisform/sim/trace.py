"""Simulation trace recording and the JSON-lines interchange format.

Row records hold exactly ``{"t", "id", "x", "y", "z", "speed", "mode"}``;
event records hold ``{"t", "event", ...}`` with free-form extra fields.  The
writer is byte-deterministic for a given trace, which the live-session replay
check relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class SimTrace:
    """Append-only per-tick agent states plus an event log."""

    t: list[float] = field(default_factory=list)
    ids: list[int] = field(default_factory=list)
    x: list[float] = field(default_factory=list)
    y: list[float] = field(default_factory=list)
    z: list[float] = field(default_factory=list)
    speed: list[float] = field(default_factory=list)
    mode: list[str] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)

    def add_row(self, t, agent_id, x, y, z, speed, mode):
        self.t.append(t)
        self.ids.append(agent_id)
        self.x.append(x)
        self.y.append(y)
        self.z.append(z)
        self.speed.append(speed)
        self.mode.append(mode)

    def add_event(self, t: float, event: str, **fields):
        rec = {"t": t, "event": event}
        rec.update(fields)
        self.events.append(rec)

    def __len__(self):
        return len(self.t)

    def rows(self):
        for k in range(len(self.t)):
            yield {
                "t": self.t[k],
                "id": self.ids[k],
                "x": self.x[k],
                "y": self.y[k],
                "z": self.z[k],
                "speed": self.speed[k],
                "mode": self.mode[k],
            }

    def write_jsonl(self, path):
        """Rows in tick order followed by events; stable bytes for equal traces."""
        with open(path, "w", encoding="utf-8") as fh:
            for row in self.rows():
                fh.write(json.dumps(row, separators=(",", ":")) + "\n")
            for ev in self.events:
                fh.write(json.dumps(ev, separators=(",", ":")) + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "SimTrace":
        tr = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if "event" in rec:
                    tr.events.append(rec)
                else:
                    tr.add_row(
                        rec["t"], rec["id"], rec["x"], rec["y"], rec["z"],
                        rec["speed"], rec["mode"],
                    )
        return tr
