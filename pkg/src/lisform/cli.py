"""Command-line runner.

    lisform run <scenario.json|bundled-name> [--out DIR] [--dt S] [--seed N]
    lisform verify <trace.jsonl> --config <cfg.json>
    lisform tables
    lisform serve <scenario.json|bundled-name> [--port P] [--speedup K] [--out DIR]

``run`` executes a scenario headlessly, writes ``trace.jsonl`` /
``config.json`` / ``report.json`` to the output directory, and exits nonzero
if any enabled criterion fails.  ``verify`` re-checks a saved trace.
``tables`` prints the initialization outputs for the four published input
rows.  ``serve`` starts the live websocket gateway on the same kernel.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .geometry import FormationConfig, Region, initialize_mission
from .scenario import ScenarioError, bundled_names, config_echo, load_bundled, load_scenario
from .sim.metrics import verify as verify_trace
from .sim.trace import SimTrace

TABLE_INPUTS = [
    ("matlab_sim_1", (10, 7, 4.7, 9.5, 0.5, 2, 1.05)),
    ("matlab_sim_2", (10, 7, 1.5, 3.2, 1.0, 2, 1.05)),
    ("sitl_sim", (25, 16, 7, 11, 0.3, 1, 1.05)),
    ("experiment", (5, 5, 2.7, 5.5, 0.2, 1, 1.05)),
]

TABLE_EXPECTED = {
    "matlab_sim_1": (5.0, 3.5, 2, 3, 1, 5, 4, 6, 0.0345, 0.481),
    "matlab_sim_2": (5.0, 3.5, 4, 11, 1, 15, 14, 16, 0.023, 0.074),
    "sitl_sim": (12.5, 8.0, 3, 7, 0, 10, 9, 10, 0.0045, 0.459),
    "experiment": (2.5, 2.5, 3, 2, 0, 5, 4, 5, 0.0222, 0.407),
}


def _load(ref: str, dt: float | None = None):
    if os.path.exists(ref):
        sc = load_scenario(ref) if dt is None else _load_with_dt(ref, dt)
    elif ref in bundled_names():
        sc = load_bundled(ref)
        if dt is not None:
            raise ScenarioError("--dt override requires a scenario file path")
    else:
        raise ScenarioError(
            f"no such scenario file or bundled name: {ref!r} "
            f"(bundled: {', '.join(bundled_names())})"
        )
    return sc


def _load_with_dt(path: str, dt: float):
    from .scenario import parse_scenario

    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    doc["dt_s"] = dt
    for c in doc.get("commands", []):
        c.pop("tick", None) if "t_s" in c else None
    return parse_scenario(doc, name=str(path))


def _print_report(report: dict) -> None:
    if report.get("status") == "no data":
        print("no data")
        return
    for name, c in report["criteria"].items():
        mark = "PASS" if c["pass"] else "FAIL"
        worst = "n/a" if c["worst"] is None else f"{c['worst']:.6g}"
        at = "" if c.get("t") is None else f" at t={c['t']:.2f}s"
        print(f"{mark} {name:10s} worst={worst}{at} (limit {c['limit']:.6g})")


def cmd_run(args) -> int:
    sc = _load(args.scenario, dt=args.dt)
    world = sc.build_world()
    world.run(sc.duration)
    out = args.out or sc.name
    os.makedirs(out, exist_ok=True)
    trace_path = os.path.join(out, "trace.jsonl")
    world.trace.write_jsonl(trace_path)
    with open(os.path.join(out, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(config_echo(sc), fh, indent=2)
    report = verify_trace(world.trace, sc.mission.config, sc.mission.region, sc.verify)
    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(f"trace: {trace_path} ({len(world.trace)} rows, {len(world.trace.events)} events)")
    _print_report(report)
    return 0 if report["ok"] else 1


def _config_from_echo(doc: dict) -> tuple[Region, FormationConfig]:
    r = doc["region"]
    c = doc["config"]
    region = Region(r["A_m"], r["B_m"])
    cfg = FormationConfig(
        N=c["N"],
        N_min=c["N_min"],
        N_max=c["N_max"],
        N_extra=c["N_extra"],
        sdot_nom=c["sdot_nom"],
        r_s=c["r_s_m"],
        r_com=c["r_com_m"],
        r_sm=c["r_sm_m"],
        r_cm=c["r_cm_m"],
        r_du=c["r_du_m"],
        r_dm=c["r_dm_m"],
        T_cov=c["T_cov_s"],
        V_max=c["V_max_mps"],
        eta=c["eta"],
        h_F=c["h_F_m"],
        h_L=c["h_L_m"],
    )
    return region, cfg


def cmd_verify(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        doc = json.load(fh)
    region, cfg = _config_from_echo(doc)
    trace = SimTrace.read_jsonl(args.trace)
    report = verify_trace(trace, cfg, region, args.criteria or None)
    _print_report(report)
    return 0 if report["ok"] else 1


def cmd_tables(args) -> int:
    hdr = f"{'case':14s} {'A':>5s} {'B':>5s} {'a':>2s} {'b':>2s} {'o':>2s} {'N':>3s} {'Nmin':>4s} {'Nmax':>4s} {'sdot_nom':>9s} {'r_dm':>6s}"
    print(hdr)
    ok_all = True
    for name, inp in TABLE_INPUTS:
        m = initialize_mission(*inp)
        got = (
            m.region.A, m.region.B, m.spec.a, m.spec.b, m.spec.o,
            m.config.N, m.config.N_min, m.config.N_max,
            m.config.sdot_nom, m.config.r_dm,
        )
        exp = TABLE_EXPECTED[name]
        ok = all(abs(g - e) < 1e-3 for g, e in zip(got, exp))
        ok_all &= ok
        print(
            f"{name:14s} {got[0]:5.1f} {got[1]:5.1f} {got[2]:2d} {got[3]:2d} "
            f"{got[4]:2d} {got[5]:3d} {got[6]:4d} {got[7]:4d} {got[8]:9.4f} "
            f"{got[9]:6.3f}  {'ok' if ok else 'MISMATCH'}"
        )
    return 0 if ok_all else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .gateway import LiveSession, create_app

    sc = _load(args.scenario)
    session = LiveSession(sc, out_dir=args.out, speedup=args.speedup)
    session.start()
    app = create_app(session, console_dir=args.console_dir)
    print(f"serving scenario '{sc.name}' on http://{args.host}:{args.port} (ws /ws)")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    session.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lisform")
    sub = ap.add_subparsers(dest="sub", required=True)

    p = sub.add_parser("run", help="run a scenario headlessly")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="output directory (default: scenario name)")
    p.add_argument("--dt", type=float, default=None, help="override timestep (s)")
    p.add_argument("--seed", type=int, default=0, help="reserved; the kernel is deterministic")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="re-verify a saved trace")
    p.add_argument("trace")
    p.add_argument("--config", required=True)
    p.add_argument("--criteria", nargs="*", default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("tables", help="print the published-table reproduction")
    p.set_defaults(fn=cmd_tables)

    p = sub.add_parser("serve", help="live gateway (websocket + console)")
    p.add_argument("scenario")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--speedup", type=float, default=1.0, help="sim seconds per wall second")
    p.add_argument("--out", default=None, help="write the session trace here on finish")
    p.add_argument("--console-dir", default=None, help="built console assets to serve at /")
    p.set_defaults(fn=cmd_serve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
