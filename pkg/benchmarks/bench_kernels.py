"""Compare the compiled and pure-Python kernel backends.

Times the scalar hot-path kernels at simulator call granularity and the two
batch analysis kernels at trace scale, then runs one full simulated scenario
under each backend.

    python benchmarks/bench_kernels.py [--calls N]
"""

import argparse
import os
import time

import numpy as np


def _time(fn, reps):
    t0 = time.perf_counter()
    fn(reps)
    return time.perf_counter() - t0


def bench_scalar(mod, calls):
    out = {}

    def mono(n):
        for k in range(n):
            mod.mono_eval(0.3, 2.0, 0.1, 0.2, 0.5)

    def pos(n):
        for k in range(n):
            mod.lis_pos(5.0, 3.5, 2, 3, 1.234, 0.567)

    def vel(n):
        for k in range(n):
            mod.lis_vel(5.0, 3.5, 2, 3, 1.234, 0.567, 0.0, 0.0345)

    def pdist(n):
        for k in range(n):
            mod.pair_dist(5.0, 3.5, 2, 3, 0.1, 1.2, 0.7)

    for name, fn in (("mono_eval", mono), ("lis_pos", pos), ("lis_vel", vel), ("pair_dist", pdist)):
        out[name] = _time(fn, calls) / calls
    return out


def bench_batch(mod):
    rng = np.random.default_rng(0)
    T, N = 20_000, 6
    x = rng.uniform(-5, 5, (T, N))
    y = rng.uniform(-3.5, 3.5, (T, N))
    z = np.full((T, N), 1.5)
    active = np.ones((T, N), dtype=bool)
    t0 = time.perf_counter()
    mod.min_pair_distance(x, y, z, active, 0.96)
    t_pair = time.perf_counter() - t0

    xs = rng.uniform(-5, 5, 90_000)
    ys = rng.uniform(-3.5, 3.5, 90_000)
    cx = np.linspace(-5, 5, 22)
    cy = np.linspace(-3.5, 3.5, 15)
    cov = np.zeros((15, 22), dtype=np.uint8)
    t0 = time.perf_counter()
    mod.cover_cells(xs, ys, 0.47, cx, cy, cov)
    t_cov = time.perf_counter() - t0
    return {"min_pair_distance(20k x 6)": t_pair, "cover_cells(90k pts)": t_cov}


def bench_scenario(backend_env):
    """Full matlab_sim_1 run wall time under one backend (subprocess)."""
    import subprocess
    import sys

    code = (
        "import time;"
        "from lisform import initialize_mission;"
        "from lisform.sim.engine import make_world;"
        "m = initialize_mission(10, 7, 4.7, 9.5, 0.5, 2, 1.05);"
        "w = make_world(m, dt=0.01, base_xy=(6.0, 0.0));"
        "w.enqueue_command({'cmd': 'take_off'}, tick=0);"
        "w.enqueue_command({'cmd': 'start'}, tick=600);"
        "w.enqueue_command({'cmd': 'add'}, tick=1200);"
        "t0 = time.perf_counter(); w.run(60.0);"
        "print(time.perf_counter() - t0)"
    )
    env = dict(os.environ)
    env.pop("LISFORM_PURE_PYTHON", None)
    if backend_env:
        env["LISFORM_PURE_PYTHON"] = "1"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--calls", type=int, default=200_000)
    args = ap.parse_args()

    from lisform.kernels import backends

    mods = backends()
    if "cython" not in mods:
        print("compiled backend not built; showing pure-Python numbers only")

    scalar = {name: bench_scalar(mod, args.calls) for name, mod in mods.items()}
    batch = {name: bench_batch(mod) for name, mod in mods.items()}

    print(f"\nscalar kernels ({args.calls} calls each, per-call time):")
    keys = next(iter(scalar.values())).keys()
    for k in keys:
        row = "  ".join(f"{n}: {scalar[n][k]*1e9:8.1f} ns" for n in mods)
        ratio = (
            f"  speedup x{scalar['python'][k]/scalar['cython'][k]:.1f}"
            if "cython" in mods
            else ""
        )
        print(f"  {k:12s} {row}{ratio}")

    print("\nbatch kernels:")
    for k in next(iter(batch.values())).keys():
        row = "  ".join(f"{n}: {batch[n][k]*1e3:8.2f} ms" for n in mods)
        ratio = (
            f"  speedup x{batch['python'][k]/batch['cython'][k]:.1f}"
            if "cython" in mods
            else ""
        )
        print(f"  {k:28s} {row}{ratio}")

    print("\nfull scenario (matlab_sim_1, 60 s sim at dt=0.01):")
    t_c = bench_scenario(backend_env=False)
    print(f"  selected backend: {t_c:.2f} s wall")
    t_p = bench_scenario(backend_env=True)
    print(f"  pure python:      {t_p:.2f} s wall  (x{t_p/t_c:.2f})")


if __name__ == "__main__":
    main()
