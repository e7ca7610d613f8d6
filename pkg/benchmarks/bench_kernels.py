"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the switch is read at
import time. Usage::

    python benchmarks/bench_kernels.py [--particles 200000] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
from ballistic import _jit
from ballistic.dynamics import resolve
from ballistic.estimators import WindowPolicy, estimate_q
from ballistic.kernels import STOP_NONE, scan_halfline
from ballistic.model import ModelParams, RngStream, sample

n, repeat = int(sys.argv[1]), int(sys.argv[2])
params = ModelParams(0.3)
cfg = sample(params, float(n), RngStream(0))
small = sample(params, 100.0, RngStream(1))
resolve(small)  # warm-up (JIT compile or cache load)
scan_halfline(small.positions, small.velocities, 0, len(small), small.window_length, STOP_NONE, True)


def best(fn):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


out = {
    "numba": _jit.NUMBA_ENABLED,
    "particles": len(cfg),
    "heap_s": best(lambda: resolve(cfg)),
    "scan_s": best(lambda: scan_halfline(cfg.positions, cfg.velocities, 0, len(cfg), cfg.window_length,
                                         STOP_NONE, True)),
    "estimate_q_s": best(lambda: estimate_q(params, WindowPolicy(64, 4096), 500, 1)),
}
print(json.dumps(out))
"""


def run(flag: str, n: int, repeat: int) -> dict:
    env = {**os.environ, "BALLISTIC_NO_NUMBA": flag}
    res = subprocess.run([sys.executable, "-c", CHILD, str(n), str(repeat)], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(res.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--particles", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast = run("0", args.particles, args.repeat)
    slow = run("1", args.particles, args.repeat)
    print(f"{'kernel':<14}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key in ("heap_s", "scan_s", "estimate_q_s"):
        print(f"{key[:-2]:<14}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>10.1f}x")
    print(f"particles: {fast['particles']}")


if __name__ == "__main__":
    main()
