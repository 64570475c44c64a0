#!/usr/bin/env python3
"""Benchmark the jitted kernels against the interpreted/numpy fallback.

Runs two representative workloads under each backend in a fresh
subprocess (the backend is fixed at import time via LCC_BACKEND):

  sim    brake scenario, 11-vehicle chain, 40 s at 10 ms steps
  scan   21x21 gain-region scan of the 2+1+2 chain, 1000-point grid

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOAD = r"""
import json, time
import lcc
from lcc import kernels
from lcc.presets import FD_CONTROLLER, GAIN_CASES, _brake_scenario, _case_spec
from lcc.sim import simulate
from lcc.stability import GainAxis, scan_region

repeat = {repeat}

# warm-up triggers jit compilation so steady-state cost is measured
simulate(_brake_scenario(FD_CONTROLLER, 0.01, heterogeneous=False))
times = []
for _ in range(repeat):
    t0 = time.perf_counter()
    simulate(_brake_scenario(FD_CONTROLLER, 0.01, heterogeneous=False))
    times.append(time.perf_counter() - t0)
sim_t = min(times)

spec = _case_spec("hdv")
ax1 = GainAxis(vehicle=1, component="mu", lo=-10, hi=10, points=21)
ax2 = GainAxis(vehicle=1, component="k", lo=-10, hi=10, points=21)
scan_region(spec, ax1, ax2)
times = []
for _ in range(repeat):
    t0 = time.perf_counter()
    scan_region(spec, ax1, ax2)
    times.append(time.perf_counter() - t0)
scan_t = min(times)

print(json.dumps({{"backend": kernels.backend_name(), "sim": sim_t, "scan": scan_t}}))
"""


def run_backend(backend: str, repeat: int) -> dict:
    env = dict(os.environ, LCC_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", WORKLOAD.format(repeat=repeat)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5, help="timed repetitions")
    args = parser.parse_args()

    results = {}
    for backend in ("numpy", "numba"):
        t0 = time.perf_counter()
        results[backend] = run_backend(backend, args.repeat)
        results[backend]["wall"] = time.perf_counter() - t0

    print(f"{'workload':<8} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for key in ("sim", "scan"):
        tn, tj = results["numpy"][key], results["numba"][key]
        print(f"{key:<8} {tn * 1e3:>10.2f}ms {tj * 1e3:>10.2f}ms {tn / tj:>8.1f}x")
    print(
        f"(subprocess wall incl. import/jit: numpy {results['numpy']['wall']:.1f}s, "
        f"numba {results['numba']['wall']:.1f}s)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
