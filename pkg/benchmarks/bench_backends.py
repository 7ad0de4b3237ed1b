"""Timing comparison of the numba and numpy evaluation backends.

Integrates the quartic-potential system from problems/example2.json with
fixed-step RK4 and evaluates the Hamiltonian along the trajectory, once per
backend.  The first numba call includes JIT compilation, so it is timed
separately from the warm runs.

Run from the repository root:

    python3 benchmarks/bench_backends.py [--steps 100000] [--repeat 3]
"""

import argparse
import pathlib
import statistics
import sys
import time

from poissondarboux._kernels import available_backends
from poissondarboux.exprparse import load_problem
from poissondarboux.integrals import system_from_problem
from poissondarboux.numlab import drift_report, integrate

ROOT = pathlib.Path(__file__).resolve().parent.parent


def run(system, x0, t_end, dt, backend):
    start = time.perf_counter()
    traj = integrate(system, x0, t_end=t_end, dt=dt, backend=backend)
    drift = drift_report(traj, {"H": system.H}, backend=backend)
    return time.perf_counter() - start, drift["H"], traj


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    pd = load_problem(str(ROOT / "problems" / "example2.json"))
    system = system_from_problem(pd)
    x0 = [0.3, 0.4, 0.1, 0.2]
    dt = 1e-3
    t_end = args.steps * dt

    print(f"system: n = 4, {len(system.H)} Hamiltonian terms; "
          f"rk4 with {args.steps} steps of dt = {dt}")
    results = {}
    for backend in available_backends():
        if backend == "numba":
            warm_time, _, _ = run(system, x0, t_end, dt, backend)
            print(f"numba first call (includes JIT): {warm_time:8.3f} s")
        times = []
        drift = None
        for _ in range(args.repeat):
            elapsed, drift, _ = run(system, x0, t_end, dt, backend)
            times.append(elapsed)
        best = min(times)
        results[backend] = best
        print(
            f"{backend:>6}: best {best:8.3f} s  median {statistics.median(times):8.3f} s"
            f"  drift(H) = {drift:.3e}"
        )
    if len(results) == 2:
        print(f"speedup (numpy/numba): {results['numpy'] / results['numba']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
