"""Timing comparison of the compiled and pure-python backends.

Runs the same workloads through both implementations and reports the
wall-clock ratio plus the largest disagreement in the computed
exponents.  Usage:

    python3 benchmarks/bench_backends.py [--t-end T] [--mx M]
"""

import argparse
import time

import numpy as np

from delyap import backend
from delyap.cli import RunConfig, run_les
from delyap.discretize import build_re_system, equilibrium_state
from delyap.models import quad_re


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_integrate(name, system, state, span=50.0):
    impl = backend.get(name)
    t, _ = _time(lambda: impl.integrate_desc(system.kernel, state, 0.0, span,
                                             1e-6, 1e-7))
    return t


def bench_pipeline(name, cfg):
    backend.set_default(name)
    try:
        return _time(lambda: run_les(cfg), repeats=1)
    finally:
        backend.set_default("auto")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-end", type=float, default=200.0)
    ap.add_argument("--mx", type=int, default=15)
    args = ap.parse_args()

    names = backend.available()
    if "compiled" not in names:
        print("compiled backend unavailable; nothing to compare")
        return

    system = build_re_system(quad_re(4.0), args.mx)
    state = equilibrium_state(system, quad_re(4.0).equilibria[1]) + 0.1

    print(f"reference integration over [0, 50] (M={args.mx}):")
    per = {}
    for name in ("pure", "compiled"):
        per[name] = bench_integrate(name, system, state)
        print(f"  {name:9s} {per[name] * 1e3:8.1f} ms")
    print(f"  speedup   {per['pure'] / per['compiled']:8.1f}x")

    cfg = RunConfig(model="quad_re", gamma=4.0, mx=args.mx,
                    t_end=args.t_end)
    print(f"\nfull exponent run (M={args.mx}, T={args.t_end:g}):")
    runs, times = {}, {}
    for name in ("pure", "compiled"):
        times[name], runs[name] = bench_pipeline(name, cfg)
        print(f"  {name:9s} {times[name]:8.2f} s")
    print(f"  speedup   {times['pure'] / times['compiled']:8.1f}x")
    diff = float(np.max(np.abs(runs["pure"].exponents
                               - runs["compiled"].exponents)))
    print(f"  max exponent difference: {diff:.2e}")


if __name__ == "__main__":
    main()
