#!/usr/bin/env python3
"""Benchmark the compiled long-run kernels against the pure-Python fallback.

Runs each kernel scheme on each registry potential for a fixed number of
steps and reports wall-clock times and speedups. The two implementations
execute the same operation sequence, so their outputs agree bitwise; this
script checks that too.

Usage: python3 benchmarks/bench_backends.py [--steps N] [--repeat R]
"""

import argparse
import time

import numpy as np

import sympint
from sympint import _loops_py
from sympint.systems import get_system

SCHEMES = {"leapfrog": 0, "euler": 1, "rk4": 2}
SYSTEMS = ["oscillator", "pendulum", "quartic", "driven-oscillator"]


def time_fn(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if sympint.COMPILED:
        from sympint import _fastloops
        impls = [("python", _loops_py.run_1d),
                 ("compiled", _fastloops.run_1d)]
    else:
        print("compiled backend not available; timing the fallback only "
              "(set up Cython and reinstall to compare)")
        impls = [("python", _loops_py.run_1d)]

    print(f"{args.steps} steps per run, best of {args.repeat}\n")
    header = f"{'system':18s} {'scheme':9s}" + "".join(
        f" {name:>10s}" for name, _ in impls)
    if len(impls) == 2:
        header += f" {'speedup':>9s}"
    print(header)
    print("-" * len(header))

    for sysname in SYSTEMS:
        sysd = get_system(sysname)
        params = np.asarray(sysd.params, dtype=float)
        for scheme, sid in SCHEMES.items():
            times = []
            outs = []
            for _, run in impls:
                dt, out = time_fn(
                    lambda run=run: run(sid, sysd.pot_id, params, 1.0, 0.0,
                                        0.0, 0.01, args.steps, args.steps),
                    args.repeat)
                times.append(dt)
                outs.append(out)
            if len(outs) == 2:
                for a, b in zip(outs[0], outs[1]):
                    np.testing.assert_array_equal(a, b)
            row = f"{sysname:18s} {scheme:9s}" + "".join(
                f" {t * 1e3:9.2f}ms" for t in times)
            if len(times) == 2:
                row += f" {times[0] / times[1]:8.1f}x"
            print(row)

    if sympint.COMPILED:
        print("\noutputs agree bitwise between backends")


if __name__ == "__main__":
    main()
