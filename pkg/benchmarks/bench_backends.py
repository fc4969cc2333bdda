#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage:  python benchmarks/bench_backends.py [--flights N] [--events N]

Times the three kernel entry points on both backends (when the compiled
extension is available) and prints throughput plus speedup.
"""

import argparse
import math
import time

import numpy as np

from rotodrum.kernels import MODE_OPEN, MODE_TORUS, get_backend


def time_call(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def bench_backend(mod, n_flights, n_events, n_states):
    rows = {}
    t, _ = time_call(
        mod.knudsen_run, 3, 1.0, 1.0, 1.0, MODE_TORUS, 1.0, 0,
        n_flights, math.inf, 0.0, 0, 42, None,
    )
    rows["knudsen_run (3d torus)"] = (n_flights / t, "flights/s")
    t, _ = time_call(
        mod.knudsen_run, 2, 1.0, 1.0, 1.0, MODE_OPEN, 0.0, 0,
        n_flights, math.inf, 0.0, 0, 42, None,
    )
    rows["knudsen_run (2d disc)"] = (n_flights / t, "flights/s")

    rng = np.random.default_rng(7)
    ang = rng.uniform(0, 2 * math.pi, n_states)
    rad = 0.9 * np.sqrt(rng.random(n_states))
    X = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    V = rng.normal(size=(n_states, 2))
    t, _ = time_call(mod.evolve_pointlike, 2, 1.0, 1.0, MODE_OPEN, 0.0, 0, X, V, 20.0, 9)
    rows["evolve_pointlike (T=20)"] = (n_states / t, "states/s")

    t, out = time_call(mod.gravity_run, 1.0, 1.0, 1.0, 3.0, n_events, 11)
    rows["gravity_run"] = (out[4] / t, "events/s")
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--flights", type=int, default=200_000)
    parser.add_argument("--events", type=int, default=100_000)
    parser.add_argument("--states", type=int, default=5_000)
    args = parser.parse_args()

    results = {}
    for name in ("python", "compiled"):
        try:
            mod = get_backend(name)
        except ImportError:
            print(f"[{name}] backend unavailable, skipping")
            continue
        print(f"[{name}] running ...")
        results[name] = bench_backend(mod, args.flights, args.events, args.states)

    print()
    print(f"{'kernel':30s} {'python':>14s} {'compiled':>14s} {'speedup':>9s}")
    keys = next(iter(results.values())).keys()
    for key in keys:
        py = results.get("python", {}).get(key)
        cy = results.get("compiled", {}).get(key)
        py_s = f"{py[0]:,.0f}" if py else "-"
        cy_s = f"{cy[0]:,.0f}" if cy else "-"
        speed = f"{cy[0] / py[0]:.0f}x" if py and cy else "-"
        unit = (py or cy)[1]
        print(f"{key:30s} {py_s:>14s} {cy_s:>14s} {speed:>9s}  {unit}")


if __name__ == "__main__":
    main()
