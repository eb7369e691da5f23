"""Compiled vs pure-Python kernels, one row per hot loop.

    python benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

``--end-to-end`` also times the golden-mean verification scenario under each
backend (separate processes, backend forced through SENSTROPY_PURE_PYTHON).
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from senstropy import _pykernels
from senstropy.measures import bernoulli, orbit_measure
from senstropy.symbolic import full_shift

try:
    from senstropy import _ckernels
except ImportError:
    _ckernels = None


def cases():
    sft = full_shift(2)
    mu = bernoulli(["0.7", "0.3"], sft, mode="float")
    x = mu.sample_point(200_000, seed=0)
    word = np.asarray(x.prefix(200_000), dtype=np.int64)
    logP = np.log(mu.P_float)
    logpi = np.log(mu.pi_float)
    yield "cumulative_log_markov (n=200k)", lambda k: k.cumulative_log_markov(word, logpi, logP)

    # a period-60 orbit: 60 presentation states, and x follows it without branching
    period = [int(b) for b in np.random.default_rng(2).integers(0, 2, 60)]
    orb = orbit_measure(period, sft)
    succ, labels = orb.presentation.kernel_tables
    coords = np.tile(np.roll(np.asarray(period, dtype=np.int64), -1), 2_000)
    yield "scan_branch (60 states, 120k steps)", lambda kk: kk.scan_branch(succ, labels, 1, coords)

    rng = np.random.default_rng(1)
    T0 = rng.normal(size=(200, 600))
    basis = np.arange(200, dtype=np.int64)

    def lp(kk):
        T = T0.copy()
        for j in range(50):
            r = kk.ratio_test(T[:199], j, 599, 1e-9, basis)
            if r >= 0:
                kk.pivot(T, r, j)

    yield "ratio_test + pivot (200x600, 50 pivots)", lp


def bench(repeat: int) -> None:
    print(f"{'kernel':42} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, fn in cases():
        tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=repeat))
        if _ckernels is None:
            print(f"{name:42} {tp:>9.4f}s {'n/a':>10}")
            continue
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=repeat))
        print(f"{name:42} {tp:>9.4f}s {tc:>9.4f}s {tp / tc:>7.1f}x")


def end_to_end() -> None:
    from senstropy.harness import default_scenario_paths

    path = next(p for p in default_scenario_paths() if p.name == "golden_mean.yaml")
    for label, flag in (("cython", "0"), ("python", "1")):
        env = dict(os.environ, SENSTROPY_PURE_PYTHON=flag)
        t0 = time.perf_counter()
        subprocess.run([sys.executable, "-m", "senstropy", "verify", str(path)], env=env,
                       check=False, capture_output=True)
        print(f"golden-mean scenario, {label:6} backend: {time.perf_counter() - t0:.2f}s")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    bench(args.repeat)
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
