"""Compare the compiled and numpy phase-estimation kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best wall time of each backend and the
speed-up. Also times a full Phase Checking plan, where dense linear algebra
dominates, to show how much of the end-to-end cost the kernels account for.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from spanq import _fejer_py

try:
    from spanq import _fejer
except ImportError:  # extension not built
    _fejer = None


def cases(rng):
    phases = rng.uniform(-np.pi, np.pi, 200_000)
    return {
        "fejer (200k phases, T=4096)": lambda m: m.fejer(phases, 4096),
        "fejer_power (200k phases, T=4096, c=12)": lambda m: m.fejer_power(phases, 4096, 12),
        "leak_bound (T=4096, 40961 grid points)": lambda m: m.leak_bound(4096, 7e-4, 40961),
        "one_copy_amplitudes (T=8192)": lambda m: m.one_copy_amplitudes(0.3, 8192),
    }


def best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':45s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speed-up':>9s}")
    for name, run in cases(rng).items():
        t_py = best(lambda: run(_fejer_py), args.repeat)
        if _fejer is None:
            print(f"{name:45s} {t_py * 1e3:11.3f} {'n/a':>12s} {'n/a':>9s}")
            continue
        t_cy = best(lambda: run(_fejer), args.repeat)
        print(f"{name:45s} {t_py * 1e3:11.3f} {t_cy * 1e3:12.3f} {t_py / t_cy:9.2f}")

    from spanq.catalog import build_or
    from spanq.qpe import plan_qpe
    from spanq.span_program import algorithm_unitary

    P = build_or(8)
    t_unitary = best(lambda: algorithm_unitary(P, (1,) + (0,) * 7, 4.0), args.repeat)
    plan_qpe.cache_clear()
    t_plan = best(lambda: (plan_qpe.cache_clear(), plan_qpe(1e-3, 1e-4)), args.repeat)
    print(f"\nbuild + eigendecompose U(OR_8, x, 4): {t_unitary * 1e3:.3f} ms")
    print(f"plan_qpe(theta=1e-3, eps=1e-4), active backend: {t_plan * 1e3:.3f} ms")


if __name__ == "__main__":
    main()
