#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-Python numeric kernels.

Runs the three hot kernels (adaptive step loop, fixed-step RK4, variational
system for the monodromy matrix) through both backends on a representative
scenario and prints a small table with speedups.

Usage:
    python benchmarks/bench_backends.py [--repeat N] [--rk4-h H]
"""

import argparse
import time

import numpy as np

from ipmsim import compiled_available, default_parameters
from ipmsim import _kernels_py as py_kernels

try:
    from ipmsim import _kernels as c_kernels
except ImportError:
    c_kernels = None


def _time(func, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - start)
    return best


def _workloads(rk4_h: float):
    params = default_parameters().as_tuple()
    y0 = (0.5, 0.5, 0.2, 6.0, 0.15)
    m0 = np.eye(5).ravel()
    # periodic biopesticide level at tau1=5 (coefficient and last pulse time)
    cv = 6.0 / (1.0 - np.exp(-0.15 * 5.0))

    def adaptive(kernels):
        out = kernels.integrate_segment(
            y0, 0.0, 60.0, params, 1e-8, 1e-10, 1e-2, 1.0, 1_000_000
        )
        assert out[10] == 0

    def rk4(kernels):
        kernels.rk4_segment(y0, 0.0, 20.0, rk4_h, params)

    def variational(kernels):
        out = kernels.variational_segment(
            m0, 0.0, 5.0, params, cv, 0.0, 0.0, 0.0,
            1e-12, 1e-18, 1e-2, 1.0, 1_000_000,
        )
        assert out[5] == 0

    return [
        ("adaptive integrate [0,60]", adaptive),
        (f"fixed-step RK4 [0,20], h={rk4_h:g}", rk4),
        ("variational system [0,5]", variational),
    ]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--repeat", type=int, default=5,
        help="timing repetitions per kernel (best is reported)",
    )
    parser.add_argument(
        "--rk4-h", type=float, default=1e-4, help="fixed RK4 step size"
    )
    args = parser.parse_args()

    if c_kernels is None:
        print("compiled kernels are not available; nothing to compare")
        return 1

    assert compiled_available()
    print(f"{'kernel':34s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for label, work in _workloads(args.rk4_h):
        t_py = _time(lambda: work(py_kernels), args.repeat)
        t_c = _time(lambda: work(c_kernels), args.repeat)
        print(
            f"{label:34s} {t_py * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms "
            f"{t_py / t_c:7.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
