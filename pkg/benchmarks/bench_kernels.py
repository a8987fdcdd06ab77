"""Benchmark the compiled ball-integrator kernels against the pure-Python
fallback and verify they agree bit-for-bit.

Run after installing the package::

    python3 benchmarks/bench_kernels.py [--frames 400] [--substeps 4] [--reps 50]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from restune import kernels


def _time(fn, reps: int) -> float:
    fn()  # warm-up
    start = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - start) / reps


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--frames", type=int, default=400)
    parser.add_argument("--substeps", type=int, default=4)
    parser.add_argument("--reps", type=int, default=50)
    args = parser.parse_args()

    if kernels.BACKEND != "compiled":
        print(
            "compiled backend unavailable (or RESTUNE_PURE_PY set); "
            "nothing to compare"
        )
        return 1

    cases = {
        "drop": (
            lambda: kernels.drop_positions(
                0.73, 4.5, 0.5, 9.81, 1.0 / 60.0, args.frames, args.substeps
            ),
            lambda: kernels.drop_positions_py(
                0.73, 4.5, 0.5, 9.81, 1.0 / 60.0, args.frames, args.substeps
            ),
        ),
        "plane2d": (
            lambda: kernels.plane2d_positions(
                0.61,
                -1.0,
                3.0,
                0.0,
                0.0,
                np.sin(np.pi / 4),
                np.cos(np.pi / 4),
                0.05,
                9.81,
                1.0 / 60.0,
                args.frames,
                args.substeps,
            ),
            lambda: kernels.plane2d_positions_py(
                0.61,
                -1.0,
                3.0,
                0.0,
                0.0,
                np.sin(np.pi / 4),
                np.cos(np.pi / 4),
                0.05,
                9.81,
                1.0 / 60.0,
                args.frames,
                args.substeps,
            ),
        ),
    }

    print(
        f"{args.frames} frames x {args.substeps} substeps, "
        f"mean of {args.reps} repetitions"
    )
    print(f"{'kernel':<10}{'compiled':>12}{'python':>12}{'speedup':>10}{'parity':>8}")
    for name, (compiled, python) in cases.items():
        out_c = np.asarray(compiled())
        out_p = np.asarray(python())
        parity = "exact" if np.array_equal(out_c, out_p) else "DIFFER"
        t_c = _time(compiled, args.reps)
        t_p = _time(python, args.reps)
        print(
            f"{name:<10}{t_c * 1e3:>10.3f}ms{t_p * 1e3:>10.3f}ms"
            f"{t_p / t_c:>9.1f}x{parity:>8}"
        )
        if parity != "exact":
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
