"""Benchmark the grid membership kernel: compiled extension vs pure numpy.

Runs pseudospec_mask (the hot loop of every gamma algorithm: one Cholesky
positive-definiteness test per grid point) on random Hermitian matrices and
reports wall-clock times for both backends plus their agreement.

Usage: python benchmarks/bench_kernels.py [--dims 32,64,128] [--points 2000]
       [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from specgrid.kernels import pure

try:
    from specgrid.kernels import _core as compiled
except ImportError:
    compiled = None


def _random_hermitian(rng: np.random.Generator, k: int) -> np.ndarray:
    a = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    return np.ascontiguousarray((a + a.conj().T) / 2)


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", default="32,64,128")
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    dims = [int(d) for d in args.dims.split(",")]
    rng = np.random.default_rng(20240601)

    if compiled is None:
        print("compiled extension not available; timing pure backend only")
    header = f"{'k':>5} {'points':>7} {'pure [s]':>10}"
    if compiled is not None:
        header += f" {'compiled [s]':>13} {'speedup':>8} {'agree':>6}"
    print(header)
    for k in dims:
        t = _random_hermitian(rng, k)
        lams = (
            rng.uniform(-2.5, 2.5, args.points)
            + 1j * rng.uniform(-2.5, 2.5, args.points)
        ).astype(np.complex128)
        q = 0.5
        t_pure = _time(lambda: pure.pseudospec_mask(t, lams, q), args.repeats)
        row = f"{k:>5} {args.points:>7} {t_pure:>10.4f}"
        if compiled is not None:
            t_comp = _time(lambda: compiled.pseudospec_mask(t, lams, q), args.repeats)
            same = bool(
                np.array_equal(
                    pure.pseudospec_mask(t, lams, q),
                    compiled.pseudospec_mask(t, lams, q),
                )
            )
            row += f" {t_comp:>13.4f} {t_pure / t_comp:>7.1f}x {'yes' if same else 'NO':>6}"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
