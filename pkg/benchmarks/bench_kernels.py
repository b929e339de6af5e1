"""Benchmark the compiled kernels against the pure-Python fallback.

Run:  python benchmarks/bench_kernels.py [--substeps N]
Also asserts that both backends produce bit-identical output.
"""

import argparse
import time

import numpy as np

from regenboot.kernels import _pykernels

try:
    from regenboot.kernels import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_reflected_em(impl, substeps):
    rng = np.random.default_rng(7)
    z = rng.standard_normal(substeps)
    grid = np.linspace(0.0, 1.0, 4097)
    b_vals = np.zeros_like(grid)
    r_vals = 1.0 + grid**2 * (1 - grid) ** 2
    m = 100
    out = np.empty(substeps // m, dtype=np.float64)
    dt = 0.5 / m
    t, _ = _time(
        impl.reflected_em_chunk,
        0.5, z, dt, np.sqrt(dt), b_vals, r_vals, float(grid.shape[0] - 1), m, out, 0,
    )
    return t, out.copy()


def bench_finite_chain(impl, steps):
    rng = np.random.default_rng(8)
    u = rng.random(steps)
    cum = np.cumsum(np.array([[0.7, 0.3], [0.1, 0.9]]), axis=1)
    cum[:, -1] = 1.0
    out = np.empty(steps, dtype=np.int64)
    t, _ = _time(impl.finite_chain_chunk, np.ascontiguousarray(cum), 0, u, out)
    return t, out.copy()


def bench_grid_chain(impl, steps):
    rng = np.random.default_rng(9)
    u = rng.random(steps)
    g = 129
    grid = np.linspace(0.0, 1.0, g)
    rows = np.tile(1.0 + 0.5 * np.cos(np.pi * grid), (g, 1))
    rows /= np.trapezoid(rows, grid, axis=1)[:, None]
    out = np.empty(steps, dtype=np.float64)
    t, _ = _time(
        impl.grid_chain_chunk,
        np.ascontiguousarray(rows), float(grid[1] - grid[0]), float(g - 1),
        0.5, u, out,
    )
    return t, out.copy()


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--substeps", type=int, default=1_000_000)
    parser.add_argument("--finite-steps", type=int, default=1_000_000)
    parser.add_argument("--grid-steps", type=int, default=20_000)
    args = parser.parse_args()

    cases = [
        ("reflected Euler-Maruyama", bench_reflected_em, args.substeps),
        ("finite-chain inverse CDF", bench_finite_chain, args.finite_steps),
        ("grid-chain inverse CDF", bench_grid_chain, args.grid_steps),
    ]
    print(f"{'kernel':<28}{'size':>10}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, fn, size in cases:
        t_py, out_py = fn(_pykernels, size)
        if _ckernels is None:
            print(f"{name:<28}{size:>10}{t_py:>11.4f}s{'n/a':>12}{'n/a':>10}")
            continue
        t_c, out_c = fn(_ckernels, size)
        identical = np.array_equal(out_py, out_c)
        print(
            f"{name:<28}{size:>10}{t_py:>11.4f}s{t_c:>11.4f}s{t_py / t_c:>9.1f}x"
            + ("" if identical else "  [OUTPUT MISMATCH]")
        )
        if not identical:
            raise SystemExit("backends disagree; bit parity is required")


if __name__ == "__main__":
    main()
