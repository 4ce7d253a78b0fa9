"""Time the compiled kernels against their pure-numpy implementations.

Runs the two hot paths on realistic workloads: a 200x400 two-mode
transmission map and a 257-cell midplane field map.  Results from the
two implementations are compared before timing, so a speedup never
hides a disagreement.  Without numba installed the script still runs
and reports numpy-only timings.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from magcav import _kernels


def _timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_response_map(repeat):
    B_axis = np.linspace(0.60, 0.89, 200)
    f_axis = np.linspace(18.9e9, 22.9e9, 400)
    freqs = np.stack([np.array([20.9e9, 28.129e9 * b]) for b in B_axis])
    half_widths = 0.5 * np.array([27e6, 1.1e6])
    half_couplings = 0.5 * np.array([[0.0, 2.05e9], [2.05e9, 0.0]])
    args = (freqs, half_widths, half_couplings, 0, f_axis, 0.02)

    out_np = _kernels.response_map_numpy(*args)
    t_np = _timeit(lambda: _kernels.response_map_numpy(*args), repeat)
    row = f"response_map  200x400   numpy {1e3 * t_np:8.2f} ms"
    if _kernels.HAVE_NUMBA:
        out_nb = _kernels.response_map_numba(*args)  # includes JIT warmup
        np.testing.assert_allclose(out_nb, out_np, rtol=1e-10)
        t_nb = _timeit(lambda: _kernels.response_map_numba(*args), repeat)
        row += f"   numba {1e3 * t_nb:8.2f} ms   speedup {t_np / t_nb:5.1f}x   agree"
    else:
        row += "   (numba not installed)"
    print(row)


def bench_field_cells(repeat):
    r_cav, r_post, a = 5e-3, 0.4e-3, 1.15e-3
    resolution = 257
    dx = 2.0 * r_cav / resolution
    centers = -r_cav + (np.arange(resolution) + 0.5) * dx
    args = (centers, centers, np.array([[-a, 0.0], [a, 0.0]]),
            np.array([1.0, -1.0]), 1.0, r_post, r_cav)

    out_np = _kernels.field_cells_numpy(*args)
    t_np = _timeit(lambda: _kernels.field_cells_numpy(*args), repeat)
    row = f"field_cells   257x257   numpy {1e3 * t_np:8.2f} ms"
    if _kernels.HAVE_NUMBA:
        out_nb = _kernels.field_cells_numba(*args)
        for got, want in zip(out_nb[:2], out_np[:2]):
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-9 * np.abs(want).max())
        np.testing.assert_allclose(out_nb[2], out_np[2], rtol=1e-11,
                                   atol=1e-12 * out_np[2].max())
        np.testing.assert_array_equal(out_nb[3], out_np[3])
        t_nb = _timeit(lambda: _kernels.field_cells_numba(*args), repeat)
        row += f"   numba {1e3 * t_nb:8.2f} ms   speedup {t_np / t_nb:5.1f}x   agree"
    else:
        row += "   (numba not installed)"
    print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions (best-of)")
    args = parser.parse_args()
    print(f"numba available: {_kernels.HAVE_NUMBA}, selected: {_kernels.USE_NUMBA}")
    bench_response_map(args.repeat)
    bench_field_cells(args.repeat)


if __name__ == "__main__":
    main()
