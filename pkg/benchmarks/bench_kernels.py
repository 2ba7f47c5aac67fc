"""Benchmark the compiled kernels against the pure-numpy fallback.

Run from the repository root after building the extension:

    python3 setup.py build_ext --inplace   # or pip install -e .
    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from fluxdiode._kernels import load_backend


def time_call(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(backend):
    mod = load_backend(backend)
    rng = np.random.default_rng(7)

    # scalar series, mixed complex arguments
    args = [(complex(a), complex(b), complex(z))
            for a, b, z in zip(rng.uniform(0.5, 4, 2000) + 1j * rng.uniform(-1, 1, 2000),
                               rng.uniform(0.5, 4, 2000) - 1j * rng.uniform(-1, 1, 2000),
                               rng.uniform(0, 5, 2000))]

    def scalar_series():
        for a, b, z in args:
            mod.hyp0f2(a, b, z)

    # a representative transmission map row set: 200 powers x 400 freqs
    deltas = np.linspace(-20e6, 20e6, 400)
    zetas = np.linspace(1e-4, 0.25, 200)

    def map_rows():
        for zeta in zetas:
            mod.duffing_magsq(deltas, 1.1e6, 160e3, 430e3, -11.5e6, zeta)

    return {
        "hyp0f2 x2000": time_call(scalar_series),
        "map 200x400": time_call(map_rows),
    }


def main():
    results = {}
    for backend in ("python", "cython"):
        try:
            results[backend] = bench(backend)
        except ImportError:
            print(f"{backend}: not available (extension not built)")
    names = sorted({k for r in results.values() for k in r})
    print(f"{'case':<16}" + "".join(f"{b:>12}" for b in results) + f"{'speedup':>10}")
    for name in names:
        row = f"{name:<16}"
        for backend in results:
            row += f"{results[backend][name]*1e3:>10.1f}ms"
        if len(results) == 2:
            row += f"{results['python'][name] / results['cython'][name]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
