"""Time the numba and numpy kernel backends on representative inputs.

    python3 benchmarks/bench_kernels.py --repeat 5
"""

import argparse
import json
import time

import numpy as np

from zeroflip import kernels
from zeroflip.harness import preset


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n):
    rng = np.random.default_rng(0)
    z = rng.normal(size=n) * 30 + 1j * rng.normal(size=n) * 30
    F = preset("zero3").spectrum
    breaks, coef = F.breaks, np.asarray(F.coef)
    x = np.linspace(-20, 20, n)
    etas = np.linspace(0, 2, max(n // 20, 2))
    return {
        "chi_moments": lambda: kernels.chi_moments(z, 0, 6),
        "invert_piecewise_poly": lambda: kernels.invert_piecewise_poly(breaks, coef, x),
        "shift_diff_sqnorms": lambda: kernels.shift_diff_sqnorms(breaks, coef, etas),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=20000, help="points per call")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    args = p.parse_args(argv)

    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    results = {}
    for name, fn in cases(args.n).items():
        row = {}
        for b in backends:
            with kernels.use_backend(b):
                fn()  # compile / warm caches
                row[b] = best_of(fn, args.repeat)
        results[name] = row

    if args.json:
        print(json.dumps(results, indent=2))
        return
    print(f"{'kernel':<24}" + "".join(f"{b:>12}" for b in backends) + "     speedup")
    for name, row in results.items():
        cells = "".join(f"{row[b] * 1e3:>10.2f}ms" for b in backends)
        speed = f"{row['numpy'] / row['numba']:>10.1f}x" if "numba" in row else ""
        print(f"{name:<24}{cells}  {speed}")


if __name__ == "__main__":
    main()
