"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Sizes follow the library defaults at h = 1/200 (scale 1).
"""

import argparse
import timeit

import numpy as np

from bcinverse import _kernels_py as python_kernels
from bcinverse import kernels


def cases(scale):
    rng = np.random.default_rng(0)
    n = int(400 * scale)
    h = 1 / 200
    march = (rng.normal(size=n + 2), rng.normal(size=n + 2), np.r_[0.0, rng.normal(size=n + 1)],
             rng.normal(size=n + 2), h, n)
    M = int(400 * scale)
    rect = (rng.normal(size=2 * M + 2), rng.normal(size=M + 1), h, M, M)
    cells = rng.normal(size=int(2000 * scale))
    lam = np.linspace(-5.0, 4e4, int(200 * scale))
    z = np.linspace(0.1, 100.0, int(2000 * scale)) ** 2
    nx, nt = int(800 * scale), int(1600 * scale)
    leap = (rng.normal(size=nx), h, rng.normal(size=nt), rng.normal(size=nx),
            rng.normal(size=nx))
    return {
        "goursat_march": lambda k: k.goursat_march(*march),
        "goursat_rows": lambda k: k.goursat_rows(*march),
        "char_rect_march": lambda k: k.char_rect_march(*rect),
        "prufer_sweep": lambda k: k.prufer_sweep(cells, 1e-3, lam),
        "cp_propagate": lambda k: k.cp_propagate(cells[:1000], 1e-3, z, 0.0, 1.0),
        "wave_leapfrog": lambda k: k.wave_leapfrog(*leap),
    }


def best_of(fn, impl, repeat):
    return min(timeit.repeat(lambda: fn(impl), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args(argv)
    compiled = kernels.compiled_kernels
    print(f"{'kernel':<16} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for name, fn in cases(args.scale).items():
        tp = best_of(fn, python_kernels, args.repeat)
        if compiled is None:
            print(f"{name:<16} {tp:>11.4f} {'n/a':>11} {'n/a':>8}")
            continue
        tc = best_of(fn, compiled, args.repeat)
        print(f"{name:<16} {tp:>11.4f} {tc:>11.4f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
