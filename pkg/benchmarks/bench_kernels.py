"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-``repeat`` wall time for each
backend and the speed-up.  Exits with status 1 if the extension is missing.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from gdpmech import _kernels_py as pure

try:
    from gdpmech import _kernels as compiled
except ImportError:
    compiled = None


def cases():
    rng = np.random.default_rng(0)
    alpha = np.linspace(0.0, 1.0, 200_001)
    w_in = np.logspace(-10, 10, 200_000)
    tables = rng.normal(200.0, 40.0, size=(20_000, 9))
    pi0 = np.full(9, 1 / 9)
    rows = rng.normal(200.0, 40.0, size=(10_000, 3, 9))
    return {
        "freq_curve (2e5 pts)": lambda k: k.freq_curve(alpha, 0.8),
        "bilap_curve (2e5 pts)": lambda k: k.bilap_curve(alpha, 1.5, 0.7),
        "lambert_w0_array (2e5)": lambda k: k.lambert_w0_array(w_in),
        "ncx2_inv_moment x200": lambda k: [k.ncx2_inv_moment(9.0, t, 1e-13, 100_000)
                                           for t in np.linspace(0, 5000, 200)],
        "gof_stat_batch (2e4x9)": lambda k: k.gof_stat_batch(tables, pi0),
        "hom_stat_batch (1e4x3x9)": lambda k: k.hom_stat_batch(rows),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled extension not available; build with `pip install -e .`", file=sys.stderr)
        return 1
    print(f"{'kernel':28s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speed-up':>9s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(pure), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat))
        print(f"{name:28s} {1e3 * t_py:11.2f} {1e3 * t_cy:12.2f} {t_py / t_cy:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
