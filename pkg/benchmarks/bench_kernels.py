"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints the best wall time of each kernel under both backends, the speedup,
and the largest relative difference between their outputs.
"""
import argparse
import math
import sys
import timeit

import numpy as np

from gcmbounds import _core_py
from gcmbounds.bounds import BoundParams
from gcmbounds.specfun import bessel_zeros

try:
    from gcmbounds import _core
except ImportError:
    _core = None


def _cases():
    x = np.linspace(0.05, 400.0, 20000)
    p = BoundParams(2, math.pi, 1.0)
    radii = np.asarray(bessel_zeros(p.nu, 100).zeros) / (math.pi * p.r)
    nodes = np.repeat(-(radii * radii), 2)
    z = -np.linspace(0.0, 0.9 * radii[-1], 2000) ** 2
    hi, lo = _core_py.hermite_coeffs(nodes, p.alpha, True)
    return [
        ("bessel_pair nu=1, 20k points", "bessel_pair", (1.0, x)),
        ("bessel_pair nu=50, 20k points", "bessel_pair", (50.0, x)),
        ("hermite_coeffs M=200 extended", "hermite_coeffs", (nodes, p.alpha, True)),
        ("hermite_coeffs M=60 standard", "hermite_coeffs", (nodes[:60], p.alpha, False)),
        ("horner_eval M=200, 2k points", "horner_eval", (hi, lo, nodes, z)),
    ]


def _rel_diff(a, b):
    a = np.concatenate([np.ravel(v) for v in a])
    b = np.concatenate([np.ravel(v) for v in b])
    scale = np.maximum(np.abs(a), np.abs(b))
    ok = scale > 0
    return float(np.max(np.abs(a - b)[ok] / scale[ok])) if ok.any() else 0.0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled extension not built; only the fallback is available", file=sys.stderr)
    print(f"{'kernel':<34}{'python':>11}{'cython':>11}{'speedup':>9}{'max rel diff':>14}")
    for label, name, call in _cases():
        py_fun = getattr(_core_py, name)
        t_py = min(timeit.repeat(lambda: py_fun(*call), number=1, repeat=args.repeat))
        if _core is None:
            print(f"{label:<34}{t_py:>10.4f}s{'-':>11}{'-':>9}{'-':>14}")
            continue
        cy_fun = getattr(_core, name)
        t_cy = min(timeit.repeat(lambda: cy_fun(*call), number=1, repeat=args.repeat))
        diff = _rel_diff(py_fun(*call), cy_fun(*call))
        print(f"{label:<34}{t_py:>10.4f}s{t_cy:>10.4f}s{t_py / t_cy:>8.1f}x{diff:>14.2e}")


if __name__ == "__main__":
    main()
