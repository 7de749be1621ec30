"""Compiled kernels against the numpy fallback, plus the exact LP for scale.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time
from fractions import Fraction

import numpy as np

from readlab import _kernels_py
from readlab.core import FiniteVector, random_integer_vector
from readlab.dualgeom import read_dual_norm
from readlab.renorm import build_read_spec

try:
    from readlab import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases = {
        "read_norm_batch 20000x32, M=256": (
            "read_norm_batch",
            (np.ascontiguousarray(rng.standard_normal((20000, 32))),
             np.ascontiguousarray(rng.standard_normal((256, 32))), rng.random(256))),
        "covering_radius mesh 4096x16, 256 dirs": (
            "covering_radius",
            (np.ascontiguousarray(rng.standard_normal((4096, 16))),
             np.ascontiguousarray(rng.standard_normal((256, 16))))),
        "l1_distances 4096x16": (
            "l1_distances",
            (np.ascontiguousarray(rng.standard_normal((4096, 16))),
             np.ascontiguousarray(rng.standard_normal(16)))),
    }
    one = np.ascontiguousarray(rng.standard_normal((1, 32)))
    V, r = cases["read_norm_batch 20000x32, M=256"][1][1:]

    def calls(impl):
        def run():
            for _ in range(2000):
                impl.read_norm_batch(one, V, r)
        return run

    print(f"{'kernel':42s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}")
    for label, (name, inputs) in cases.items():
        t_py = best_of(lambda: getattr(_kernels_py, name)(*inputs), args.repeat)
        if _kernels is None:
            print(f"{label:42s} {t_py:10.4f} {'n/a':>10s}")
            continue
        t_c = best_of(lambda: getattr(_kernels, name)(*inputs), args.repeat)
        print(f"{label:42s} {t_py:10.4f} {t_c:10.4f} {t_py / t_c:7.1f}x")
    label = "read_norm 2000 single-vector calls"
    t_py = best_of(calls(_kernels_py), args.repeat)
    if _kernels is not None:
        t_c = best_of(calls(_kernels), args.repeat)
        print(f"{label:42s} {t_py:10.4f} {t_c:10.4f} {t_py / t_c:7.1f}x")

    spec = build_read_spec(8, Fraction(1, 2), seed=0, rows=64)
    fs = [FiniteVector.from_dense(random_integer_vector(rng, 8, 5)) for _ in range(20)]
    t = time.perf_counter()
    for f in fs:
        read_dual_norm(spec, f)
    per_lp = (time.perf_counter() - t) / len(fs)
    print(f"\nexact dual-norm LP (dim 8, M=64): {per_lp * 1e3:.1f} ms per call")


if __name__ == "__main__":
    main()
