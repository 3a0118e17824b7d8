"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call compiles (or loads the on-disk cache) and is
excluded.  Also times one end-to-end vn_gap run under both backends by
re-running it in subprocesses with and without WSLAB_NO_JIT.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from wslab import _kernels as K
from wslab import calculus as C
from wslab import multiindex as mi
from wslab.dilation import random_table


def cases():
    rng = np.random.default_rng(0)
    d, N = 3, 14
    t = random_table(1, d, N, phases=True)
    succ, pred = mi.neighbors(d, N + 1)
    w = np.array(t.weights)
    n_inner = mi.count_upto(d, N - 1)
    yield f"commutation_residuals d={d} N={N}", "commutation_residuals", (w, succ, n_inner)
    yield f"row_sums d={d} N={N}", "row_sums", (w, pred)
    yield f"path_moments d={d} N={N}", "path_moments", (np.abs(w), pred)
    yield f"monomial_action deg 4, d={d} N={N}", "monomial_action", (w, succ, np.array([0, 1, 1, 2], dtype=np.int64))
    p = C.random_polynomial(rng, 3, 4)
    e, c = p.arrays()
    Z = rng.standard_normal((64, 3)) + 1j * rng.standard_normal((64, 3))
    yield "poly_value_grad 64 points, d=3 deg 4", "poly_value_grad", (Z, e, c)


END_TO_END = """
import time
import numpy as np
from wslab import calculus as C, dilation as D
rng = np.random.default_rng(1)
t = D.random_table(1, 3, 8, bounds=(0.5, 0.5, 0.5))
p = C.random_polynomial(rng, 3, 4)
C.vn_gap(p, t.truncate(2), N=2)
t0 = time.perf_counter()
for _ in range(3):
    C.vn_gap(p, t, N=8)
print((time.perf_counter() - t0) / 3)
"""


def end_to_end(no_jit):
    env = dict(os.environ)
    env.pop("WSLAB_NO_JIT", None)
    if no_jit:
        env["WSLAB_NO_JIT"] = "1"
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not K.NUMBA:
        sys.exit("numba is not importable; nothing to compare")
    print(f"{'kernel':45s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for label, name, a in cases():
        K.NUMBA[name](*a)  # compile / load cache
        res = []
        for impl in (K.NUMPY[name], K.NUMBA[name]):
            timer = timeit.Timer(lambda: impl(*a))
            n, _ = timer.autorange()
            res.append(min(timer.repeat(args.repeat, n)) / n * 1e3)
        print(f"{label:45s} {res[0]:11.3f} {res[1]:11.3f} {res[0] / res[1]:7.1f}x")
    a, b = end_to_end(True), end_to_end(False)
    print(f"{'vn_gap d=3 deg 4 N=8 (end to end)':45s} {a * 1e3:11.1f} {b * 1e3:11.1f} {a / b:7.1f}x")


if __name__ == "__main__":
    main()
