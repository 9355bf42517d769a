#!/usr/bin/env python3
"""Benchmark the retrieval/chunking kernels: numba JIT vs pure numpy.

Run without arguments to time both backends (each in its own process, since
the backend is chosen at import time via TEXCHECK_NO_NUMBA) and print a
comparison table:

    python benchmarks/bench_kernels.py

Sizes mirror the artifact's real workloads: a few hundred to a few thousand
child chunks at embedding widths 64-1536.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import numpy as np

CASES = [
    ("cosine_scores  n=200   d=64", "cosine", 200, 64),
    ("cosine_scores  n=1000  d=256", "cosine", 1000, 256),
    ("cosine_scores  n=4000  d=1536", "cosine", 4000, 1536),
    ("top_k_desc     n=1000  k=5", "topk", 1000, 5),
    ("top_k_desc     n=20000 k=5", "topk", 20000, 5),
    ("adjacent_dist  n=500   d=256", "adjacent", 500, 256),
    ("adjacent_dist  n=2000  d=1536", "adjacent", 2000, 1536),
]
REPEATS = 200


def run_current_backend() -> dict:
    from texcheck import kernels

    rng = np.random.default_rng(12345)
    kernels.warmup()
    results = {"backend": kernels.BACKEND, "timings": {}}
    # for the cosine rows, time the backend's own implementation (the njit
    # loop under numba) even though the package binds BLAS in both modes
    if kernels.BACKEND == "numba":
        cosine_impl = lambda m, norms, q: kernels._nb_cosine_scores(
            np.ascontiguousarray(m), norms, q)
    else:
        cosine_impl = kernels._np_cosine_scores
    for label, op, n, d_or_k in CASES:
        if op == "cosine":
            m = rng.standard_normal((n, d_or_k))
            norms = np.linalg.norm(m, axis=1)
            q = rng.standard_normal(d_or_k)
            fn = lambda: cosine_impl(m, norms, q)
        elif op == "topk":
            scores = rng.standard_normal(n)
            fn = lambda: kernels.top_k_desc(scores, d_or_k)
        else:
            m = rng.standard_normal((n, d_or_k))
            fn = lambda: kernels.adjacent_distances(m)
        fn()  # warm
        t0 = time.perf_counter()
        for _ in range(REPEATS):
            fn()
        results["timings"][label] = (time.perf_counter() - t0) / REPEATS * 1e6  # us
    return results


def main() -> int:
    if "--current" in sys.argv:
        print(json.dumps(run_current_backend()))
        return 0

    runs = {}
    for flag, name in (("0", "numba"), ("1", "numpy")):
        env = dict(os.environ, TEXCHECK_NO_NUMBA=flag)
        out = subprocess.run([sys.executable, __file__, "--current"], env=env,
                             capture_output=True, text=True, check=True)
        payload = json.loads(out.stdout.strip().splitlines()[-1])
        runs[name] = payload
        if name == "numba" and payload["backend"] != "numba":
            print("note: numba not importable, both columns are the numpy path")

    print(f"{'case':38} {'numba (us)':>12} {'numpy (us)':>12} {'speedup':>9}")
    print("-" * 75)
    for label, *_ in CASES:
        nb = runs["numba"]["timings"][label]
        npy = runs["numpy"]["timings"][label]
        print(f"{label:38} {nb:12.1f} {npy:12.1f} {npy / nb:8.2f}x")
    print("\ncosine rows compare the njit loop against BLAS; the package binds "
          "BLAS in both modes because it wins.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
