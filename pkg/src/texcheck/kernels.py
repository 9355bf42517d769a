"""Numeric kernels for retrieval and semantic chunking.

Hot paths are JIT-compiled with numba when available; set TEXCHECK_NO_NUMBA=1
to force the pure-numpy implementations (also used automatically when numba is
not installed). Both paths implement identical tie-breaking (score descending,
row index ascending) so retrieval results do not depend on the backend.

Per benchmarks/bench_kernels.py, numba wins top-k selection by 1-2 orders of
magnitude (numpy pays a full argsort) and edges out adjacent-distances, but a
naive JIT matvec loses to BLAS ~3x — so cosine_scores binds to the numpy/BLAS
implementation in both modes; the njit variant stays importable for the
benchmark.
"""

from __future__ import annotations

import os

import numpy as np

_want_numba = os.environ.get("TEXCHECK_NO_NUMBA", "") not in ("1", "true", "yes")

if _want_numba:
    try:
        from numba import njit
        BACKEND = "numba"
    except ImportError:
        BACKEND = "numpy"
else:
    BACKEND = "numpy"


def _np_cosine_scores(matrix: np.ndarray, row_norms: np.ndarray, query: np.ndarray) -> np.ndarray:
    qnorm = np.linalg.norm(query)
    return (matrix @ query) / (row_norms * qnorm)


def _np_top_k_desc(scores: np.ndarray, k: int) -> np.ndarray:
    # stable sort of -scores: ties keep ascending row order
    order = np.argsort(-scores, kind="stable")
    return order[: min(k, scores.shape[0])].astype(np.int64)


def _np_adjacent_distances(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1)
    dots = np.einsum("ij,ij->i", matrix[:-1], matrix[1:])
    return 1.0 - dots / (norms[:-1] * norms[1:])


if BACKEND == "numba":

    @njit(cache=True)
    def _nb_cosine_scores(matrix, row_norms, query):  # pragma: no cover - numba
        n, d = matrix.shape
        qnorm = 0.0
        for j in range(d):
            qnorm += query[j] * query[j]
        qnorm = np.sqrt(qnorm)
        out = np.empty(n, np.float64)
        for i in range(n):
            s = 0.0
            for j in range(d):
                s += matrix[i, j] * query[j]
            out[i] = s / (row_norms[i] * qnorm)
        return out

    @njit(cache=True)
    def _nb_top_k_desc(scores, k):  # pragma: no cover - numba
        n = scores.shape[0]
        kk = min(k, n)
        top_idx = np.empty(kk, np.int64)
        top_s = np.empty(kk, np.float64)
        size = 0
        for i in range(n):
            s = scores[i]
            if size < kk:
                j = size
                while j > 0 and top_s[j - 1] < s:
                    top_s[j] = top_s[j - 1]
                    top_idx[j] = top_idx[j - 1]
                    j -= 1
                top_s[j] = s
                top_idx[j] = i
                size += 1
            elif s > top_s[size - 1]:
                j = size - 1
                while j > 0 and top_s[j - 1] < s:
                    top_s[j] = top_s[j - 1]
                    top_idx[j] = top_idx[j - 1]
                    j -= 1
                top_s[j] = s
                top_idx[j] = i
        return top_idx

    @njit(cache=True)
    def _nb_adjacent_distances(matrix):  # pragma: no cover - numba
        n, d = matrix.shape
        norms = np.empty(n, np.float64)
        for i in range(n):
            s = 0.0
            for j in range(d):
                s += matrix[i, j] * matrix[i, j]
            norms[i] = np.sqrt(s)
        out = np.empty(n - 1, np.float64)
        for i in range(n - 1):
            dot = 0.0
            for j in range(d):
                dot += matrix[i, j] * matrix[i + 1, j]
            out[i] = 1.0 - dot / (norms[i] * norms[i + 1])
        return out

    cosine_scores = _np_cosine_scores  # BLAS wins this one, see module docstring

    def top_k_desc(scores, k):
        return _nb_top_k_desc(np.ascontiguousarray(scores), k)

    def adjacent_distances(matrix):
        return _nb_adjacent_distances(np.ascontiguousarray(matrix))

else:
    cosine_scores = _np_cosine_scores
    top_k_desc = _np_top_k_desc
    adjacent_distances = _np_adjacent_distances


def warmup() -> None:
    """Trigger JIT compilation so timed sections do not pay it."""
    m = np.eye(3, dtype=np.float64)
    cosine_scores(m, np.ones(3), np.ones(3))
    top_k_desc(np.array([0.1, 0.2, 0.3]), 2)
    adjacent_distances(m)
    if BACKEND == "numba":
        _nb_cosine_scores(m, np.ones(3), np.ones(3))
