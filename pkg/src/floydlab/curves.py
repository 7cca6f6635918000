"""Quasigeodesic checks for vertex sequences under an arbitrary metric."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["QuasigeodesicResult", "is_quasigeodesic", "min_quasigeodesic_constant",
           "pair_distance_matrix", "cayley_metric"]


@dataclass(frozen=True)
class QuasigeodesicResult:
    ok: bool
    violation: tuple | None = None  # (i, j) index pair
    side: str | None = None         # "lower" or "upper"

    def __bool__(self):
        return self.ok


def pair_distance_matrix(curve: Sequence[int], dist) -> np.ndarray:
    """All pairwise distances between curve vertices.

    ``dist`` is a callable ``dist(u, v)`` or a precomputed square matrix
    indexed by vertex.
    """
    curve = list(curve)
    n = len(curve)
    if isinstance(dist, np.ndarray):
        idx = np.asarray(curve)
        return dist[np.ix_(idx, idx)].astype(np.int64)
    out = np.zeros((n, n), np.int64)
    uniq = {}
    for i in range(n):
        for j in range(i + 1, n):
            key = (curve[i], curve[j])
            if key not in uniq:
                uniq[key] = dist(curve[i], curve[j])
            out[i, j] = out[j, i] = uniq[key]
    return out


def is_quasigeodesic(curve: Sequence[int], c: float, dist,
                     pairs: np.ndarray | None = None) -> QuasigeodesicResult:
    """Check ``|j-i|/c - c < d(g_i, g_j) <= c|j-i| + c`` for all index pairs."""
    if c < 1:
        raise ValueError("c must be >= 1")
    D = pair_distance_matrix(curve, dist) if pairs is None else pairs
    n = D.shape[0]
    if n < 2:
        return QuasigeodesicResult(True)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :]).astype(np.float64)
    lower = D > gap / c - c
    upper = D <= c * gap + c
    iu = np.triu_indices(n, 1)
    bad_lo = ~lower[iu]
    bad_up = ~upper[iu]
    if bad_lo.any() or bad_up.any():
        k_lo = int(np.argmax(bad_lo)) if bad_lo.any() else None
        k_up = int(np.argmax(bad_up)) if bad_up.any() else None
        # report the first violating pair in row-major order
        cands = [(k, s) for k, s in ((k_lo, "lower"), (k_up, "upper")) if k is not None]
        k, side = min(cands)
        return QuasigeodesicResult(False, (int(iu[0][k]), int(iu[1][k])), side)
    return QuasigeodesicResult(True)


def min_quasigeodesic_constant(curve: Sequence[int], dist, hi: float = 64.0,
                               tol: float = 1e-9) -> float:
    """Smallest c (to ``tol``) for which the curve is a c-quasigeodesic."""
    D = pair_distance_matrix(curve, dist)
    lo = 1.0
    if is_quasigeodesic(curve, lo, dist, D):
        return lo
    while not is_quasigeodesic(curve, hi, dist, D):
        hi *= 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_quasigeodesic(curve, mid, dist, D):
            hi = mid
        else:
            lo = mid
    return hi


def cayley_metric(ball) -> Callable[[int, int], int]:
    """Exact word distance between ball vertices via normal forms."""
    from .groups import word_distance

    cache = {}

    def elem(i):
        if i not in cache:
            cache[i] = ball.element(int(i))
        return cache[i]

    def dist(u, v):
        return word_distance(elem(u), elem(v))

    return dist
