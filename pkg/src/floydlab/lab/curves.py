"""Horospherical labels and tightness for curves in a Cayley graph.

In the Cayley model the horosphere of a parabolic point is a coset ``gH`` of
an infinite factor ``H``.  Curves are sequences of group elements; distances
are exact word distances.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..groups import GroupElement, GroupSpec, parabolic_distance, word_distance

__all__ = ["Coset", "nearby_cosets", "HorosphericalLabels", "classify_horospherical",
           "classify_horospherical_bfs", "TightnessResult", "is_tight", "curve_elements",
           "distance_matrix"]


@dataclass(frozen=True)
class Coset:
    """The left coset ``rep * H`` of the factor subgroup ``H``; ``rep`` is canonical."""
    rep: GroupElement
    factor: int

    @classmethod
    def of(cls, g: GroupElement, factor: int) -> "Coset":
        syl = g.syllables
        if syl and syl[-1][0] == factor:
            syl = syl[:-1]
        return cls(GroupElement(g.spec, syl), factor)

    def distance(self, v: GroupElement) -> int:
        return parabolic_distance(self.rep.inverse() * v, self.factor)

    def __str__(self):
        return f"{self.rep}H{self.factor}"


def _sphere_words(spec: GroupSpec, d: int) -> list[GroupElement]:
    """All elements of word length at most ``d``."""
    out = {spec.identity()}
    frontier = [spec.identity()]
    gens = [spec.generator_element(g) for g in spec.generators]
    for _ in range(d):
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y not in out:
                    out.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(out, key=lambda x: (x.length, str(x)))


def nearby_cosets(v: GroupElement, factors: Sequence[int], d: int, _cache={}) -> set:
    """Cosets of the listed factors within word distance ``d`` of ``v``."""
    key = (v.spec, d)
    if key not in _cache:
        _cache[key] = _sphere_words(v.spec, d)
    out = set()
    for w in _cache[key]:
        u = v * w
        for f in factors:
            out.add(Coset.of(u, f))
    return out


def curve_elements(ball, curve) -> list[GroupElement]:
    return [ball.element(int(i)) for i in curve]


def distance_matrix(elems: Sequence[GroupElement]) -> np.ndarray:
    n = len(elems)
    D = np.zeros((n, n), np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = word_distance(elems[i], elems[j])
    return D


@dataclass
class HorosphericalLabels:
    labels: list          # Coset responsible for each vertex, or None
    ambiguous: list       # indices where more than one coset qualified

    @property
    def mask(self) -> np.ndarray:
        return np.array([c is not None for c in self.labels], bool)


def classify_horospherical(curve: Sequence[GroupElement], factors: Sequence[int],
                           d: int, e: int) -> HorosphericalLabels:
    """Label vertex ``i`` with a coset when both flanks of ``e + 1`` edges lie in its d-neighborhood."""
    n = len(curve)
    near = [nearby_cosets(v, factors, d) for v in curve]
    labels, amb = [None] * n, []
    for i in range(e + 1, n - e - 1):
        cands = set(near[i])
        for j in range(i - e - 1, i + e + 2):
            cands &= near[j]
            if not cands:
                break
        if cands:
            ordered = sorted(cands, key=lambda c: (c.factor, c.rep.length, str(c.rep)))
            labels[i] = ordered[0]
            if len(ordered) > 1:
                amb.append(i)
    return HorosphericalLabels(labels, amb)


def classify_horospherical_bfs(ball, curve: Sequence[int], factor: int, d: int,
                               e: int) -> np.ndarray:
    """Same labels for one factor, computed by breadth-first search from coset vertices.

    Only cosets through curve vertices' neighbourhoods are explored; the ball
    must contain the d-neighbourhood of the curve.
    """
    elems = curve_elements(ball, curve)
    n = len(curve)
    cosets = set()
    for v in elems:
        cosets |= nearby_cosets(v, [factor], d)
    dist = {}
    for c in cosets:
        members = _coset_vertices(ball, c)
        dist[c] = _multi_bfs(ball, members, d)
    out = np.zeros(n, bool)
    idx = np.asarray(curve)
    for i in range(e + 1, n - e - 1):
        win = idx[i - e - 1:i + e + 2]
        for c in cosets:
            if np.all(dist[c][win] <= d):
                out[i] = True
                break
    return out


def _coset_vertices(ball, c: Coset) -> np.ndarray:
    hs = np.flatnonzero(ball.in_factor(c.factor))
    out = []
    for h in hs:
        g = c.rep * ball.element(int(h))
        if g.length <= ball.radius:
            out.append(ball.index(g))
    return np.array(out, np.int64)


def _multi_bfs(ball, sources: np.ndarray, maxd: int) -> np.ndarray:
    dist = np.full(ball.n, np.iinfo(np.int64).max, np.int64)
    dist[sources] = 0
    frontier = sources
    nb = ball.neighbors
    for k in range(1, maxd + 1):
        cand = nb[frontier].ravel()
        cand = np.unique(cand[cand >= 0])
        cand = cand[dist[cand] > k]
        dist[cand] = k
        frontier = cand
    return dist


@dataclass(frozen=True)
class TightnessResult:
    ok: bool
    condition: int | None = None   # 1: local quasigeodesic, 2: horosphere window
    window: tuple | None = None

    def __bool__(self):
        return self.ok


def is_tight(curve: Sequence[GroupElement], l: int, c: float, factors: Sequence[int],
             d: int = 1, D: np.ndarray | None = None) -> TightnessResult:
    """``(l, c)``-tightness of a curve of group elements.

    Condition 1: every window of at most ``l`` edges is a c-quasigeodesic.
    Condition 2: every window of more than ``l`` edges lying in the
    d-neighbourhood of one coset has endpoints farther apart than ``l/c - c``.
    """
    if l < 1 or c < 1:
        raise ValueError("tightness needs l >= 1 and c >= 1")
    n = len(curve)
    if D is None:
        D = distance_matrix(curve)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    local = (gap <= l) & (gap > 0)
    bad = local & ~((D > gap / c - c) & (D <= c * gap + c))
    if bad.any():
        i, j = np.argwhere(np.triu(bad))[0]
        return TightnessResult(False, 1, (int(i), int(j)))
    floor = l / c - c
    near = [nearby_cosets(v, factors, d) for v in curve]
    allc = set().union(*near) if near else set()
    for cos in sorted(allc, key=lambda x: (x.factor, x.rep.length, str(x.rep))):
        inside = np.array([cos in s for s in near], bool)
        # maximal runs of consecutive vertices inside the neighbourhood
        i = 0
        while i < n:
            if not inside[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and inside[j + 1]:
                j += 1
            if j - i > l:
                for a in range(i, j + 1):
                    for b in range(a + l + 1, j + 1):
                        if not D[a, b] > floor:
                            return TightnessResult(False, 2, (a, b))
            i = j + 1
    return TightnessResult(True)
