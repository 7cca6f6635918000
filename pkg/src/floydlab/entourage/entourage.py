"""Entourages on the sampled circle and the calculus of smallness,
linkedness, shadows and betweenness.

Two representations coexist:

* explicit entourages carry a symmetric reflexive boolean matrix and are
  handled by generic routines (breadth-first search, 2-SAT);
* geometric (visibility) entourages of a hyperbolic disk relate ``x`` and
  ``y`` when the geodesic joining them misses the disk.  The points related
  to ``i`` then form a cyclic interval ``[i - left[i], i + right[i]]``, and
  when the disk subtends less than a third of the circle every small set
  lies in a small interval.  Linkedness and shadows reduce to interval
  arithmetic, which is what the orbit systems use.  The interval route is
  checked against 2-SAT in the tests.
"""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .circle import Circle, HyperbolicDisk, moebius_to_origin
from .twosat import TwoSat

__all__ = [
    "Entourage",
    "ConventionError",
    "PreconditionError",
    "delta",
    "delta_tilde",
    "diameter",
    "is_small",
    "is_linked",
    "shadow",
    "shadow_by_intersection",
    "shadow_by_union",
    "small_shadow_family",
    "point_neighborhood",
    "is_between",
    "ARC_THRESHOLD",
    "UNREACHED",
]

UNREACHED = 255
ARC_THRESHOLD = 2 * np.pi / 3


class ConventionError(ValueError):
    """An entourage violates the diameter or self-linkedness convention."""


class PreconditionError(ValueError):
    """An operation was called outside its precondition."""


class Entourage:
    """A symmetric reflexive relation on the ``N`` circle points."""

    def __init__(self, N: int, relation=None, left=None, right=None,
                 disk: HyperbolicDisk | None = None):
        self.N = int(N)
        self._rel = None if relation is None else np.asarray(relation, dtype=bool)
        self.left = None if left is None else np.asarray(left, dtype=np.int64)
        self.right = None if right is None else np.asarray(right, dtype=np.int64)
        self.disk = disk
        self.gap_threshold = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def explicit(cls, relation, strict: bool = False) -> "Entourage":
        rel = np.array(relation, dtype=bool)
        if rel.ndim != 2 or rel.shape[0] != rel.shape[1]:
            raise ValueError("relation must be a square matrix")
        if not np.array_equal(rel, rel.T):
            raise ValueError("relation must be symmetric")
        np.fill_diagonal(rel, True)
        e = cls(rel.shape[0], relation=rel)
        if strict:
            e.check_convention()
        return e

    @classmethod
    def geometric(cls, circle: Circle | int, center: complex, radius: float,
                  strict: bool = True) -> "Entourage":
        """Visibility entourage of the disk ``B(center, radius)``."""
        N = circle.N if isinstance(circle, Circle) else int(circle)
        if radius <= 0:
            raise ValueError("disk radius must be positive")
        if abs(center) >= 1:
            raise ValueError("disk center must lie inside the unit disk")
        ang = 2 * np.pi * np.arange(N) / N
        img = moebius_to_origin(center, np.exp(1j * ang))
        # isometries preserve cyclic order, so counterclockwise steps are positive
        step = np.angle(img[1:] * np.conj(img[:-1])) % (2 * np.pi)
        psi = np.concatenate([[0.0], np.cumsum(step)])
        theta = 2 * math.asin(min(1.0, 1.0 / math.cosh(radius)))
        U2 = np.concatenate([psi, psi + 2 * np.pi])
        idx = np.arange(N)
        right = np.searchsorted(U2, psi + theta, side="left") - idx - 1
        left = idx + N - np.searchsorted(U2, psi + 2 * np.pi - theta, side="right")
        right = np.clip(right, 0, N - 1)
        left = np.clip(left, 0, N - 1)
        full = right + left >= N - 1
        right = np.where(full, N - 1, right)
        left = np.where(full, 0, left)
        e = cls(N, left=left, right=right, disk=HyperbolicDisk(complex(center), float(radius)))
        e.gap_threshold = theta
        if strict:
            e.check_convention()
        return e

    # -- structure -----------------------------------------------------------
    @property
    def is_arc(self) -> bool:
        """Whether the interval fast path is exact for this entourage."""
        return self.right is not None and self.gap_threshold is not None \
            and self.gap_threshold < ARC_THRESHOLD

    @property
    def relation(self) -> np.ndarray:
        if self._rel is None:
            N = self.N
            d = (np.arange(N)[None, :] - np.arange(N)[:, None]) % N
            rel = (d <= self.right[:, None]) | (N - d <= self.left[:, None]) | (d == 0)
            self._rel = rel
        return self._rel

    def related(self, i: int, j: int) -> bool:
        return bool(self.relation[i, j])

    def small_lengths(self) -> np.ndarray:
        """Length of the maximal small interval starting at each point."""
        return np.minimum(self.right + 1, self.N)

    def key(self) -> bytes:
        if self.right is not None:
            return self.right.tobytes() + self.left.tobytes()
        return np.packbits(self.relation).tobytes()

    def __eq__(self, other):
        return isinstance(other, Entourage) and self.N == other.N and \
            np.array_equal(self.relation, other.relation)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.disk is not None:
            return f"Entourage.geometric(N={self.N}, center={self.disk.center:.4f}, radius={self.disk.radius:g})"
        return f"Entourage.explicit(N={self.N})"

    def check_convention(self):
        if diameter(self, cap=4) <= 4:
            raise ConventionError("entourage diameter must exceed 4")
        if not is_linked(self, self):
            raise ConventionError("entourage is not self-linked")

    def satisfies_convention(self) -> bool:
        try:
            self.check_convention()
            return True
        except ConventionError:
            return False


# -- sets -------------------------------------------------------------------

def _mask(N: int, X) -> np.ndarray:
    if isinstance(X, np.ndarray) and X.dtype == bool:
        if X.shape != (N,):
            raise ValueError("mask has wrong length")
        return X
    m = np.zeros(N, bool)
    if isinstance(X, (int, np.integer)):
        m[int(X)] = True
        return m
    idx = np.fromiter((int(x) for x in X), dtype=np.int64)
    m[idx % N] = True
    return m


def _expand_arc(mask: np.ndarray, left, right) -> np.ndarray:
    """Points related to some point of ``mask`` (interval entourage)."""
    return _expand_rows(mask[None, :], left[None, :], right[None, :])[0]


def _expand_rows(masks: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Row-wise neighbourhood expansion for interval relations."""
    M, N = masks.shape
    r, p = np.nonzero(masks)
    if r.size == 0:
        return np.zeros((M, N), bool)
    lo = p - left[r, p] + N
    hi = p + right[r, p] + N + 1
    base = r * (3 * N + 1)
    cnt = np.bincount(base + lo, minlength=M * (3 * N + 1))
    cnt -= np.bincount(base + hi, minlength=M * (3 * N + 1))
    cov = np.cumsum(cnt.reshape(M, 3 * N + 1), axis=1)[:, : 3 * N] > 0
    return cov[:, :N] | cov[:, N: 2 * N] | cov[:, 2 * N:]


def bfs_rows(frontier: np.ndarray, left: np.ndarray, right: np.ndarray,
             maxd: int = 64) -> np.ndarray:
    """Row-wise relation-graph distance from each row's source set (uint8, capped)."""
    M, N = frontier.shape
    dist = np.full((M, N), UNREACHED, np.uint8)
    dist[frontier] = 0
    seen = frontier.copy()
    cur = frontier
    d = 0
    maxd = min(maxd, UNREACHED - 1)
    while d < maxd:
        nxt = _expand_rows(cur, left, right) & ~seen
        if not nxt.any():
            break
        d += 1
        dist[nxt] = d
        seen |= nxt
        cur = nxt
    return dist


def _bfs(e: Entourage, X: np.ndarray) -> np.ndarray:
    """Distances (float, inf when unreachable) from the set ``X``."""
    if e.right is not None:
        d = bfs_rows(X[None, :], e.left[None, :], e.right[None, :], maxd=UNREACHED - 1)[0]
        out = d.astype(float)
        out[d == UNREACHED] = np.inf
        return out
    rel = e.relation
    out = np.full(e.N, np.inf)
    out[X] = 0
    seen = X.copy()
    cur = X
    d = 0
    while True:
        nxt = rel[cur].any(axis=0) & ~seen
        if not nxt.any():
            break
        d += 1
        out[nxt] = d
        seen |= nxt
        cur = nxt
    return out


def delta(e: Entourage, X, Y) -> float:
    """Relation-graph distance between point sets (inf when disconnected)."""
    Xm, Ym = _mask(e.N, X), _mask(e.N, Y)
    if not Xm.any() or not Ym.any():
        raise ValueError("point sets must be nonempty")
    if (Xm & Ym).any():
        return 0
    d = _bfs(e, Xm)[Ym].min()
    return int(d) if np.isfinite(d) else math.inf


def delta_tilde(e: Entourage, X, Y) -> float:
    """Largest pairwise relation-graph distance between the two sets."""
    Xm, Ym = _mask(e.N, X), _mask(e.N, Y)
    if not Xm.any() or not Ym.any():
        raise ValueError("point sets must be nonempty")
    best = 0
    for x in np.flatnonzero(Xm):
        d = _bfs(e, _mask(e.N, [x]))[Ym].max()
        if not np.isfinite(d):
            return math.inf
        best = max(best, int(d))
    return best


def _sparse_table(vals: np.ndarray) -> list:
    table = [vals]
    span = 1
    while 2 * span <= vals.size:
        prev = table[-1]
        table.append(np.maximum(prev[:-span], prev[span:]))
        span *= 2
    return table


def _window_max(table: list, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Max of ``vals[lo..hi]`` (inclusive) from a sparse table of ``vals``."""
    width = hi - lo + 1
    lvl = np.floor(np.log2(width)).astype(np.int64)
    out = np.empty(lo.size, table[0].dtype)
    for t in np.unique(lvl):
        sel = lvl == t
        tab = table[t]
        out[sel] = np.maximum(tab[lo[sel]], tab[hi[sel] - (1 << t) + 1])
    return out


def _interval_diameter(left: np.ndarray, right: np.ndarray, cap: int | None = None) -> float:
    """Diameter of an interval relation: reach from each point grows as an interval.

    With ``cap`` the search stops after ``cap`` steps and returns ``cap + 1``
    when some point has not yet reached the whole circle.
    """
    N = left.size
    idx3 = np.arange(3 * N)
    reach_r = _sparse_table(np.tile(right, 3) + idx3)       # furthest point to the right
    reach_l = _sparse_table(-(idx3 - np.tile(left, 3)))     # negated furthest point to the left
    pos = np.arange(N) + N
    lo, hi = pos.copy(), pos.copy()
    steps = 0
    done = np.zeros(N, bool)
    diam = 0
    while not done.all():
        if steps > N:
            return math.inf
        if cap is not None and steps >= cap:
            return cap + 1
        nlo = np.maximum(-_window_max(reach_l, lo, hi), pos - N + 1)
        nhi = np.minimum(_window_max(reach_r, lo, hi), pos + N - 1)
        steps += 1
        if np.array_equal(nlo, lo) and np.array_equal(nhi, hi):
            return math.inf
        lo, hi = np.maximum(nlo, 0), np.minimum(nhi, 3 * N - 1)
        newly = ~done & (hi - lo + 1 >= N)
        if newly.any():
            diam = steps
        done |= newly
    return diam


def diameter(e: Entourage, cap: int | None = None) -> float:
    """Relation-graph diameter; with ``cap``, any value above ``cap`` is reported as ``cap + 1``."""
    N = e.N
    if e.right is not None:
        return _interval_diameter(e.left, e.right, cap)
    best = 0
    for x in range(N):
        d = _bfs(e, _mask(N, [x])).max()
        if not np.isfinite(d):
            return math.inf
        best = max(best, int(d))
    return best


def is_small(e: Entourage, S) -> bool:
    m = _mask(e.N, S)
    idx = np.flatnonzero(m)
    if idx.size <= 1:
        return True
    return bool(e.relation[np.ix_(idx, idx)].all())


def point_neighborhood(b: Entourage, p: int) -> np.ndarray:
    """Points ``b``-related to ``p``: the union of all ``b``-small sets containing ``p``."""
    return b.relation[int(p) % b.N].copy()


# -- linkedness and shadows ---------------------------------------------------

def _instance(a: Entourage, b: Entourage) -> TwoSat:
    """Variable true = point on the a-small side."""
    if a.N != b.N:
        raise ValueError("entourages live on different circles")
    N = a.N
    ts = TwoSat(N)
    iu = np.triu_indices(N, 1)
    na = ~a.relation[iu]
    nb = ~b.relation[iu]
    i, j = iu
    ts.add_clauses(ts.lit(i[na], False), ts.lit(j[na], False))
    ts.add_clauses(ts.lit(i[nb], True), ts.lit(j[nb], True))
    return ts


def _arc_unlinked(La: np.ndarray, Lb: np.ndarray) -> np.ndarray:
    """Row-wise: some a-small interval has b-small complement."""
    N = La.shape[-1]
    idx = (np.arange(N) + La) % N
    return np.any(La + np.take_along_axis(Lb, idx, axis=-1) >= N, axis=-1)


def _arc_union(La: np.ndarray, Lb: np.ndarray) -> np.ndarray:
    """Row-wise union of the b-small intervals whose complement is a-small."""
    M, N = Lb.shape
    start = np.arange(N)
    q = Lb + np.take_along_axis(La, (start + Lb) % N, axis=-1) >= N
    r, i = np.nonzero(q)
    if r.size == 0:
        return np.zeros((M, N), bool)
    lo = i
    hi = i + Lb[r, i]
    base = r * (2 * N + 1)
    cnt = np.bincount(base + lo, minlength=M * (2 * N + 1))
    cnt -= np.bincount(base + hi, minlength=M * (2 * N + 1))
    cov = np.cumsum(cnt.reshape(M, 2 * N + 1), axis=1)[:, : 2 * N] > 0
    return cov[:, :N] | cov[:, N:]


def _arc_intersection(La: np.ndarray, Lb: np.ndarray) -> np.ndarray:
    """Intersection of all a-small intervals whose complement is b-small."""
    N = La.size
    i = np.arange(N)[:, None]
    ell = np.arange(1, N + 1)[None, :]
    ok = (ell <= La[:, None]) & (Lb[(i + ell) % N] >= N - ell)
    out = np.ones(N, bool)
    any_member = False
    for s in np.flatnonzero(ok.any(axis=1)):
        lmin = int(np.argmax(ok[s])) + 1
        member = np.zeros(N, bool)
        member[(s + np.arange(lmin)) % N] = True
        out &= member
        any_member = True
    if not any_member:
        raise PreconditionError("entourages are linked")
    return out


def _use_arcs(a: Entourage, b: Entourage) -> bool:
    return a.is_arc and b.is_arc


def is_linked(a: Entourage, b: Entourage, method: str = "auto") -> bool:
    """``True`` when no a-small set has a b-small complement."""
    if method == "auto":
        method = "arc" if _use_arcs(a, b) else "twosat"
    if method == "arc":
        return not bool(_arc_unlinked(a.small_lengths()[None], b.small_lengths()[None])[0])
    return not _instance(a, b).satisfiable()


def shadow_by_union(a: Entourage, b: Entourage, method: str = "auto") -> np.ndarray:
    """``sh_a b`` as the complement of the union of b-small sets with a-small complement."""
    if is_linked(a, b, method="twosat" if method == "twosat" else "auto"):
        raise PreconditionError("shadow needs unlinked entourages")
    if method == "auto":
        method = "arc" if _use_arcs(a, b) else "twosat"
    if method == "arc":
        return ~_arc_union(a.small_lengths()[None], b.small_lengths()[None])[0]
    ts = _instance(b, a)  # variable true = point on the b-small side
    inside = np.array([ts.can_hold(ts.lit(x, True)) for x in range(a.N)], dtype=bool)
    return ~inside


def shadow_by_intersection(a: Entourage, b: Entourage, method: str = "auto") -> np.ndarray:
    """``sh_a b`` as the intersection of a-small sets with b-small complement."""
    if method == "auto":
        method = "arc" if _use_arcs(a, b) else "twosat"
    if method == "arc":
        return _arc_intersection(a.small_lengths(), b.small_lengths())
    ts = _instance(a, b)  # variable true = point on the a-small side
    if not ts.satisfiable():
        raise PreconditionError("shadow needs unlinked entourages")
    # x lies in every member iff x cannot be put on the b-small side
    return np.array([not ts.can_hold(ts.lit(x, False)) for x in range(a.N)], dtype=bool)


def shadow(a: Entourage, b: Entourage, method: str = "auto") -> np.ndarray:
    """The shadow ``sh_a b`` as a boolean mask over circle points."""
    return shadow_by_union(a, b, method)


def small_shadow_family(a: Entourage, b: Entourage, limit: int = 1 << 16):
    """Enumerate the a-small sets with b-small complement (small circles only)."""
    N = a.N
    if N > 16:
        raise ValueError("family enumeration is exhaustive; use N <= 16")
    ra, rb = a.relation, b.relation
    out = []
    for bits in range(1 << N):
        S = np.array([(bits >> i) & 1 for i in range(N)], dtype=bool)
        if is_small(a, S) and is_small(b, ~S):
            out.append(S)
            if len(out) >= limit:
                break
    return out


# -- betweenness --------------------------------------------------------------

def _is_point(x) -> bool:
    return isinstance(x, (int, np.integer))


def is_between(a, b: Entourage, c, k: int) -> bool:
    """``a - b - c (k)`` where ``a`` and ``c`` are entourages or point indices."""
    if k <= 2:
        raise ValueError("betweenness needs k > 2")
    if not isinstance(b, Entourage):
        raise ValueError("the middle argument must be an entourage")

    def side(x):
        if _is_point(x):
            return point_neighborhood(b, int(x))
        if is_linked(b, x):
            return None
        return shadow(b, x)

    if _is_point(a) and _is_point(c) and int(a) % b.N == int(c) % b.N:
        return False
    A, C = side(a), side(c)
    if A is None or C is None:
        return False
    return delta(b, A, C) > k
