"""Orbit systems of visibility entourages and the graph of linked pairs.

All members of a system are interval entourages, so every query below is a
row-wise computation on ``(M, N)`` arrays: ``L[i]`` holds the maximal small
interval lengths of member ``i`` and ``left``/``right`` its relation arcs.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .circle import Circle, HyperbolicDisk, MoebiusMap, DEFAULT_GENERATORS
from .entourage import (ConventionError, Entourage, PreconditionError, UNREACHED,
                        _arc_unlinked, _arc_union, bfs_rows)

__all__ = ["EntourageSystem", "moebius_orbit", "reduced_words", "Tube",
           "SeparationReport", "Classification"]


def reduced_words(gens: int, L: int):
    """Reduced words over ``gens`` generators and inverses, shortlex order.

    Letters are ``0..gens-1`` for generators and ``gens..2gens-1`` for
    their inverses.
    """
    words = [()]
    frontier = [()]
    for _ in range(L):
        nxt = []
        for w in frontier:
            for s in range(2 * gens):
                if w and (s == (w[-1] + gens) % (2 * gens)):
                    continue
                nxt.append(w + (s,))
        words += nxt
        frontier = nxt
    return words


@dataclass
class Tube:
    members: list
    k: int

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass
class SeparationReport:
    m: int
    pairs: list
    separated: list
    best_m: list
    separators: list

    @property
    def success_fraction(self) -> float:
        return float(np.mean(self.separated)) if self.separated else 0.0


@dataclass
class Classification:
    label: str  # "conical", "parabolic-like" or "indeterminate"
    counts: dict = field(default_factory=dict)
    spread: dict = field(default_factory=dict)  # level -> max angle to p of new members


class EntourageSystem:
    """A finite family of interval entourages with its linked-pairs graph."""

    def __init__(self, circle: Circle, members: list[Entourage], words: list[str],
                 lengths, base: HyperbolicDisk | None = None,
                 generators=None, dropped: int = 0, merged: int = 0):
        if not members:
            raise ValueError("a system needs at least one member")
        for e in members:
            if not e.is_arc:
                raise ValueError("system members must be interval entourages")
        self.circle = circle
        self.N = circle.N
        self.members = list(members)
        self.words = list(words)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.base = base
        self.generators = generators
        self.dropped = dropped
        self.merged = merged
        self.M = len(members)
        self.L = np.stack([e.small_lengths() for e in members])
        self.left = np.stack([e.left for e in members])
        self.right = np.stack([e.right for e in members])
        self.centers = np.array([e.disk.center for e in members])
        self._linked = None
        self._gdist = None
        self._shadow_cache: OrderedDict = OrderedDict()
        self._cache_rows = max(16, int(3e8 // max(self.M * self.N, 1)))

    # -- basic structure ------------------------------------------------------
    def __len__(self):
        return self.M

    def index_of_word(self, word: str) -> int:
        return self.words.index(word)

    @property
    def linked(self) -> np.ndarray:
        """``linked[i, j]`` is True when members i and j are linked."""
        if self._linked is None:
            M = self.M
            out = np.zeros((M, M), bool)
            for i in range(M):
                un = _arc_unlinked(np.broadcast_to(self.L[i], (M, self.N)), self.L)
                out[i] = ~un
            self._linked = out
        return self._linked

    @property
    def unlinked(self) -> np.ndarray:
        return ~self.linked

    def adjacency(self) -> sparse.csr_matrix:
        A = self.linked.copy()
        np.fill_diagonal(A, False)
        return sparse.csr_matrix(A.astype(np.int8))

    def edges(self) -> np.ndarray:
        iu = np.triu_indices(self.M, 1)
        keep = self.linked[iu]
        return np.stack([iu[0][keep], iu[1][keep]], axis=1)

    @property
    def graph_distances(self) -> np.ndarray:
        """Distances in the graph of linked pairs (-1 when disconnected)."""
        if self._gdist is None:
            d = csgraph.shortest_path(self.adjacency(), unweighted=True, directed=False)
            out = np.where(np.isfinite(d), d, -1).astype(np.int64)
            self._gdist = out
        return self._gdist

    def is_connected(self) -> bool:
        return bool((self.graph_distances >= 0).all())

    def linked_counts(self) -> np.ndarray:
        """Number of members linked to each member (discreteness proxy)."""
        return self.linked.sum(axis=1)

    def restrict(self, L: int) -> "EntourageSystem":
        """Subsystem of members with word length at most ``L``."""
        idx = np.flatnonzero(self.lengths <= L)
        sub = EntourageSystem(self.circle, [self.members[i] for i in idx],
                              [self.words[i] for i in idx], self.lengths[idx],
                              self.base, self.generators)
        if self._linked is not None:
            sub._linked = self._linked[np.ix_(idx, idx)]
        return sub

    def angles(self) -> np.ndarray:
        """Direction of each member's disk center."""
        return np.angle(self.centers) % (2 * np.pi)

    # -- shadows and betweenness ------------------------------------------------
    def shadows(self, b: int) -> np.ndarray:
        """Row ``a`` is ``sh_b a`` (meaningful where ``a`` and ``b`` are unlinked)."""
        b = int(b)
        cache = self._shadow_cache
        if b in cache:
            cache.move_to_end(b)
            return cache[b]
        M = self.M
        rows = ~_arc_union(np.broadcast_to(self.L[b], (M, self.N)), self.L)
        cache[b] = rows
        while len(cache) > self._cache_rows:
            cache.popitem(last=False)
        return rows

    def shadow(self, b: int, a: int) -> np.ndarray:
        if self.linked[b, a]:
            raise PreconditionError("shadow needs unlinked members")
        return self.shadows(b)[a]

    def _bfs_from(self, middles, masks, maxd: int) -> np.ndarray:
        middles = np.asarray(middles, dtype=np.int64)
        return bfs_rows(masks, self.left[middles], self.right[middles], maxd=maxd)

    def point_neighborhoods(self, middles, p: int) -> np.ndarray:
        """Rows: points related to ``p`` under each listed member."""
        middles = np.asarray(middles, dtype=np.int64)
        N = self.N
        d = (np.arange(N)[None, :] - p) % N
        r = self.right[middles, p][:, None]
        l = self.left[middles, p][:, None]
        return (d <= r) | (N - d <= l) | (d == 0)

    def delta_between(self, a: int, b: int, c: int, maxd: int = 64) -> float:
        """``Delta_b(sh_b a, sh_b c)`` for unlinked pairs (inf when unreachable)."""
        sh = self.shadows(b)
        dist = self._bfs_from([b], sh[c][None], maxd)[0]
        v = int(dist[sh[a]].min())
        return math.inf if v == UNREACHED else v

    def is_between(self, a: int, b: int, c: int, k: int) -> bool:
        """``a - b - c (k)`` for members."""
        if k <= 2:
            raise ValueError("betweenness needs k > 2")
        if a == c or self.linked[a, b] or self.linked[b, c]:
            return False
        return self.delta_between(a, b, c, maxd=k + 1) > k

    def between_many(self, a, b: int, c: int, k: int) -> np.ndarray:
        """Vectorized over ``a``: ``a - b - c (k)``."""
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        out = np.zeros(a.size, bool)
        if self.linked[b, c]:
            return out
        sh = self.shadows(b)
        dist = self._bfs_from([b], sh[c][None], k + 1)[0].astype(np.int64)
        ok = ~self.linked[a, b] & (a != c)
        vals = np.where(sh[a], dist[None, :], UNREACHED).min(axis=1)
        return ok & (vals > k)

    def is_between_point(self, a: int, b: int, p: int, k: int) -> bool:
        """``a - b - p (k)`` with ``p`` a circle point."""
        return bool(self.separators_of_point([a], p, k, middles=[b])[0, 0])

    def separators_of_point(self, es, p: int, k: int, middles=None) -> np.ndarray:
        """Matrix ``S[i, j]``: ``es[i] - middles[j] - p (k)``."""
        if k <= 2:
            raise ValueError("betweenness needs k > 2")
        es = np.atleast_1d(np.asarray(es, dtype=np.int64))
        mids = np.arange(self.M) if middles is None else np.atleast_1d(np.asarray(middles, np.int64))
        nbhd = self.point_neighborhoods(mids, p)
        dist = self._bfs_from(mids, nbhd, k + 1)
        out = np.zeros((es.size, mids.size), bool)
        for j, m in enumerate(mids):
            cand = ~self.linked[es, m]
            if not cand.any():
                continue
            sh = self.shadows(m)[es[cand]]
            vals = np.where(sh, dist[j][None, :], UNREACHED).min(axis=1)
            out[np.flatnonzero(cand), j] = vals > k
        return out

    # -- refinement and tubes ---------------------------------------------------
    def refinement_set(self, a: int, b: int, k: int) -> np.ndarray:
        """Indices ``c`` with ``a - c - b (k)``."""
        if k <= 2:
            raise ValueError("betweenness needs k > 2")
        if a == b:
            return np.zeros(0, np.int64)
        cand = np.flatnonzero(~self.linked[a] & ~self.linked[b])
        if cand.size == 0:
            return cand
        M, N = cand.size, self.N
        La = np.broadcast_to(self.L[a], (M, N))
        Lb = np.broadcast_to(self.L[b], (M, N))
        sh_a = ~_arc_union(self.L[cand], La)
        sh_b = ~_arc_union(self.L[cand], Lb)
        dist = self._bfs_from(cand, sh_b, k + 1)
        vals = np.where(sh_a, dist, UNREACHED).min(axis=1)
        return cand[vals > k]

    def is_tube(self, seq, k: int) -> bool:
        if k <= 2:
            raise ValueError("tubes need k > 2")
        seq = [int(s) for s in seq]
        for x, y in zip(seq, seq[1:]):
            if self.linked[x, y]:
                return False
        for x, y, z in zip(seq, seq[1:], seq[2:]):
            if not self.is_between(x, y, z, k):
                return False
        return True

    def is_nonrefinable(self, a: int, b: int, k: int) -> bool:
        return self.refinement_set(a, b, k).size == 0

    def build_nonrefinable_tube(self, a: int, b: int, k: int) -> Tube:
        """A k-tube from ``a`` to ``b`` with no member (k+2)-between consecutive entries."""
        if k <= 2:
            raise ValueError("tubes need k > 2")
        a, b = int(a), int(b)
        if not (0 <= a < self.M and 0 <= b < self.M):
            raise PreconditionError("tube endpoints must be system members")
        if a != b and self.linked[a, b]:
            raise PreconditionError("tube endpoints must be unlinked")
        seq = [a]
        head = a
        for _ in range(self.M + 1):
            if head == b or self.is_nonrefinable(head, b, k + 2):
                if head != b:
                    seq.append(b)
                return Tube(seq, k)
            choice = None
            for c in self.refinement_set(head, b, k + 1):
                if self.is_nonrefinable(head, int(c), k + 2):
                    choice = int(c)
                    break
            if choice is None:
                raise RuntimeError(
                    f"no (k+2)-nonrefinable step from member {head} toward {b}; "
                    f"Psi_(k+1) = {self.refinement_set(head, b, k + 1).tolist()}")
            seq.append(choice)
            head = choice
        raise RuntimeError(f"tube construction exceeded {self.M} iterations: {seq}")

    # -- horospheres ------------------------------------------------------------
    def horosphere(self, p: int, k: int, candidates=None, separators=None,
                   pool: "EntourageSystem | None" = None) -> np.ndarray:
        """Members ``e`` (among ``candidates``) with no separator ``a`` such that ``e - a - p (k)``.

        Separators are indices into ``pool`` (default: this system).  A pool
        from :meth:`orbit_separators` reaches orbit members beyond the
        truncation.
        """
        if k <= 2:
            raise ValueError("horospheres need k > 2")
        src = self if pool is None else pool
        if src.N != self.N:
            raise ValueError("separator pool lives on a different circle")
        cands = np.arange(self.M) if candidates is None else np.asarray(candidates, np.int64)
        mids = np.arange(src.M) if separators is None else np.asarray(separators, np.int64)
        remaining = cands.copy()
        if remaining.size == 0 or mids.size == 0:
            return remaining
        N = self.N
        chunk = max(1, (1 << 22) // N)  # bounds the breadth-first-search scratch memory
        for j, m in enumerate(mids):
            if remaining.size == 0:
                break
            if j % chunk == 0:
                block = mids[j:j + chunk]
                dist = src._bfs_from(block, src.point_neighborhoods(block, p), k + 1)
            Lm = src.L[m]
            free = _arc_unlinked(self.L[remaining], np.broadcast_to(Lm, (remaining.size, N)))
            if not free.any():
                continue
            rows = remaining[free]
            sh = ~_arc_union(np.broadcast_to(Lm, (rows.size, N)), self.L[rows])
            vals = np.where(sh, dist[j % chunk][None, :], UNREACHED).min(axis=1)
            sep = np.zeros(remaining.size, bool)
            sep[np.flatnonzero(free)] = vals > k
            remaining = remaining[~sep]
        return remaining

    def orbit_separators(self, p: int, starts=None, step: float = 0.5) -> "EntourageSystem":
        """Orbit members lying near geodesic rays toward the circle point ``p``.

        For each start (default: every member's disk center) points along the
        ray to ``p`` are pulled back to the base disk by greedy descent over
        the generators; the member over each such point and its generator
        neighbours are kept when they resolve on the grid.  Every returned
        member is an orbit image of the base entourage, of any word length.
        """
        if self.generators is None or self.base is None:
            raise PreconditionError("separator search needs the orbit's generators and base disk")
        N = self.N
        gens = list(self.generators)
        mats = [g.disk_matrix for g in gens] + [g.inverse().disk_matrix for g in gens]
        names = [g.name or chr(ord("a") + i) for i, g in enumerate(gens)]
        names += [n.swapcase() for n in names]
        ng = len(gens)
        c0 = complex(self.base.center)
        rho = float(self.base.radius)
        u = np.exp(2j * np.pi * (int(p) % N) / N)
        starts = self.centers if starts is None else np.atleast_1d(np.asarray(starts, complex))
        tmax = rho + math.log(N) + 4.0

        def gap(z):  # monotone in the hyperbolic distance to the base center
            return abs((z - c0) / (1 - np.conj(c0) * z))

        # single letters and reduced two-letter products, so descent from a
        # base off the symmetric centre does not stall at a local minimum
        moves = [((i,), m) for i, m in enumerate(mats)]
        moves += [((i, j), mats[j] @ mats[i]) for i in range(2 * ng) for j in range(2 * ng)
                  if j != (i + ng) % (2 * ng)]
        words = {}
        for s0 in starts:
            s0 = complex(s0)
            v = (u - s0) / (1 - np.conj(s0) * u)
            for t in np.arange(0.0, tmax, step):
                w = math.tanh(t / 2) * v
                z = (w + s0) / (1 + np.conj(s0) * w)
                word = []
                for _ in range(4096):
                    best, bz = None, gap(z)
                    for mv, m in moves:
                        z2 = (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])
                        g2 = gap(z2)
                        if g2 < bz - 1e-12:
                            best, bz, zb = mv, g2, z2
                    if best is None:
                        break
                    z = zb
                    word.extend(best)
                # the member over the ray point is the inverse of the descent
                inv = tuple((i + ng) % (2 * ng) for i in word)
                words[inv] = True
                for i in range(2 * ng):
                    if inv and i == (inv[-1] + ng) % (2 * ng):
                        continue
                    words[inv + (i,)] = True
        members, labels, lengths = [], [], []
        seen = set()
        for w in sorted(words, key=lambda w: (len(w), w)):
            m = np.eye(2, dtype=complex)
            for i in w:
                m = m @ mats[i]
            c = (m[0, 0] * c0 + m[0, 1]) / (m[1, 0] * c0 + m[1, 1])
            if abs(c) >= 1 - 1e-15:
                continue
            key = (round(c.real, 12), round(c.imag, 12))
            if key in seen:
                continue
            seen.add(key)
            e = Entourage.geometric(self.circle, complex(c), rho, strict=False)
            if not (e.is_arc and e.satisfies_convention()):
                continue
            members.append(e)
            labels.append(_word_label(w, names))
            lengths.append(len(w))
        if not members:
            members = [Entourage.geometric(self.circle, c0, rho, strict=False)]
            labels, lengths = [""], [0]
        return EntourageSystem(self.circle, members, labels, lengths, self.base, self.generators)

    def busemann_le(self, a: int, b: int, p: int, k: int) -> bool:
        """``b <= a`` in the Busemann order at ``p``: ``a == b`` or ``a - b - p (k)``."""
        if a == b:
            return True
        return self.is_between_point(a, b, p, k)

    def project_to_horosphere(self, a: int, p: int, k: int, horosphere=None) -> np.ndarray:
        T = self.horosphere(p, k) if horosphere is None else np.asarray(horosphere)
        if T.size == 0:
            raise PreconditionError("empty horosphere")
        if a in set(T.tolist()):
            return np.array([a], np.int64)
        sel = self.separators_of_point([a], p, k, middles=T)[0]
        return T[sel]

    def visibility_neighborhood(self, a: int, q: int, p: int, k: int, horosphere=None) -> np.ndarray:
        if k <= 3:
            raise ValueError("visibility neighbourhoods need k > 3")
        T = self.horosphere(p, k) if horosphere is None else np.asarray(horosphere)
        proj = self.project_to_horosphere(a, p, k, T)
        if q not in set(proj.tolist()):
            raise PreconditionError("q is not a projection of a")
        if a == q or not self.is_between_point(a, q, p, k):
            return np.zeros(0, np.int64)
        keep = [int(x) for x in T if not self.is_between(a, q, int(x), k - 1)]
        return np.array(keep, np.int64)

    def classify_point(self, p: int, k: int, levels=None, margin: int = 0,
                       separators: str = "truncation") -> Classification:
        """Conical / parabolic-like / indeterminate from horosphere counts.

        At level ``L`` the candidates are members of word length ``<= L``.
        With ``separators="truncation"`` separators are members of length
        ``<= L + margin``; with ``separators="orbit"`` they come from
        :meth:`orbit_separators`, which is not bounded by the truncation.
        """
        top = int(self.lengths.max())
        if levels is None:
            levels = sorted({max(top - margin - 1, 0), top - margin})
        levels = [int(L) for L in levels]
        counts, spread = {}, {}
        if separators == "orbit":
            L_hi = max(levels)
            if L_hi > top:
                raise ValueError("system too shallow for the requested level")
            cands = np.flatnonzero(self.lengths <= L_hi)
            pool = self.orbit_separators(p, self.centers[cands])
            T = self.horosphere(p, k, cands, pool=pool)
            for L in levels:
                counts[L] = int((self.lengths[T] <= L).sum())
        elif separators == "truncation":
            for L in levels:
                if L + margin > top:
                    raise ValueError("system too shallow for the requested level and margin")
                cands = np.flatnonzero(self.lengths <= L)
                seps = np.flatnonzero(self.lengths <= L + margin)
                T = self.horosphere(p, k, cands, seps)
                counts[L] = int(T.size)
        else:
            raise ValueError("separators must be 'truncation' or 'orbit'")
        for L in levels:
            Tl = T[self.lengths[T] == L] if separators == "orbit" else None
            if Tl is not None and Tl.size:
                spread[L] = float(self.angular_distance_to(Tl, p).max())
        vals = [counts[L] for L in levels]
        if vals[-1] == 0:
            label = "conical"
        elif len(vals) > 1 and all(y > x for x, y in zip(vals, vals[1:])):
            label = "parabolic-like"
        else:
            label = "indeterminate"
        return Classification(label, counts, spread)

    def angular_distance_to(self, members, p: int) -> np.ndarray:
        """Angle between each member's disk center direction and the circle point ``p``."""
        ang = self.angles()[np.asarray(members, np.int64)]
        d = np.abs(ang - 2 * np.pi * (int(p) % self.N) / self.N) % (2 * np.pi)
        return np.minimum(d, 2 * np.pi - d)

    def separation_check(self, m: int, pairs) -> SeparationReport:
        """Search for members ``a`` with ``p - a - q (m)`` for each point pair."""
        seps, best, ok = [], [], []
        pairs = [(int(p) % self.N, int(q) % self.N) for p, q in pairs]
        for p, q in pairs:
            if p == q:
                raise PreconditionError("separation needs distinct points")
            nbp = self.point_neighborhoods(np.arange(self.M), p)
            nbq = self.point_neighborhoods(np.arange(self.M), q)
            dist = self._bfs_from(np.arange(self.M), nbp, 64)
            vals = np.where(nbq, dist, UNREACHED).min(axis=1).astype(np.int64)
            vals = np.where(vals == UNREACHED, 10 ** 6, vals)
            j = int(np.argmax(vals))
            best.append(int(vals[j]) - 1)
            good = vals > m
            ok.append(bool(good.any()))
            seps.append(int(np.flatnonzero(good)[0]) if good.any() else -1)
        return SeparationReport(m, pairs, ok, best, seps)

    # -- exports ----------------------------------------------------------------
    def edge_list_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges())

    def horosphere_text(self, members) -> str:
        return "".join(f"{int(i)} {self.words[int(i)] or '1'}\n" for i in members)


def _word_label(word, names) -> str:
    return "".join(names[s] for s in word)


def moebius_orbit(generators=DEFAULT_GENERATORS, base_disk: HyperbolicDisk | None = None,
                  L: int = 5, circle: Circle | int = 512, drop_degenerate: bool = True
                  ) -> EntourageSystem:
    """Visibility entourages of the orbit of a base disk under reduced words of length <= L.

    Entourages with identical relations on the grid are merged (the
    shortest word is kept).  Images whose grid relation breaks the diameter
    or self-linkedness convention are dropped and counted when
    ``drop_degenerate`` is set.
    """
    if not isinstance(circle, Circle):
        circle = Circle(int(circle))
    if base_disk is None:
        base_disk = HyperbolicDisk(0j, 2.0)
    base = Entourage.geometric(circle, base_disk.center, base_disk.radius, strict=False)
    if not base.satisfies_convention() or not base.is_arc:
        raise ConventionError("base disk violates the diameter convention on this grid")
    gens = list(generators)
    ng = len(gens)
    names = [g.name or chr(ord("a") + i) for i, g in enumerate(gens)]
    names += [n.swapcase() for n in names]
    mats = [g.disk_matrix for g in gens] + [g.inverse().disk_matrix for g in gens]
    members, words, lengths = [], [], []
    seen = {}
    dropped = merged = 0
    prods = {(): np.eye(2, dtype=complex)}
    for w in reduced_words(ng, L):
        if w:
            m = prods[w[:-1]] @ mats[w[-1]]
            m = m / np.sqrt(np.linalg.det(m))
            prods[w] = m
        m = prods[w]
        c0 = base_disk.center
        c = (m[0, 0] * c0 + m[0, 1]) / (m[1, 0] * c0 + m[1, 1])
        if abs(c) >= 1 - 1e-15:
            dropped += 1
            continue
        e = Entourage.geometric(circle, complex(c), base_disk.radius, strict=False)
        key = e.key()
        if key in seen:
            merged += 1
            continue
        if w and drop_degenerate and (not e.is_arc or not e.satisfies_convention()):
            dropped += 1
            continue
        seen[key] = len(members)
        members.append(e)
        words.append(_word_label(w, names))
        lengths.append(len(w))
    return EntourageSystem(circle, members, words, lengths, base_disk, gens, dropped, merged)
