"""Free products of abelian groups: normal forms, word metric and Cayley balls.

Elements are stored as syllable normal forms.  A syllable is a pair
``(factor, value)`` where ``value`` is a tuple of ints for a free abelian
factor and a residue in ``1..m-1`` for a finite cyclic factor.

Balls are enumerated numerically as a syllable trie so that radius 10 in
``Z^2 * Z`` (about 3.5 million vertices) fits comfortably in memory.
Vertex order is breadth first by word length with a syllable-lexicographic
tie-break, so ``ball(R)`` is an index prefix of ``ball(R')`` for ``R <= R'``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

__all__ = [
    "FreeAbelian",
    "FiniteCyclic",
    "GroupSpec",
    "GroupElement",
    "CayleyBall",
    "ResourceLimitError",
    "normal_form",
    "group_op",
    "invert",
    "word_distance",
    "parabolic_distance",
    "cayley_ball",
    "growth_counts",
    "parse_factors",
    "write_edge_list",
]

DEFAULT_BALL_CAP = 8_000_000


class ResourceLimitError(RuntimeError):
    """Raised when a requested ball would exceed the vertex cap."""


@dataclass(frozen=True)
class FreeAbelian:
    rank: int

    def __post_init__(self):
        if int(self.rank) < 1:
            raise ValueError("free abelian factor needs rank >= 1")

    def __str__(self):
        return "Z" if self.rank == 1 else f"Z^{self.rank}"


@dataclass(frozen=True)
class FiniteCyclic:
    order: int

    def __post_init__(self):
        if int(self.order) < 2:
            raise ValueError("finite cyclic factor needs order >= 2")

    def __str__(self):
        return f"Z/{self.order}"


_FACTOR_RE = re.compile(r"^Z(?:\^(\d+))?$|^Z/(\d+)$|^C(\d+)$")


def parse_factors(text: str) -> tuple:
    """Parse a factor list such as ``"Z^2, Z"`` or ``"Z/2, Z/3"``."""
    out = []
    for raw in text.split(","):
        tok = raw.strip().replace(" ", "")
        m = _FACTOR_RE.match(tok)
        if not m:
            raise ValueError(f"cannot parse factor {raw.strip()!r}")
        if m.group(2) or m.group(3):
            out.append(FiniteCyclic(int(m.group(2) or m.group(3))))
        else:
            out.append(FreeAbelian(int(m.group(1) or 1)))
    if not out:
        raise ValueError("empty factor list")
    return tuple(out)


@dataclass(frozen=True)
class Generator:
    name: str
    factor: int
    coord: int  # basis index inside the factor (0 for cyclic)
    sign: int


class GroupSpec:
    """A free product of abelian factors with its standard generating set.

    Generator names default to consecutive letters ``a, b, c, ...``, one per
    basis element; inverses are written ``A`` (upper case) or ``a^-1``.
    """

    def __init__(self, factors, names: Sequence[str] | None = None):
        if isinstance(factors, str):
            factors = parse_factors(factors)
        factors = tuple(factors)
        if not factors:
            raise ValueError("a group needs at least one factor")
        for f in factors:
            if not isinstance(f, (FreeAbelian, FiniteCyclic)):
                raise TypeError(f"bad factor descriptor {f!r}")
        self.factors = factors
        nbasis = sum(f.rank if isinstance(f, FreeAbelian) else 1 for f in factors)
        if names is None:
            names = [chr(ord("a") + i) for i in range(nbasis)]
        names = list(names)
        if len(names) != nbasis or len(set(names)) != nbasis:
            raise ValueError(f"need {nbasis} distinct generator names")
        self.names = tuple(names)
        gens = []
        self._tokens = {}
        pos = 0
        for fi, f in enumerate(factors):
            dims = f.rank if isinstance(f, FreeAbelian) else 1
            for j in range(dims):
                name = names[pos]
                pos += 1
                g = Generator(name, fi, j, 1)
                gens.append(g)
                self._tokens[name] = g
                ginv = Generator(name + "^-1", fi, j, -1)
                if not (isinstance(f, FiniteCyclic) and f.order == 2):
                    gens.append(ginv)
                self._tokens[name + "^-1"] = ginv
                if name.isalpha() and name.islower():
                    self._tokens[name.upper()] = ginv
        self.generators = tuple(gens)

    # -- basic helpers -------------------------------------------------
    def __eq__(self, other):
        return (isinstance(other, GroupSpec) and self.factors == other.factors
                and self.names == other.names)

    def __hash__(self):
        return hash((self.factors, self.names))

    def __repr__(self):
        return f"GroupSpec({' * '.join(str(f) for f in self.factors)})"

    @property
    def parabolic_factors(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.factors) if isinstance(f, FreeAbelian))

    def identity(self) -> "GroupElement":
        return GroupElement(self, ())

    def generator_element(self, g: Generator) -> "GroupElement":
        return GroupElement(self, (( g.factor, self._gen_value(g)),))

    def _gen_value(self, g: Generator):
        f = self.factors[g.factor]
        if isinstance(f, FreeAbelian):
            v = [0] * f.rank
            v[g.coord] = g.sign
            return tuple(v)
        return g.sign % f.order

    def token(self, tok: str) -> Generator:
        try:
            return self._tokens[tok]
        except KeyError:
            raise ValueError(f"unknown generator token {tok!r}") from None

    def factor_length(self, fi: int, value) -> int:
        f = self.factors[fi]
        if isinstance(f, FreeAbelian):
            return sum(abs(c) for c in value)
        k = value % f.order
        return min(k, f.order - k)

    def _is_zero(self, fi: int, value) -> bool:
        f = self.factors[fi]
        if isinstance(f, FreeAbelian):
            return not any(value)
        return value % f.order == 0

    def _add(self, fi: int, u, v):
        f = self.factors[fi]
        if isinstance(f, FreeAbelian):
            return tuple(a + b for a, b in zip(u, v))
        return (u + v) % f.order

    def _neg(self, fi: int, u):
        f = self.factors[fi]
        if isinstance(f, FreeAbelian):
            return tuple(-a for a in u)
        return (-u) % f.order

    def element(self, syllables) -> "GroupElement":
        """Build an element from syllables, normalizing as it goes."""
        out = self.identity()
        for fi, val in syllables:
            f = self.factors[fi]
            val = tuple(int(c) for c in val) if isinstance(f, FreeAbelian) else int(val) % f.order
            out = group_op(out, GroupElement(self, () if self._is_zero(fi, val) else ((fi, val),)))
        return out

    def parse_word(self, word) -> list[Generator]:
        if isinstance(word, str):
            word = word.split()
        return [self.token(t) for t in word]


@dataclass(frozen=True)
class GroupElement:
    spec: GroupSpec
    syllables: tuple

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return group_op(self, other)

    def __invert__(self) -> "GroupElement":
        return invert(self)

    def inverse(self) -> "GroupElement":
        return invert(self)

    @property
    def length(self) -> int:
        return sum(self.spec.factor_length(fi, v) for fi, v in self.syllables)

    def __len__(self):
        return len(self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def word(self) -> list[str]:
        """A geodesic spelling of the element as generator tokens."""
        out = []
        for fi, val in self.syllables:
            f = self.spec.factors[fi]
            gens = [g for g in self.spec.generators if g.factor == fi and g.sign == 1]
            if isinstance(f, FreeAbelian):
                for g in gens:
                    c = val[g.coord]
                    out.extend([g.name if c > 0 else g.name + "^-1"] * abs(c))
            else:
                k = val % f.order
                if k <= f.order - k:
                    out.extend([gens[0].name] * k)
                else:
                    out.extend([gens[0].name + "^-1"] * (f.order - k))
        return out

    def __str__(self):
        if not self.syllables:
            return "1"
        return "".join(self.word())


def _check_same(x: GroupElement, y: GroupElement):
    if x.spec != y.spec:
        raise ValueError("elements belong to different group specs")


def group_op(x: GroupElement, y: GroupElement) -> GroupElement:
    _check_same(x, y)
    spec = x.spec
    left = list(x.syllables)
    right = list(y.syllables)
    while left and right and left[-1][0] == right[0][0]:
        fi = left[-1][0]
        s = spec._add(fi, left[-1][1], right[0][1])
        left.pop()
        right.pop(0)
        if not spec._is_zero(fi, s):
            left.append((fi, s))
            break
    return GroupElement(spec, tuple(left + right))


def invert(x: GroupElement) -> GroupElement:
    spec = x.spec
    return GroupElement(spec, tuple((fi, spec._neg(fi, v)) for fi, v in reversed(x.syllables)))


def normal_form(spec: GroupSpec, word) -> GroupElement:
    """Normal form of a word given as generator tokens (list or spaced string)."""
    out = spec.identity()
    for g in spec.parse_word(word):
        out = group_op(out, spec.generator_element(g))
    return out


def word_distance(x: GroupElement, y: GroupElement) -> int:
    return group_op(invert(x), y).length


def parabolic_distance(x: GroupElement, factor: int) -> int:
    """Word distance from ``x`` to the infinite factor subgroup ``factor``."""
    f = x.spec.factors[factor]
    if not isinstance(f, FreeAbelian):
        raise ValueError(f"factor {factor} is finite and not parabolic")
    syl = x.syllables
    if syl and syl[0][0] == factor:
        syl = syl[1:]
    return sum(x.spec.factor_length(fi, v) for fi, v in syl)


# -- growth series --------------------------------------------------------

def _factor_sphere_counts(f, R: int) -> list[int]:
    if isinstance(f, FiniteCyclic):
        m = f.order
        out = [0] * (R + 1)
        for k in range(m):
            n = min(k, m - k)
            if n <= R:
                out[n] += 1
        return out
    r = f.rank
    out = [1] + [0] * R
    for n in range(1, R + 1):
        out[n] = sum(_comb(r, j) * _comb(n - 1, j - 1) * 2 ** j for j in range(1, min(r, n) + 1))
    return out


def _comb(n, k):
    if k < 0 or k > n:
        return 0
    from math import comb
    return comb(n, k)


def _series_inverse(s: list[int], R: int) -> list:
    from fractions import Fraction
    inv = [Fraction(0)] * (R + 1)
    inv[0] = Fraction(1, s[0])
    for n in range(1, R + 1):
        acc = sum(s[j] * inv[n - j] for j in range(1, n + 1))
        inv[n] = -acc / s[0]
    return inv


def growth_counts(spec: GroupSpec, R: int) -> list[int]:
    """Cumulative ball sizes ``|B(0)|, ..., |B(R)|`` from the growth series."""
    k = len(spec.factors)
    total = [0] * (R + 1)
    for f in spec.factors:
        inv = _series_inverse(_factor_sphere_counts(f, R), R)
        for n in range(R + 1):
            total[n] += inv[n]
    total[0] -= k - 1
    sphere = _series_inverse(total, R)
    out, acc = [], 0
    for n in range(R + 1):
        acc += int(sphere[n])
        out.append(acc)
    return out


# -- numeric Cayley balls ---------------------------------------------------

class _FactorTable:
    """Nonzero elements of one factor with length <= R, sorted by (length, value)."""

    def __init__(self, spec: GroupSpec, fi: int, R: int):
        f = spec.factors[fi]
        self.fi = fi
        self.R = R
        if isinstance(f, FreeAbelian):
            r = f.rank
            rng = range(-R, R + 1)
            vals = [v for v in itertools.product(rng, repeat=r)
                    if 0 < sum(map(abs, v)) <= R]
            vals.sort(key=lambda v: (sum(map(abs, v)), v))
            self.values = np.array(vals, dtype=np.int64).reshape(-1, r)
            self.lengths = np.abs(self.values).sum(axis=1) if len(vals) else np.zeros(0, np.int64)
            side = 2 * R + 3
            self._side = side
            self._dense = np.full(side ** r, -1, dtype=np.int64)
            if len(vals):
                self._dense[self._encode(self.values)] = np.arange(len(vals))
            self.tuples = [tuple(int(c) for c in v) for v in vals]
        else:
            m = f.order
            vals = [k for k in range(1, m) if min(k, m - k) <= R]
            vals.sort(key=lambda k: (min(k, m - k), k))
            self.values = np.array(vals, dtype=np.int64)
            self.lengths = np.minimum(self.values, m - self.values) if vals else np.zeros(0, np.int64)
            self._dense = np.full(m, -1, dtype=np.int64)
            self._dense[self.values] = np.arange(len(vals))
            self.tuples = list(vals)
        self.cyclic = isinstance(f, FiniteCyclic)
        self.order = f.order if self.cyclic else None
        self.lookup = {v: i for i, v in enumerate(self.tuples)}
        # cum[b] = number of table elements with length <= b
        self.cum = np.searchsorted(self.lengths, np.arange(R + 1), side="right")

    def _encode(self, vals):
        R1 = self.R + 1
        idx = np.zeros(vals.shape[0], dtype=np.int64)
        for j in range(vals.shape[1] - 1, -1, -1):
            idx = idx * self._side + (vals[:, j] + R1)
        return idx

    def index_of(self, vals):
        """Table index of each value (array of rows or residues), -1 if absent."""
        if self.cyclic:
            return self._dense[np.asarray(vals) % self.order]
        vals = np.asarray(vals)
        ok = np.abs(vals).max(axis=1) <= self.R + 1
        out = np.full(vals.shape[0], -1, dtype=np.int64)
        out[ok] = self._dense[self._encode(vals[ok])]
        return out

    def __len__(self):
        return len(self.tuples)


def _ragged_arange(counts):
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.cumsum(counts) - counts
    return np.arange(total, dtype=np.int64) - np.repeat(starts, counts)


class CayleyBall:
    """The ball of radius ``R`` about the identity in the Cayley graph.

    Attributes
    ----------
    n : number of vertices (vertex 0 is the identity)
    length : word length of every vertex
    neighbors : ``(n, |S|)`` array, column ``j`` is ``v * s_j`` or -1 if outside
    """

    def __init__(self, spec: GroupSpec, R: int, cap: int = DEFAULT_BALL_CAP):
        if R < 0:
            raise ValueError("radius must be >= 0")
        projected = growth_counts(spec, R)[-1]
        if projected > cap:
            raise ResourceLimitError(
                f"ball of radius {R} would have {projected} vertices (cap {cap})")
        self.spec = spec
        self.radius = R
        self._build()
        self._csr = None

    def _build(self):
        spec, R = self.spec, self.radius
        tables = [_FactorTable(spec, fi, R) for fi in range(len(spec.factors))]
        offsets = np.cumsum([0] + [len(t) for t in tables])
        self._tables = tables
        self._offsets = offsets
        self._nranks = int(offsets[-1])
        parent = [np.array([-1], np.int64)]
        fac = [np.array([-1], np.int64)]
        sidx = [np.array([-1], np.int64)]
        length = [np.array([0], np.int64)]
        seq_depth = [np.array([0], np.int64)]
        base = 1
        prev = np.array([0], np.int64)
        prev_fac, prev_len = fac[0], length[0]
        levels = [(parent[0], fac[0], sidx[0], length[0])]
        for s in range(1, R + 1):
            ps, fs, ss, ls = [], [], [], []
            for fi, t in enumerate(tables):
                mask = (prev_fac != fi) & (prev_len < R)
                P = prev[mask]
                if P.size == 0 or len(t) == 0:
                    continue
                budget = R - prev_len[mask]
                cnt = t.cum[budget]
                ps.append(np.repeat(P, cnt))
                within = _ragged_arange(cnt)
                fs.append(np.full(within.size, fi, np.int64))
                ss.append(within)
                ls.append(np.repeat(prev_len[mask], cnt) + t.lengths[within])
            if not ps:
                break
            lp, lf, lsx, ll = (np.concatenate(a) for a in (ps, fs, ss, ls))
            levels.append((lp, lf, lsx, ll))
            prev = np.arange(base, base + lp.size, dtype=np.int64)
            base += lp.size
            prev_fac, prev_len = lf, ll
        parent = np.concatenate([lv[0] for lv in levels])
        fac = np.concatenate([lv[1] for lv in levels])
        sidx = np.concatenate([lv[2] for lv in levels])
        length = np.concatenate([lv[3] for lv in levels])
        n = parent.size
        rank = np.where(fac >= 0, offsets[np.maximum(fac, 0)] + sidx, -1)
        depth = max(len(levels) - 1, 1)
        seq = np.full((n, depth), -1, dtype=np.int32)
        pos = 1
        for s, lv in enumerate(levels[1:], start=1):
            m = lv[0].size
            ids = np.arange(pos, pos + m)
            seq[ids] = seq[lv[0]]
            seq[ids, s - 1] = rank[ids]
            pos += m
        keys = [seq[:, j] for j in range(depth - 1, -1, -1)] + [length]
        order = np.lexsort(keys)
        del seq, keys
        newid = np.empty(n, np.int64)
        newid[order] = np.arange(n)
        par = parent[order]
        self.parent = np.where(par >= 0, newid[np.maximum(par, 0)], -1)
        self.factor = fac[order]
        self.table_index = sidx[order]
        self.length = length[order]
        self.rank = rank[order]
        self.n = n
        # trie lookup: key = parent * nranks + rank
        keys = self.parent[1:] * self._nranks + self.rank[1:]
        korder = np.argsort(keys, kind="stable")
        self._keys = keys[korder]
        self._keyvals = korder + 1
        self._build_neighbors()

    def _lookup(self, parents, ranks):
        parents = np.asarray(parents, np.int64)
        ranks = np.asarray(ranks, np.int64)
        out = np.full(parents.shape, -1, np.int64)
        ok = (parents >= 0) & (ranks >= 0)
        if not ok.any() or self._keys.size == 0:
            return out
        k = parents[ok] * self._nranks + ranks[ok]
        pos = np.searchsorted(self._keys, k)
        pos = np.minimum(pos, self._keys.size - 1)
        hit = self._keys[pos] == k
        res = np.where(hit, self._keyvals[pos], -1)
        out[ok] = res
        return out

    def _build_neighbors(self):
        spec = self.spec
        gens = spec.generators
        nb = np.full((self.n, len(gens)), -1, np.int64)
        allv = np.arange(self.n)
        for j, g in enumerate(gens):
            t = self._tables[g.factor]
            gval = spec._gen_value(g)
            same = self.factor == g.factor
            # vertices whose last syllable is in a different factor: append g
            other = allv[~same]
            gidx = t.index_of(np.array([gval]))[0]
            if gidx >= 0:
                nb[other, j] = self._lookup(other, np.full(other.size, self._offsets[g.factor] + gidx))
            # vertices whose last syllable is in g's factor: modify it
            sv = allv[same]
            if sv.size:
                cur = t.values[self.table_index[sv]]
                if t.cyclic:
                    new = (cur + gval) % t.order
                    zero = new == 0
                    nidx = t.index_of(new)
                else:
                    new = cur + np.array(gval)[None, :]
                    zero = ~new.any(axis=1)
                    nidx = t.index_of(new)
                res = np.where(nidx >= 0,
                               self._lookup(self.parent[sv], np.where(nidx >= 0, self._offsets[g.factor] + nidx, -1)),
                               -1)
                res = np.where(zero, self.parent[sv], res)
                nb[sv, j] = res
        self.neighbors = nb

    # -- public helpers --------------------------------------------------
    def __len__(self):
        return self.n

    @property
    def vertex_count(self) -> int:
        return self.n

    def element(self, i: int) -> GroupElement:
        syl = []
        while i > 0:
            fi = int(self.factor[i])
            syl.append((fi, self._tables[fi].tuples[int(self.table_index[i])]))
            i = int(self.parent[i])
        return GroupElement(self.spec, tuple(reversed(syl)))

    def index(self, g: GroupElement) -> int:
        """Vertex index of ``g``; raises ``KeyError`` if outside the ball."""
        if g.spec != self.spec:
            raise ValueError("element from a different group spec")
        cur = 0
        for fi, val in g.syllables:
            t = self._tables[fi]
            ti = t.lookup.get(val)
            if ti is None:
                raise KeyError(f"{g} is outside the ball of radius {self.radius}")
            nxt = int(self._lookup(np.array([cur]), np.array([self._offsets[fi] + ti]))[0])
            if nxt < 0:
                raise KeyError(f"{g} is outside the ball of radius {self.radius}")
            cur = nxt
        return cur

    def __contains__(self, g: GroupElement) -> bool:
        try:
            self.index(g)
            return True
        except KeyError:
            return False

    def edges(self) -> np.ndarray:
        """Undirected edges ``(u, v)`` with ``u < v``, sorted."""
        u = np.repeat(np.arange(self.n), self.neighbors.shape[1])
        v = self.neighbors.ravel()
        keep = v > u
        e = np.stack([u[keep], v[keep]], axis=1)
        e = np.unique(e, axis=0)
        return e

    def csr(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix (cached)."""
        if self._csr is None:
            u = np.repeat(np.arange(self.n), self.neighbors.shape[1])
            v = self.neighbors.ravel()
            keep = v >= 0
            m = sparse.csr_matrix((np.ones(int(keep.sum()), np.float64), (u[keep], v[keep])),
                                  shape=(self.n, self.n))
            m.sum_duplicates()
            m.data[:] = 1.0
            self._csr = m
        return self._csr

    def bfs(self, source: int) -> np.ndarray:
        """Graph distances inside the ball from ``source`` (int64, -1 if unreachable)."""
        dist = np.full(self.n, -1, np.int64)
        dist[source] = 0
        frontier = np.array([source], np.int64)
        d = 0
        nb = self.neighbors
        while frontier.size:
            d += 1
            cand = nb[frontier].ravel()
            cand = cand[cand >= 0]
            cand = np.unique(cand)
            cand = cand[dist[cand] < 0]
            dist[cand] = d
            frontier = cand
        return dist

    def in_factor(self, factor: int) -> np.ndarray:
        """Mask of vertices lying in the subgroup given by one factor."""
        return (self.length == 0) | ((self.factor == factor) & (self.parent == 0))

    def parabolic_distances(self, factor: int) -> np.ndarray:
        """``d(v, H)`` for every vertex, with ``H`` the factor subgroup."""
        if not isinstance(self.spec.factors[factor], FreeAbelian):
            raise ValueError(f"factor {factor} is finite and not parabolic")
        # length of the first syllable of each vertex
        first = np.zeros(self.n, np.int64)
        first_fac = np.full(self.n, -1, np.int64)
        lvl1 = self.parent == 0
        first[lvl1] = self.length[lvl1]
        first_fac[lvl1] = self.factor[lvl1]
        # propagate the first syllable down the trie, one depth per pass
        todo = np.flatnonzero(self.parent > 0)
        while todo.size:
            p = self.parent[todo]
            ready = (first_fac[p] >= 0)
            first[todo[ready]] = first[p[ready]]
            first_fac[todo[ready]] = first_fac[p[ready]]
            todo = todo[~ready]
        return np.where(first_fac == factor, self.length - first, self.length)


def cayley_ball(spec: GroupSpec, R: int, cap: int = DEFAULT_BALL_CAP) -> CayleyBall:
    return CayleyBall(spec, R, cap=cap)


def write_edge_list(ball: CayleyBall, path) -> None:
    """Write one ``u v`` line per undirected edge."""
    e = ball.edges()
    with open(path, "w") as fh:
        for u, v in e:
            fh.write(f"{u} {v}\n")
