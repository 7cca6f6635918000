"""Floyd rescaling of graph metrics.

An edge ``{x, y}`` gets weight ``f(m)`` where ``m = min(d(v, x), d(v, y))``
is its distance to the basepoint ``v``; ``f(0)`` is read as ``f(1)``.  The
Floyd distance is the shortest-path metric for these weights.

On a truncated Cayley ball a distance is certified ``exact`` when it is
cheaper than any path that leaves the ball: such a path climbs from each
endpoint through every level up to ``R + 1``, and the weights it pays on
the way are bounded below level by level.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import _kernels
from .groups import CayleyBall

__all__ = [
    "ScalingFunction",
    "AdmissibilityReport",
    "Condition3Report",
    "FloydWeightedBall",
    "FloydDistance",
    "Partition",
    "check_admissible",
    "check_condition3",
    "lambda_threshold",
    "floyd_length",
    "floyd_distance",
    "bilipschitz_check",
    "karlsson_sweep",
    "shortcut_distance",
    "distance_rows_csv",
    "parse_scaling",
]

TOL = 1e-12


class ScalingFunction:
    """A positive, summable, slowly decreasing function on the naturals.

    Use the constructors :meth:`geometric`, :meth:`polynomial` and
    :meth:`table`.  Values are cached so that equal arguments always give
    bit-identical floats.
    """

    def __init__(self, kind: str, param: float, values=None, tail=None):
        self.kind = kind
        self.param = float(param) if param is not None else None
        self._explicit = None if values is None else [float(x) for x in values]
        self.tail_rule = tail
        self._cache: list[float] = []

    @classmethod
    def geometric(cls, mu: float) -> "ScalingFunction":
        mu = float(mu)
        if not 0.0 < mu < 1.0:
            raise ValueError(f"geometric ratio must lie in (0, 1), got {mu}")
        return cls("geometric", mu)

    @classmethod
    def polynomial(cls, k: float) -> "ScalingFunction":
        k = float(k)
        if k <= 1.0:
            raise ValueError(f"polynomial exponent must exceed 1, got {k}")
        return cls("polynomial", k)

    @classmethod
    def table(cls, values, tail=("geometric", 0.5)) -> "ScalingFunction":
        """Explicit values ``f(0..len-1)`` continued by a tail rule.

        ``tail`` is ``("geometric", mu)`` (continue multiplying by ``mu``)
        or ``("polynomial", k)`` (continue as ``c * (n+1)^-k`` matched at the
        last value).  Any ``mu >= 1`` or ``k <= 1`` gives a divergent tail.
        """
        values = [float(x) for x in values]
        if not values:
            raise ValueError("table needs at least one value")
        if any(not (x > 0) for x in values):
            raise ValueError("scaling values must be positive")
        kind, p = tail
        if kind not in ("geometric", "polynomial"):
            raise ValueError(f"unknown tail rule {kind!r}")
        return cls("table", None, values, (kind, float(p)))

    def __repr__(self):
        if self.kind == "table":
            return f"ScalingFunction.table({self._explicit}, tail={self.tail_rule})"
        return f"ScalingFunction.{self.kind}({self.param:g})"

    def describe(self) -> str:
        if self.kind == "table":
            vals = " ".join(f"{x:.12g}" for x in self._explicit)
            return f"table {vals} ; {self.tail_rule[0]} {self.tail_rule[1]:.12g}"
        return f"{self.kind} {self.param:.12g}"

    def __eq__(self, other):
        return (isinstance(other, ScalingFunction) and self.kind == other.kind
                and self.param == other.param and self._explicit == other._explicit
                and self.tail_rule == other.tail_rule)

    def __hash__(self):
        return hash((self.kind, self.param, tuple(self._explicit or ()), self.tail_rule))

    def _extend(self, n: int):
        c = self._cache
        while len(c) <= n:
            i = len(c)
            if self.kind == "geometric":
                c.append(1.0 if i == 0 else c[-1] * self.param)
            elif self.kind == "polynomial":
                c.append((i + 1.0) ** (-self.param))
            else:
                ex = self._explicit
                if i < len(ex):
                    c.append(ex[i])
                else:
                    kind, p = self.tail_rule
                    last = len(ex) - 1
                    if kind == "geometric":
                        c.append(c[-1] * p)
                    else:
                        c.append(ex[last] * ((i + 1.0) / (last + 1.0)) ** (-p))

    def __call__(self, n: int) -> float:
        n = int(n)
        if n < 0:
            raise ValueError("scaling function is defined on naturals")
        self._extend(n)
        return self._cache[n]

    def values(self, n: int) -> np.ndarray:
        """``f(0), ..., f(n-1)`` as an array."""
        self._extend(max(n - 1, 0))
        return np.array(self._cache[:n], dtype=np.float64)

    def weight_table(self, n: int) -> np.ndarray:
        """Edge weights by level: ``w[m] = f(max(m, 1))``."""
        v = self.values(max(n, 2))
        w = v.copy()
        w[0] = v[1]
        return w[:max(n, 1)] if n >= 1 else w[:1]

    @property
    def slowness(self) -> float:
        """Supremum of ``f(n)/f(n+1)``; ``f`` is lambda-slow for any larger lambda."""
        if self.kind == "geometric":
            return 1.0 / self.param
        if self.kind == "polynomial":
            return 2.0 ** self.param
        vals = self.values(len(self._explicit) + 1)
        ratios = vals[:-1] / vals[1:]
        kind, p = self.tail_rule
        tail = 1.0 / p if kind == "geometric" else 1.0
        return float(max(ratios.max(), tail))

    def tail_bound(self, R: int) -> float:
        """Upper bound for ``sum_{n >= R} f(n)``; ``inf`` when the tail diverges."""
        R = int(R)
        if self.kind == "table" and R < len(self._explicit):
            head = sum(self._explicit[R:])
            return head + self.tail_bound_from(len(self._explicit))
        return self.tail_bound_from(R)

    def tail_bound_from(self, R: int) -> float:
        if self.kind == "table":
            kind, p = self.tail_rule
        else:
            kind, p = self.kind, self.param
        if kind == "geometric":
            if p >= 1.0:
                return math.inf
            return self(R) / (1.0 - p)
        if p <= 1.0:
            return math.inf
        # f(n) = C (n+1)^-p; sum_{n>=R} <= f(R) + integral_{R+1}^inf
        c = self(R) * (R + 1.0) ** p
        return self(R) + c * (R + 1.0) ** (1.0 - p) / (p - 1.0)


def parse_scaling(text: str) -> ScalingFunction:
    """Parse ``geometric 0.5`` or ``polynomial 2``."""
    parts = text.split()
    if len(parts) != 2 or parts[0] not in ("geometric", "polynomial"):
        raise ValueError(f"expected 'geometric MU' or 'polynomial K', got {text!r}")
    try:
        val = float(parts[1])
    except ValueError:
        raise ValueError(f"bad numeric parameter in {text!r}") from None
    if parts[0] == "geometric":
        return ScalingFunction.geometric(val)
    return ScalingFunction.polynomial(val)


@dataclass
class AdmissibilityReport:
    passed: bool
    failed_condition: int | None = None  # 1: ratio bounds, 2: tail
    first_violation: int | None = None
    ratio: float | None = None
    tail: float = 0.0

    def __bool__(self):
        return self.passed


def check_admissible(f: ScalingFunction, lam: float, horizon: int = 64,
                     start: int = 0) -> AdmissibilityReport:
    """Check ``1 < f(n)/f(n+1) < lam`` for ``start <= n < horizon`` and a finite tail."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    vals = f.values(horizon + 1)
    if np.any(vals <= 0):
        raise ValueError("scaling function has nonpositive values")
    for n in range(start, horizon):
        q = vals[n] / vals[n + 1]
        if not (1.0 < q < lam):
            return AdmissibilityReport(False, 1, n, float(q))
    tail = f.tail_bound(horizon)
    if not math.isfinite(tail):
        return AdmissibilityReport(False, 2, horizon, None, tail)
    return AdmissibilityReport(True, tail=tail)


@dataclass
class Condition3Report:
    passed: bool
    first_violation: int | None = None
    max_ratio: float = 0.0
    analytic_sup: float | None = None

    def __bool__(self):
        return self.passed


def check_condition3(f: ScalingFunction, kappa: float, horizon: int = 64) -> Condition3Report:
    """Check ``f(n)/f(2n) <= kappa`` for ``1 <= n <= horizon``."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    vals = f.values(2 * horizon + 1)
    worst = 0.0
    first = None
    for n in range(1, horizon + 1):
        q = vals[n] / vals[2 * n]
        worst = max(worst, q)
        if q > kappa * (1 + 1e-15) and first is None:
            first = n
    sup = 2.0 ** f.param if f.kind == "polynomial" else None
    return Condition3Report(first is None, first, float(worst), sup)


def lambda_threshold(r: int) -> float:
    """Largest lambda below which Floyd geodesics of hop length <= r are graph geodesics."""
    if int(r) != r or r < 1:
        raise ValueError("r must be a positive integer")
    return ((r + 1) / r) ** (1.0 / (2 * r + 1))


# -- weighted graphs ----------------------------------------------------------

def _pad_neighbors(n: int, edges) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise ValueError("edge endpoint out of range")
    edges = edges[edges[:, 0] != edges[:, 1]]
    both = np.concatenate([edges, edges[:, ::-1]]) if edges.size else edges
    both = np.unique(both, axis=0) if both.size else both
    deg = np.bincount(both[:, 0], minlength=n) if both.size else np.zeros(n, np.int64)
    width = max(int(deg.max()) if n else 0, 1)
    nb = np.full((n, width), -1, np.int64)
    if both.size:
        start = np.cumsum(deg) - deg
        slot = np.arange(both.shape[0]) - start[both[:, 0]]
        nb[both[:, 0], slot] = both[:, 1]
    return nb


def _bfs(nb: np.ndarray, source: int) -> np.ndarray:
    return _kernels.bfs_hops(nb, int(source), np.iinfo(np.int64).max)


@dataclass(frozen=True)
class FloydDistance:
    value: float
    geodesic: tuple
    certificate: str  # "exact" or "upper-bound"


class FloydWeightedBall:
    """A graph with Floyd edge weights for a fixed basepoint.

    Build with :meth:`from_cayley` (truncated Cayley ball, certificates are
    meaningful) or :meth:`from_edges` (a finite graph taken as the whole
    space, every distance is exact).
    """

    def __init__(self, nb, f: ScalingFunction, basepoint: int = 0,
                 center_levels=None, radius=None, ball=None):
        self.nb = np.ascontiguousarray(nb, dtype=np.int64)
        self.n = self.nb.shape[0]
        if not 0 <= basepoint < self.n:
            raise ValueError("basepoint outside the graph")
        self.f = f
        self.basepoint = int(basepoint)
        self.ball = ball
        self.radius = radius
        lev = _bfs(self.nb, basepoint)
        if np.any(lev < 0):
            raise ValueError("graph is not connected")
        self.levels = lev
        self.wtab = f.weight_table(int(lev.max()) + 2)
        self.center_levels = center_levels
        if radius is not None:
            shift = int(lev[0])  # vertex 0 is the ball center
            # escape leg from level j: sum over crossing levels j..R
            w = f.weight_table(radius + shift + 2)
            terms = w[np.arange(radius + 1) + shift]
            self._escape_leg = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
        else:
            self._escape_leg = None

    @classmethod
    def from_cayley(cls, ball: CayleyBall, f: ScalingFunction, basepoint: int = 0):
        return cls(ball.neighbors, f, basepoint, center_levels=ball.length,
                   radius=ball.radius, ball=ball)

    @classmethod
    def from_edges(cls, n: int, edges, f: ScalingFunction, basepoint: int = 0):
        return cls(_pad_neighbors(n, edges), f, basepoint)

    def with_basepoint(self, basepoint: int) -> "FloydWeightedBall":
        return FloydWeightedBall(self.nb, self.f, basepoint, self.center_levels,
                                 self.radius, self.ball)

    def _check(self, *vs):
        for v in vs:
            if not (0 <= int(v) < self.n):
                raise ValueError(f"vertex {v} is outside the ball")

    def edge_weight(self, u: int, v: int) -> float:
        return float(self.wtab[min(self.levels[u], self.levels[v])])

    def adjacent(self, u: int, v: int) -> bool:
        return bool(np.any(self.nb[u] == v)) and u != v

    def escape_cost(self, x: int, y: int) -> float:
        """Lower bound on the Floyd length of any path from x to y leaving the ball."""
        if self._escape_leg is None:
            return math.inf
        cl = self.center_levels
        return float(self._escape_leg[cl[x]] + self._escape_leg[cl[y]])

    def certificate(self, x: int, y: int, value: float) -> str:
        return "exact" if value < self.escape_cost(x, y) - TOL else "upper-bound"

    def distances_from(self, x: int, cutoff: float = math.inf, stop_at: int = -1):
        """Floyd distances from ``x`` (``inf`` beyond ``cutoff`` / unsettled)."""
        self._check(x)
        dist, order, nset = _kernels.dijkstra(self.nb, self.levels, self.wtab, int(x),
                                              int(stop_at), float(cutoff))
        return dist, order[:nset]

    def tight_mask(self, dist: np.ndarray, target: int) -> np.ndarray:
        """Vertices on some shortest path from the source of ``dist`` to ``target``."""
        return _kernels.tight_region(self.nb, self.levels, self.wtab, dist, int(target), 1e-12)

    def edges(self) -> np.ndarray:
        u = np.repeat(np.arange(self.n), self.nb.shape[1])
        v = self.nb.ravel()
        keep = v > u
        return np.stack([u[keep], v[keep]], axis=1)


def floyd_length(ball: FloydWeightedBall, path) -> float:
    path = [int(p) for p in path]
    ball._check(*path)
    total = 0.0
    for a, b in zip(path, path[1:]):
        if not ball.adjacent(a, b):
            raise ValueError(f"vertices {a} and {b} are not adjacent")
        total += ball.edge_weight(a, b)
    return total


def floyd_distance(ball: FloydWeightedBall, x: int, y: int) -> FloydDistance:
    """Floyd distance, lexicographically least geodesic and truncation certificate."""
    x, y = int(x), int(y)
    ball._check(x, y)
    if x == y:
        return FloydDistance(0.0, (), "exact")
    dx, _ = ball.distances_from(x, stop_at=y)
    D = float(dx[y])
    dy, _ = ball.distances_from(y, stop_at=x)
    path = [x]
    cur = x
    tol = 1e-12
    while cur != y:
        best = -1
        lc = ball.levels[cur]
        for u in sorted(int(u) for u in ball.nb[cur] if u >= 0):
            w = ball.wtab[min(lc, ball.levels[u])]
            if abs(dx[cur] + w - dx[u]) <= tol and abs(dx[u] + dy[u] - D) <= tol:
                best = u
                break
        if best < 0:  # pragma: no cover - numerical safety net
            raise RuntimeError("failed to trace a geodesic")
        path.append(best)
        cur = best
    return FloydDistance(D, tuple(path), ball.certificate(x, y, D))


def distance_rows_csv(rows) -> str:
    """Render ``(x, y, value, certificate)`` rows as CSV text with a header."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "value", "certificate"])
    for x, y, val, cert in rows:
        w.writerow([x, y, f"{val:.12g}", cert])
    return buf.getvalue()


@dataclass
class BilipschitzReport:
    factor: float
    scored: int
    violations: int
    worst_ratio: float
    worst_pair: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


def bilipschitz_check(ball: FloydWeightedBall, v1: int, v2: int, pairs) -> BilipschitzReport:
    """Check ``delta_v1 <= lam^d(v1,v2) * delta_v2`` on pairs certified under both."""
    b1 = ball.with_basepoint(v1)
    b2 = ball.with_basepoint(v2)
    d12 = int(b1.levels[v2])
    factor = ball.f.slowness ** d12
    pairs = [(int(x), int(y)) for x, y in pairs]
    # distances above the escape cost can never be certified, so Dijkstra
    # only needs to run up to the largest escape cost among each x's partners
    reach: dict[int, float] = {}
    for x, y in pairs:
        reach[x] = max(reach.get(x, 0.0), b1.escape_cost(x, y), b2.escape_cost(x, y))
    cache1, cache2 = {}, {}
    scored = bad = 0
    worst, worst_pair = 0.0, None
    for x, y in pairs:
        if x not in cache1:
            cut = reach[x] + 1e-9
            cache1[x] = b1.distances_from(x, cutoff=cut)[0]
            cache2[x] = b2.distances_from(x, cutoff=cut)[0]
        d1 = float(cache1[x][y])
        d2 = float(cache2[x][y])
        if b1.certificate(x, y, d1) != "exact" or b2.certificate(x, y, d2) != "exact":
            continue
        scored += 1
        if d2 > 0:
            ratio = d1 / d2
            if ratio > worst:
                worst, worst_pair = ratio, (x, y)
        if d1 > factor * d2 * (1 + 1e-12) + TOL:
            bad += 1
    return BilipschitzReport(factor, scored, bad, worst, worst_pair)


@dataclass
class KarlssonResult:
    radius: int
    witness: tuple | None
    witness_length: float
    lengths: list = field(default_factory=list)
    min_levels: list = field(default_factory=list)


def karlsson_sweep(ball: FloydWeightedBall, c: float, eps: float, curves) -> KarlssonResult:
    """Least R such that every sampled c-quasigeodesic avoiding B(v, R) is eps-short."""
    from .curves import is_quasigeodesic

    if eps <= 0:
        raise ValueError("eps must be positive")
    lengths, minlev, kept = [], [], []
    dist_of = _graph_metric(ball)
    for idx, curve in enumerate(curves):
        curve = tuple(int(v) for v in curve)
        res = is_quasigeodesic(curve, c, dist_of)
        if not res.ok:
            raise ValueError(f"curve {idx} is not a {c}-quasigeodesic: pair {res.violation}")
        lengths.append(floyd_length(ball, curve) if len(curve) > 1 else 0.0)
        minlev.append(int(ball.levels[list(curve)].min()))
        kept.append(curve)
    # a curve of length >= eps with closest approach m forces R* >= m
    R = max([m for L, m in zip(lengths, minlev) if L >= eps], default=0)
    witness, wlen = None, 0.0
    if R > 0:
        for L, m, cv in zip(lengths, minlev, kept):
            if m >= R and L > wlen:
                witness, wlen = cv, L
    return KarlssonResult(R, witness, wlen, lengths, minlev)


def _graph_metric(ball: FloydWeightedBall):
    cache = {}

    def dist(u, v):
        if u not in cache:
            cache[u] = _bfs(ball.nb, u)
        return int(cache[u][v])

    return dist


class Partition:
    """Disjoint classes of vertices; unlisted vertices are singletons."""

    def __init__(self, classes):
        seen = set()
        self.classes = []
        for cl in classes:
            cl = tuple(sorted(set(int(v) for v in cl)))
            if seen.intersection(cl):
                raise ValueError("partition classes overlap")
            seen.update(cl)
            if cl:
                self.classes.append(cl)

    def label_array(self, n: int) -> np.ndarray:
        lab = np.arange(n, dtype=np.int64)
        for cl in self.classes:
            lab[list(cl)] = cl[0]
        return lab


def shortcut_distance(ball: FloydWeightedBall, omega: Partition, x: int, y: int) -> float:
    """Floyd distance after collapsing each class of ``omega`` to a point."""
    ball._check(x, y)
    lab = omega.label_array(ball.n)
    if lab[x] == lab[y]:
        return 0.0
    _, comp = np.unique(lab, return_inverse=True)
    e = ball.edges()
    w = ball.wtab[np.minimum(ball.levels[e[:, 0]], ball.levels[e[:, 1]])]
    a, b = comp[e[:, 0]], comp[e[:, 1]]
    keep = a != b
    a, b, w = a[keep], b[keep], w[keep]
    k = int(comp.max()) + 1
    # keep the cheapest parallel edge: csr_matrix would add duplicates
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    order = np.lexsort((w, hi, lo))
    lo, hi, w = lo[order], hi[order], w[order]
    first = np.ones(lo.size, bool)
    first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    lo, hi, w = lo[first], hi[first], w[first]
    g = sparse.csr_matrix((w, (lo, hi)), shape=(k, k))
    d = csgraph.dijkstra(g, directed=False, indices=int(comp[x]))
    return float(d[comp[y]])
