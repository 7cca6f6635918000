"""Brute-force oracle suites.

Each suite compares a fast routine against an exhaustive computation on
small instances and returns an :class:`OracleResult`.  Suites are seeded
and deterministic.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..entourage import Circle, Entourage, is_linked
from ..entourage.entourage import (shadow_by_intersection, shadow_by_union, small_shadow_family)
from ..floyd import (FloydWeightedBall, ScalingFunction, bilipschitz_check, floyd_distance,
                     lambda_threshold)
from ..groups import GroupSpec, cayley_ball, normal_form

__all__ = ["OracleResult", "SUITES", "run_suite", "floyd_simple_paths", "metric_axioms",
           "certificate_soundness", "linkedness_partitions", "shadow_identity",
           "threshold_formula", "ordering_triples", "nonrefinable_tubes"]

TOL = 1e-12


@dataclass
class OracleResult:
    name: str
    checked: int
    failures: int
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.checked > 0

    def line(self) -> str:
        extra = " ".join(f"{k}={v}" for k, v in self.detail.items())
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: checked={self.checked} failures={self.failures} {extra}".rstrip()


# -- graph helpers ----------------------------------------------------------------

def _levels(adj: list[list[int]], base: int) -> list[int]:
    lev = [-1] * len(adj)
    lev[base] = 0
    q = deque([base])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if lev[v] < 0:
                lev[v] = lev[u] + 1
                q.append(v)
    return lev


def _min_simple_path(adj, weight, x: int, y: int) -> float:
    """Minimum weight over all simple paths, by exhaustive depth-first search."""
    best = math.inf
    on = [False] * len(adj)

    def go(u, acc):
        nonlocal best
        if u == y:
            best = min(best, acc)
            return
        on[u] = True
        for v in adj[u]:
            if not on[v]:
                go(v, acc + weight(u, v))
        on[u] = False

    go(x, 0.0)
    return best


def _random_subgraph(nb: np.ndarray, size: int, rng):
    """Connected induced subgraph grown from a random vertex."""
    n = nb.shape[0]
    seed = int(rng.integers(n))
    nodes = [seed]
    inside = {seed}
    frontier = [seed]
    while len(nodes) < size and frontier:
        u = frontier[int(rng.integers(len(frontier)))]
        cand = [int(v) for v in nb[u] if v >= 0 and int(v) not in inside]
        if not cand:
            frontier.remove(u)
            continue
        v = cand[int(rng.integers(len(cand)))]
        inside.add(v)
        nodes.append(v)
        frontier.append(v)
    nodes.sort()
    pos = {v: i for i, v in enumerate(nodes)}
    edges = sorted({(min(pos[u], pos[int(v)]), max(pos[u], pos[int(v)]))
                    for u in nodes for v in nb[u] if v >= 0 and int(v) in pos})
    return len(nodes), edges


# -- suites -------------------------------------------------------------------------

def threshold_formula() -> OracleResult:
    """Closed forms of the geodesic threshold at r = 1, 2."""
    want = {1: 2 ** (1 / 3), 2: 1.5 ** (1 / 5)}
    bad = sum(abs(lambda_threshold(r) - v) > 1e-9 for r, v in want.items())
    return OracleResult("threshold_formula", len(want), bad,
                        {f"r{r}": f"{lambda_threshold(r):.12g}" for r in want})


def floyd_simple_paths(instances: int = 50, size: int = 9, seed: int = 0) -> OracleResult:
    """Floyd distance versus minimization over all simple paths on small graphs."""
    rng = np.random.default_rng(seed)
    ball = cayley_ball(GroupSpec("Z^2, Z"), 4)
    fs = [ScalingFunction.geometric(0.5), ScalingFunction.polynomial(2)]
    checked = bad = 0
    worst = 0.0
    for t in range(instances):
        n, edges = _random_subgraph(ball.neighbors, size, rng)
        f = fs[t % 2]
        base = int(rng.integers(n))
        fb = FloydWeightedBall.from_edges(n, edges, f, base)
        adj = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        lev = _levels(adj, base)

        def w(u, v):
            return f(max(min(lev[u], lev[v]), 1))

        for x, y in itertools.combinations(range(n), 2):
            want = _min_simple_path(adj, w, x, y)
            got = floyd_distance(fb, x, y).value
            err = abs(got - want)
            worst = max(worst, err)
            checked += 1
            bad += err > TOL
    return OracleResult("floyd_simple_paths", checked, bad, {"instances": instances,
                                                             "max_error": f"{worst:.3g}"})


def metric_axioms(triples: int = 1000, pairs: int = 1000, seed: int = 0) -> OracleResult:
    """Identity, symmetry and triangle inequality, plus the basepoint-change bound."""
    rng = np.random.default_rng(seed)
    spec = GroupSpec("Z^2, Z")
    ball = cayley_ball(spec, 6)
    checked = bad = 0
    for f in (ScalingFunction.geometric(0.5), ScalingFunction.polynomial(2)):
        fb = FloydWeightedBall.from_cayley(ball, f)
        xs = [int(x) for x in rng.choice(ball.n, 30, replace=False)]
        rows = {x: fb.distances_from(x)[0] for x in xs}
        for _ in range(triples):
            x, y, z = (xs[int(i)] for i in rng.integers(0, len(xs), 3))
            checked += 1
            ok = rows[x][x] == 0 and abs(rows[x][y] - rows[y][x]) <= TOL
            ok &= rows[x][z] <= rows[x][y] + rows[y][z] + TOL
            ok &= x == y or rows[x][y] > 0
            bad += not ok
    big = cayley_ball(spec, 7)
    fb = FloydWeightedBall.from_cayley(big, ScalingFunction.geometric(0.5))
    v2 = big.index(normal_form(spec, "c"))
    inner = np.flatnonzero(big.length <= 5)
    # keep drawing local pairs until each direction has ``pairs`` certified scores
    scored = {(0, v2): 0, (v2, 0): 0}
    while min(scored.values()) < pairs:
        sample = []
        while len(sample) < pairs:
            x = int(inner[rng.integers(inner.size)])
            y = x
            for _ in range(int(rng.integers(1, 4))):
                row = big.neighbors[y][big.neighbors[y] >= 0]
                y = int(row[rng.integers(row.size)])
            if y != x:
                sample.append((x, y))
        for a, b in scored:
            rep = bilipschitz_check(fb, a, b, sample)
            checked += rep.scored
            scored[(a, b)] += rep.scored
            bad += rep.violations
    return OracleResult("metric_axioms", checked, bad, {"triples": 2 * triples,
                                                        "bilipschitz_scored": min(scored.values())})


def certificate_soundness(queries: int = 500, seed: int = 0) -> OracleResult:
    """Exact-certified distances do not change when the ball grows by 3."""
    rng = np.random.default_rng(seed)
    spec = GroupSpec("Z^2, Z")
    small, big = cayley_ball(spec, 5), cayley_ball(spec, 8)
    checked = bad = tried = 0
    fs = [ScalingFunction.geometric(0.5), ScalingFunction.polynomial(2)]
    inner = np.flatnonzero(small.length <= 5)
    while checked < queries and tried < 50 * queries:
        tried += 1
        f = fs[tried % 2]
        x = int(inner[rng.integers(inner.size)])
        y = x
        for _ in range(int(rng.integers(1, 5))):
            row = small.neighbors[y][small.neighbors[y] >= 0]
            y = int(row[rng.integers(row.size)])
        if x == y:
            continue
        d = floyd_distance(FloydWeightedBall.from_cayley(small, f), x, y)
        if d.certificate != "exact":
            continue
        # the same group elements in the larger ball
        bx, by = big.index(small.element(x)), big.index(small.element(y))
        d2 = floyd_distance(FloydWeightedBall.from_cayley(big, f), bx, by).value
        checked += 1
        bad += abs(d2 - d.value) > TOL
    return OracleResult("certificate_soundness", checked, bad, {"attempts": tried})


def _random_relation(rng, N, density):
    R = np.triu(rng.random((N, N)) < density, 1)
    R = R | R.T
    np.fill_diagonal(R, True)
    return R


def _subsets(N):
    codes = np.arange(1 << N, dtype=np.int64)
    return ((codes[:, None] >> np.arange(N)) & 1).astype(bool)


def _small(rel, subs):
    i, j = np.nonzero(np.triu(~rel, 1))
    bad = np.zeros(subs.shape[0], bool)
    for a, b in zip(i, j):
        bad |= subs[:, a] & subs[:, b]
    return ~bad


def linkedness_partitions(instances: int = 200, seed: int = 0) -> OracleResult:
    """2-SAT linkedness versus all 2^N partitions for N <= 16."""
    rng = np.random.default_rng(seed)
    bad = 0
    both = set()
    for _ in range(instances):
        N = int(rng.integers(6, 17))
        ra = _random_relation(rng, N, rng.uniform(0.6, 0.95))
        rb = _random_relation(rng, N, rng.uniform(0.6, 0.95))
        subs = _subsets(N)
        want = not bool(np.any(_small(ra, subs) & _small(rb, ~subs)))
        got = is_linked(Entourage.explicit(ra), Entourage.explicit(rb), method="twosat")
        bad += got != want
        both.add(want)
    return OracleResult("linkedness_partitions", instances, bad,
                        {"linked_and_unlinked_seen": len(both) == 2})


def shadow_identity(geometric: int = 100, explicit: int = 50, seed: int = 0) -> OracleResult:
    """The two shadow formulas agree; 2-SAT shadows match exhaustive search for N <= 14."""
    rng = np.random.default_rng(seed)
    C = Circle(128)
    bad = done = 0
    while done < geometric:
        c1, c2 = (0.95 * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random())
                  for _ in range(2))
        a = Entourage.geometric(C, complex(c1), 2.0, strict=False)
        b = Entourage.geometric(C, complex(c2), 2.0, strict=False)
        if not (a.satisfies_convention() and b.satisfies_convention()):
            continue
        if is_linked(a, b, method="arc"):
            continue
        s = shadow_by_union(a, b, method="arc")
        ok = np.array_equal(s, shadow_by_intersection(a, b, method="arc"))
        ok &= np.array_equal(s, shadow_by_union(a, b, method="twosat"))
        ok &= np.array_equal(s, shadow_by_intersection(a, b, method="twosat"))
        bad += not ok
        done += 1
    ex = 0
    while ex < explicit:
        N = int(rng.integers(6, 15))
        ra = _random_relation(rng, N, rng.uniform(0.7, 0.95))
        rb = _random_relation(rng, N, rng.uniform(0.7, 0.95))
        a, b = Entourage.explicit(ra), Entourage.explicit(rb)
        if is_linked(a, b):
            continue
        subs = _subsets(N)
        ok_sets = _small(ra, subs) & _small(rb, ~subs)
        want = subs[ok_sets].all(axis=0)
        ok = np.array_equal(shadow_by_intersection(a, b), want)
        ok &= np.array_equal(np.all(small_shadow_family(a, b), axis=0), want)
        bad += not ok
        ex += 1
    return OracleResult("shadow_identity", done + ex, bad, {"geometric": done, "explicit": ex})


def ordering_triples(L: int = 5, N: int = 512, k: int = 4, triples: int = 10_000,
                     points: int = 10, seed: int = 0) -> OracleResult:
    """Exclusive ordering, convexity and separator transitivity on an orbit system.

    Each sampled triple ``(a, b, c)`` with ``b, c`` unlinked must satisfy at
    most one of ``a-b-c``, ``b-a-c``, ``a-c-b``; when ``a-b-c`` holds, every
    member linked to both ``a`` and ``c`` is linked to ``b``.  For random
    circle points ``p`` the separator relation must be transitive.
    """
    from ..entourage.system import moebius_orbit

    S = moebius_orbit(L=L, circle=N)
    lk = S.linked
    rng = np.random.default_rng(seed)
    done = related = bad = 0
    witness = None
    while done < triples:
        b, c = (int(x) for x in rng.choice(S.M, 2, replace=False))
        if lk[b, c]:
            continue
        # mix members known to lie between b and c with uniform ones
        pos = np.flatnonzero(S.between_many(np.arange(S.M), b, c, k))
        picks = [int(x) for x in rng.choice(pos, min(3, pos.size), replace=False)]
        picks += [int(x) for x in rng.integers(0, S.M, 2)]
        for a in picks:
            if a in (b, c) or done >= triples:
                continue
            rel = [S.is_between(a, b, c, k), S.is_between(b, a, c, k), S.is_between(a, c, b, k)]
            done += 1
            related += any(rel)
            ok = sum(rel) <= 1
            if ok and rel[0]:
                ok = not (lk[a] & lk[c] & ~lk[b]).any()
            if not ok:
                bad += 1
                witness = witness or (a, b, c)
    premises = 0
    for p in rng.integers(0, S.N, points):
        sep = S.separators_of_point(np.arange(S.M), int(p), k).astype(np.int64)
        chain = sep @ sep
        premises += int(chain.sum())
        bad += int(((chain > 0) & (sep == 0)).sum())
    detail = {"related": related, "transitivity_premises": premises}
    if witness:
        detail["witness"] = "%d-%d-%d" % witness
    return OracleResult("ordering_triples", done + premises, bad, detail)


def nonrefinable_tubes(L: int = 5, N: int = 512, k: int = 4, pairs: int = 50,
                       seed: int = 0) -> OracleResult:
    """Tube builder output is a k-tube with no (k+2)-refinable consecutive pair.

    Half of the sampled unlinked pairs are refinable at ``k + 2`` so the
    builder has work to do; it raises if it needs more than ``|A|`` steps.
    """
    from ..entourage.system import moebius_orbit

    S = moebius_orbit(L=L, circle=N)
    rng = np.random.default_rng(seed)
    chosen, deep = [], 0
    while len(chosen) < pairs:
        a, b = (int(x) for x in rng.choice(S.M, 2, replace=False))
        if S.linked[a, b]:
            continue
        refinable = S.refinement_set(a, b, k + 2).size > 0
        if not refinable and len(chosen) - deep >= pairs - pairs // 2:
            continue
        if refinable and deep >= pairs // 2:
            continue
        deep += refinable
        chosen.append((a, b))
    bad, longest = 0, 0
    for a, b in chosen:
        try:
            T = S.build_nonrefinable_tube(a, b, k)
        except RuntimeError:
            bad += 1
            continue
        longest = max(longest, len(T))
        ok = T.members[0] == a and T.members[-1] == b and len(T) <= S.M + 1
        ok &= S.is_tube(T.members, k)
        ok &= all(S.refinement_set(x, y, k + 2).size == 0
                  for x, y in zip(T.members, T.members[1:]))
        bad += not ok
    return OracleResult("nonrefinable_tubes", len(chosen), bad,
                        {"refinable_pairs": deep, "longest_tube": longest, "members": S.M})


SUITES = {
    "threshold_formula": threshold_formula,
    "floyd_simple_paths": floyd_simple_paths,
    "metric_axioms": metric_axioms,
    "certificate_soundness": certificate_soundness,
    "linkedness_partitions": linkedness_partitions,
    "shadow_identity": shadow_identity,
    "ordering_triples": ordering_triples,
    "nonrefinable_tubes": nonrefinable_tubes,
}


def run_suite(name: str, seed: int = 0) -> OracleResult:
    if name not in SUITES:
        raise KeyError(f"unknown oracle suite {name!r}; known: {', '.join(SUITES)}")
    fn = SUITES[name]
    if name == "threshold_formula":
        return fn()
    return fn(seed=seed)
