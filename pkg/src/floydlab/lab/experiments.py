"""Empirical estimates of the constants behind Floyd quasiconvexity.

Each experiment returns an :class:`ExperimentReport`.  Randomness comes
only from ``numpy.random.default_rng(seed)`` and every reduction runs in a
fixed order, so a report is a pure function of its arguments.

Cayley-side experiments work on truncated balls of a free product and
score only Floyd distances whose truncation certificate is ``exact``.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .. import _kernels
from ..floyd import (FloydWeightedBall, ScalingFunction, check_admissible, check_condition3,
                     lambda_threshold, TOL)
from ..groups import CayleyBall, GroupElement, GroupSpec, normal_form, word_distance
from .curves import Coset, classify_horospherical, is_tight, distance_matrix
from .report import ExperimentReport

__all__ = [
    "ball", "experiment_fwgeod", "experiment_theoremC", "experiment_injectivity_bound",
    "overlap_survey", "experiment_graph_quasiconvexity", "experiment_theoremB",
    "flat_detour_curves",
]

INF = np.inf


@lru_cache(maxsize=6)
def ball(spec_text: str, R: int) -> CayleyBall:
    """Cached Cayley ball; ``spec_text`` is a factor list such as ``"Z^2, Z"``."""
    return CayleyBall(GroupSpec(spec_text), R)


def _subgroup_pool(B: CayleyBall, factor: int, radius: int, coset: GroupElement | None = None):
    """Ball indices of ``coset * h`` for ``h`` in the factor with ``|h| <= radius``."""
    hs = [int(i) for i in np.flatnonzero(B.in_factor(factor)) if B.length[i] <= radius]
    if coset is None:
        return hs
    return [B.index(coset * B.element(i)) for i in hs]


def _sample_pairs(items: Sequence[int], count: int, rng) -> list[tuple[int, int]]:
    pairs = list(itertools.combinations(items, 2))
    if len(pairs) <= count:
        return pairs
    pick = np.sort(rng.choice(len(pairs), size=count, replace=False))
    return [pairs[i] for i in pick]


def _lam_scaling(lam: float) -> ScalingFunction:
    return ScalingFunction.geometric(1.0 / lam)


# -- geodesic threshold ---------------------------------------------------------

def experiment_fwgeod(groups: Sequence[str] = ("Z, Z", "Z^2, Z"), rs: Sequence[int] = (1, 2, 3),
                      lams: Sequence[float] = (1.02, 1.04, 1.06, 1.08, 1.1, 1.15, 1.2, 1.25,
                                               1.3, 1.4, 1.5, 2.0, 3.0),
                      seed: int = 0) -> ExperimentReport:
    """Are Floyd geodesics between vertices at distance <= r graph geodesics?

    Exhaustive over every source of the radius-(r+4) ball and every target
    within r hops; weights are geometric with ratio ``1/lam``.
    """
    rep = ExperimentReport("fwgeod", {"groups": list(groups), "r": list(rs), "lambda": list(lams)},
                           seed)
    ok = True
    for g in groups:
        for r in rs:
            B = ball(g, r + 4)
            thr = lambda_threshold(r)
            first_bad = None
            for lam in lams:
                fb = FloydWeightedBall.from_cayley(B, _lam_scaling(lam))
                checked, bad, wit = _kernels.fwgeod_scan(fb.nb, fb.levels, fb.wtab, int(r), 1e-12,
                                                         np.arange(B.n, dtype=np.int64))
                below = lam <= thr
                rep.rows.append({"group": g, "r": r, "lambda": float(lam), "threshold": thr,
                                 "below_threshold": below, "pairs": int(checked),
                                 "violations": int(bad)})
                if bad and first_bad is None:
                    first_bad = lam
                    s, t = int(wit[0]), int(wit[1])
                    rep.witnesses[f"{g}|r={r}|lambda={lam}"] = (
                        f"{B.element(s)} -> {B.element(t)}: {int(wit[2])} hops, "
                        f"Floyd geodesic with {int(wit[3])} hops")
                if below and bad:
                    ok = False
            rep.constants[f"empirical_threshold[{g}|r={r}]"] = (
                float(first_bad) if first_bad is not None else math.inf)
            rep.constants[f"lambda_threshold[r={r}]"] = thr
    rep.checks["no violations at or below lambda_threshold(r)"] = ok
    return rep


# -- Floyd quasiconvexity of a parabolic subgroup ---------------------------------

def _certified_rows(fb: FloydWeightedBall, pairs, upper=None):
    """Yield ``(x, y, value, exact, dist_from_x)`` grouping Dijkstra runs by source."""
    by_src: dict[int, list[int]] = {}
    for x, y in pairs:
        by_src.setdefault(x, []).append(y)
    for x in sorted(by_src):
        ys = by_src[x]
        cut = 0.0
        for y in ys:
            e = fb.escape_cost(x, y)
            if upper is not None:
                e = min(e, upper(x, y))
            cut = max(cut, e)
        dist, _ = fb.distances_from(x, cutoff=cut + 1e-9)
        for y in ys:
            v = float(dist[y])
            exact = v < fb.escape_cost(x, y) - TOL
            yield x, y, v, exact, dist


def _flat_upper(fb: FloydWeightedBall, B: CayleyBall, factor: int):
    """Floyd length of a staircase path inside the factor: an upper bound for H-pairs."""
    def upper(x, y):
        gx, gy = B.element(x), B.element(y)
        path = [x]
        cur = gx
        for tok in (gx.inverse() * gy).word():
            cur = cur * normal_form(B.spec, [tok])
            path.append(B.index(cur))
        return sum(fb.edge_weight(a, b) for a, b in zip(path, path[1:]))
    return upper


def experiment_theoremC(group: str = "Z^2, Z", factor: int = 0,
                        lams: Sequence[float] = (1.02, 1.05, 1.1, 1.2, 1.5),
                        radii: Sequence[int] = (8, 10), pool_radius: int = 3,
                        samples: int = 200, seed: int = 0) -> ExperimentReport:
    """Largest distance to the subgroup from a Floyd geodesic between subgroup elements.

    For each certified pair the union of all Floyd geodesics (the tight
    region) is scanned; ``R(H)`` is the maximum of the graph distance to
    ``H`` over it.
    """
    rep = ExperimentReport("theoremC", {"group": group, "factor": factor, "lambda": list(lams),
                                        "radii": list(radii), "pool_radius": pool_radius,
                                        "samples": samples}, seed)
    table = {}
    for R in radii:
        B = ball(group, R)
        dH = B.parabolic_distances(factor)
        pool = _subgroup_pool(B, factor, pool_radius)
        pairs = _sample_pairs(pool, samples, np.random.default_rng(seed))
        for lam in lams:
            fb = FloydWeightedBall.from_cayley(B, _lam_scaling(lam))
            worst, skipped, wit = -1, 0, None
            for x, y, v, exact, dist in _certified_rows(fb, pairs, _flat_upper(fb, B, factor)):
                if not exact:
                    skipped += 1
                    continue
                region = np.flatnonzero(fb.tight_mask(dist, y))
                far = int(dH[region].max())
                if far > worst:
                    worst, wit = far, (x, y, int(region[np.argmax(dH[region])]))
            worst = max(worst, 0)
            rate = skipped / len(pairs) if pairs else 0.0
            table[(R, lam)] = (worst, rate)
            rep.rows.append({"radius": R, "lambda": float(lam), "pairs": len(pairs),
                             "skipped": skipped, "skip_rate": rate, "R_H": worst})
            if wit is not None:
                x, y, v = wit
                rep.witnesses[f"radius={R}|lambda={lam}"] = (
                    f"{B.element(x)} -> {B.element(y)} passes {B.element(v)}")
    top = max(radii)
    band = []
    for lam in lams:
        same = len({table[(R, lam)][0] for R in radii}) == 1
        rep.stability.append({"lambda": float(lam), "stable": same,
                              **{f"R_H@{R}": table[(R, lam)][0] for R in radii},
                              f"skip_rate@{top}": table[(top, lam)][1]})
        if same and table[(top, lam)][1] < 0.2:
            band.append(lam)
        else:
            break
    rep.constants["stable_prefix_length"] = len(band)
    rep.constants["lambda_band_top"] = float(band[-1]) if band else math.nan
    if band:
        rep.constants["R_H"] = max(table[(top, lam)][0] for lam in band)
    rep.checks["nonempty radius-stable lambda prefix with skip rate < 0.2"] = bool(band)
    return rep


def experiment_injectivity_bound(group: str = "Z^2, Z", factor: int = 0,
                                 f: ScalingFunction | None = None, kappa: float = 4.0,
                                 lam: float = 4.5, radii: Sequence[int] = (8, 10),
                                 samples: int = 200, seed: int = 0,
                                 level_range: tuple = (3, 5), hop: int = 2) -> ExperimentReport:
    """Best constant ``c*`` with ``delta_G >= c* delta_H`` on subgroup pairs.

    Pairs ``(x, x h)`` with ``x`` in the subgroup at word length in
    ``level_range`` and ``1 <= |h| <= hop``; these are the pairs the
    truncation certificate can settle.  Only pairs certified ``exact`` in
    both the group ball and the subgroup ball at every radius are scored.
    """
    f = f if f is not None else ScalingFunction.polynomial(2)
    rep = ExperimentReport("injectivity", {"group": group, "factor": factor, "f": f.describe(),
                                           "kappa": kappa, "lambda": lam, "radii": list(radii),
                                           "samples": samples, "level_range": list(level_range),
                                           "hop": hop}, seed)
    adm = check_admissible(f, lam)
    c3 = check_condition3(f, kappa)
    rep.checks["f admissible"] = bool(adm)
    rep.checks["f(n) / f(2n) <= kappa"] = bool(c3)
    spec = GroupSpec(group)
    sub = spec.factors[factor]
    sub_text = "Z^%d" % sub.rank
    lo, hi = level_range
    # candidate pairs as subgroup elements, fixed before any ball is built
    Bs = ball(sub_text, hi + hop)
    xs = [i for i in range(Bs.n) if lo <= Bs.length[i] <= hi]
    hs = [i for i in range(1, Bs.n) if Bs.length[i] <= hop]
    cand = [(x, h) for x in xs for h in hs]
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(len(cand), size=min(samples, len(cand)), replace=False))
    emb = lambda s: spec.element([(factor, s.syllables[0][1])]) if s.syllables else spec.identity()
    pairs = []
    for k in pick:
        x, h = cand[k]
        gx = Bs.element(x)
        gy = gx * Bs.element(h)
        pairs.append((gx, gy))
    vals = {}
    for R in radii:
        BG, BH = ball(group, R), ball(sub_text, R)
        fG, fH = FloydWeightedBall.from_cayley(BG, f), FloydWeightedBall.from_cayley(BH, f)
        idxG = [(BG.index(emb(a)), BG.index(emb(b))) for a, b in pairs]
        idxH = [(BH.index(a), BH.index(b)) for a, b in pairs]
        rG = {(x, y): (v, e) for x, y, v, e, _ in _certified_rows(fG, idxG)}
        rH = {(x, y): (v, e) for x, y, v, e, _ in _certified_rows(fH, idxH)}
        vals[R] = [(rG[g], rH[h]) for g, h in zip(idxG, idxH)]
    scored, worst, wit, dominated = 0, math.inf, None, True
    ratios = {R: math.inf for R in radii}
    for i, (a, b) in enumerate(pairs):
        entries = [vals[R][i] for R in radii]
        if not all(g[1] and h[1] for g, h in entries):
            continue
        scored += 1
        for R, (g, h) in zip(radii, entries):
            if g[0] > h[0] + TOL:
                dominated = False
            ratios[R] = min(ratios[R], g[0] / h[0])
        r = entries[-1][0][0] / entries[-1][1][0]
        if r < worst:
            worst, wit = r, (a, b)
        rep.rows.append({"x": str(a), "y": str(b),
                         **{f"delta_G@{R}": vals[R][i][0][0] for R in radii},
                         **{f"delta_H@{R}": vals[R][i][1][0] for R in radii}})
    for R in radii:
        rep.stability.append({"radius": R, "c_star": ratios[R], "scored": scored})
    c_first, c_last = ratios[radii[0]], ratios[radii[-1]]
    rep.constants["c_star"] = c_last
    rep.constants["scored_pairs"] = scored
    rep.constants["relative_change"] = (abs(c_last - c_first) / c_first
                                        if 0 < c_first < math.inf else math.nan)
    if wit:
        rep.witnesses["minimizing pair"] = f"{wit[0]} -> {wit[1]}"
    rep.checks["delta_G <= delta_H"] = dominated
    rep.checks["c_star > 0"] = scored > 0 and c_last > 0
    rep.checks["c_star changes < 10% across radii"] = (
        scored > 0 and abs(c_last - c_first) < 0.1 * c_first)
    return rep


# -- horosphere overlaps and graph quasiconvexity ---------------------------------

def _coset_reps(spec: GroupSpec, factor: int, maxlen: int) -> list[GroupElement]:
    """Words ``w != 1`` with no leading or trailing syllable in the factor, ``|w| <= maxlen``.

    Up to the action of the factor (which fixes ``H``) these represent every
    coset ``wH`` at distance at most ``maxlen`` from ``H``.
    """
    B = ball(_spec_text(spec), maxlen)
    out = []
    for i in range(1, B.n):
        g = B.element(i)
        s = g.syllables
        if s[0][0] == factor or s[-1][0] == factor:
            continue
        out.append(g)
    return out


def _spec_text(spec: GroupSpec) -> str:
    return ", ".join(str(f) for f in spec.factors)


def overlap_survey(group: str = "Z^2, Z", factor: int = 0, ds: Sequence[int] = (0, 1, 2),
                   radii: Sequence[int] = (6, 7, 8, 9, 10), seed: int = 0) -> ExperimentReport:
    """``e(d)``: the largest diameter of ``N_d(H) & N_d(gH)`` over cosets ``gH != H``.

    Computed inside each ball; by equivariance one coset is ``H`` itself and
    the other ranges over representatives within ``2d`` of ``H``.
    """
    rep = ExperimentReport("overlap", {"group": group, "factor": factor, "d": list(ds),
                                       "radii": list(radii)}, seed)
    spec = GroupSpec(group)
    per_d = {}
    for d in ds:
        vals = []
        for R in radii:
            B = ball(group, R)
            near = np.flatnonzero(B.parabolic_distances(factor) <= d)
            elems = [B.element(int(i)) for i in near]
            best, wit = 0, None
            for w in _coset_reps(spec, factor, 2 * d):
                cos = Coset.of(w, factor)
                inter = [g for g in elems if cos.distance(g) <= d]
                if len(inter) > 1:
                    D = distance_matrix(inter)
                    diam = int(D.max())
                    if diam > best:
                        best, wit = diam, str(cos)
            vals.append(best)
            rep.rows.append({"d": d, "radius": R, "e": best, "cosets": len(_coset_reps(spec, factor, 2 * d))})
            if wit is not None:
                rep.witnesses[f"d={d}|radius={R}"] = f"H and {wit}"
        per_d[d] = vals
        stable = len(set(vals)) == 1
        rep.stability.append({"d": d, "stable": stable, **{f"e@{R}": v for R, v in zip(radii, vals)}})
        rep.constants[f"e({d})"] = vals[-1]
    es = [per_d[d][-1] for d in sorted(ds)]
    rep.checks["e(d) non-decreasing"] = all(a <= b for a, b in zip(es, es[1:]))
    rep.checks["e(d) stable across radii"] = all(s["stable"] for s in rep.stability)
    if 0 in per_d:
        rep.checks["e(0) = 0"] = per_d[0][-1] == 0
    return rep


def _geodesic_region(B: CayleyBall, x: int, y: int) -> np.ndarray:
    """Vertices on some graph geodesic from ``x`` to ``y`` inside the ball."""
    d = word_distance(B.element(x), B.element(y))
    dx = _kernels.bfs_hops(B.neighbors, int(x), d)
    dy = _kernels.bfs_hops(B.neighbors, int(y), d)
    return np.flatnonzero((dx >= 0) & (dy >= 0) & (dx + dy == d))


def experiment_graph_quasiconvexity(group: str = "Z^2, Z", factor: int = 0,
                                    radii: Sequence[int] = (8, 10), samples: int = 200,
                                    coset: str = "", seed: int = 0) -> ExperimentReport:
    """``M``: farthest excursion from a coset of graph geodesics joining two of its points.

    Endpoints have word length at most ``radius // 3`` relative to the coset
    representative, so every geodesic between them lies inside the ball.
    """
    rep = ExperimentReport("quasiconvexity", {"group": group, "factor": factor,
                                              "radii": list(radii), "samples": samples,
                                              "coset": coset or "1"}, seed)
    spec = GroupSpec(group)
    g = normal_form(spec, coset) if coset else spec.identity()
    vals = []
    r0 = min(radii) // 3 - g.length
    for R in radii:
        B = ball(group, R)
        cos = Coset.of(g, factor)
        pool = _subgroup_pool(B, factor, max(r0, 1), g)
        pairs = _sample_pairs(pool, samples, np.random.default_rng(seed))
        dist_cache = {}
        worst, wit = 0, None
        for x, y in pairs:
            region = _geodesic_region(B, x, y)
            far = 0
            for v in region:
                v = int(v)
                if v not in dist_cache:
                    dist_cache[v] = cos.distance(B.element(v))
                if dist_cache[v] > far:
                    far = dist_cache[v]
            if far > worst or wit is None:
                worst = max(worst, far)
                wit = (x, y)
        vals.append(worst)
        rep.rows.append({"radius": R, "pairs": len(pairs), "M": worst})
        if wit:
            rep.witnesses[f"radius={R}"] = f"{B.element(wit[0])} -> {B.element(wit[1])}"
    rep.stability.append({"stable": len(set(vals)) == 1, **{f"M@{R}": v for R, v in zip(radii, vals)}})
    rep.constants["M"] = vals[-1]
    rep.checks["M stable across radii"] = len(set(vals)) == 1
    return rep


# -- tight curves near geodesics ---------------------------------------------------

def _walk(start: GroupElement, tokens) -> list[GroupElement]:
    out = [start]
    for t in tokens:
        out.append(out[-1] * normal_form(start.spec, [t]))
    return out


def flat_detour_curves(spec: GroupSpec, rng, count: int, max_len: int):
    """Curves ``t^m . U . t^m'`` where ``U`` goes around three sides of a rectangle in ``Z^2``.

    Tails may carry small bumps ``x y X`` through other flats.  Returned as
    ``(tokens, curve)`` with ``len(tokens) <= max_len``.
    """
    a, b, t = _flat_tokens(spec)
    inv = {g.name: _inverse_token(spec, g.name) for g in spec.generators}
    out = []
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        m1, m2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        n, s = int(rng.integers(2, 5)), int(rng.integers(1, 5))
        side = [a, b] if rng.random() < 0.5 else [b, a]
        u = [side[0]] * n + [side[1]] * s + [inv[side[0]]] * n
        if rng.random() < 0.5:
            u = [inv[x] for x in u]
        pre = [t] * m1
        post = [t] * m2
        if rng.random() < 0.5:
            pre = pre[:1] + [a, b, inv[a]] + pre[1:]
        if rng.random() < 0.5:
            post = post[:-1] + [b, a, inv[b]] + post[-1:]
        toks = pre + u + post
        if len(toks) > max_len:
            continue
        out.append((toks, _walk(spec.identity(), toks)))
    return out


def _flat_tokens(spec: GroupSpec):
    """Generator names for the two basis directions of factor 0 and for factor 1."""
    if spec.factors[0].rank != 2 or len(spec.factors) < 2:
        raise ValueError("flat detours need a Z^2 first factor and a second factor")
    one = (1,) + (0,) * (spec.factors[1].rank - 1)
    a = spec.element([(0, (1, 0))]).word()[0]
    b = spec.element([(0, (0, 1))]).word()[0]
    t = spec.element([(1, one)]).word()[0]
    return a, b, t


def _inverse_token(spec: GroupSpec, name: str) -> str:
    g = normal_form(spec, [name]).inverse()
    return g.word()[0]


def experiment_theoremB(group: str = "Z^2, Z", factor: int = 0, radii: Sequence[int] = (8, 10),
                        l: int = 6, c: float = 2.0, d: int = 1, e: int | None = None,
                        samples: int = 200, seed: int = 0) -> ExperimentReport:
    """``w0``: distance from non-horospherical vertices of tight curves to a geodesic.

    Curves come from :func:`flat_detour_curves`; the geodesic joins the
    curve's endpoints.  ``e`` defaults to the overlap bound ``e(d)`` computed
    by :func:`overlap_survey` at the smallest radius.
    """
    spec = GroupSpec(group)
    if e is None:
        e = int(overlap_survey(group, factor, (d,), (min(radii),)).constants[f"e({d})"])
    rep = ExperimentReport("theoremB", {"group": group, "factor": factor, "radii": list(radii),
                                        "l": l, "c": c, "d": d, "e": e, "samples": samples}, seed)
    curves = flat_detour_curves(spec, np.random.default_rng(seed), samples, 2 * max(radii))
    per_radius = {R: 0 for R in radii}
    tight_count = 0
    wit = None
    for toks, curve in curves:
        D = distance_matrix(curve)
        tight = is_tight(curve, l, c, [factor], d, D)
        if not tight:
            continue
        tight_count += 1
        x, y = curve[0], curve[-1]
        alpha = _walk(x, (x.inverse() * y).word())
        labels = classify_horospherical(curve, [factor], d, e)
        w = 0
        for v, lab in zip(curve, labels.labels):
            if lab is None:
                w = max(w, min(word_distance(v, u) for u in alpha))
        reach = max(g.length for g in curve + alpha)
        for R in radii:
            if reach <= R:
                per_radius[R] = max(per_radius[R], w)
        if wit is None or w > wit[0]:
            wit = (w, " ".join(toks), str(x))
        rep.rows.append({"curve": " ".join(toks), "start": str(x), "length": len(toks),
                         "reach": reach, "horospherical": int(labels.mask.sum()), "w0": w})
    rep.constants["tight_curves"] = tight_count
    rep.constants["w0"] = per_radius[max(radii)]
    rep.stability.append({"stable": len(set(per_radius.values())) == 1,
                          **{f"w0@{R}": per_radius[R] for R in radii}})
    if wit:
        rep.witnesses["extremal curve"] = f"from {wit[2]}: {wit[1]} (w0 {wit[0]})"
    rep.checks["sampler produced tight curves"] = tight_count > 0
    rep.checks["w0 stable across radii"] = len(set(per_radius.values())) == 1
    return rep
