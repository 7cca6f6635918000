"""Experiments on Möbius-orbit entourage systems.

The graph of a system is ``Gamma_A``: members as vertices, linked pairs as
edges.  Distances ``d_A`` are hop counts in that graph.  Parabolic points
are the grid points nearest to fixed points of the default generators
(``a``, ``b`` and ``a b^-1``) and their images under short words.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from ..entourage.circle import DEFAULT_GENERATORS, HyperbolicDisk, MoebiusMap
from ..entourage.system import EntourageSystem, moebius_orbit, reduced_words
from ..floyd import FloydWeightedBall, ScalingFunction
from .report import ExperimentReport

__all__ = ["orbit_system", "cusp_points", "system_summary", "experiment_horosphere_classification",
           "experiment_separation_constants", "experiment_projection_bounds",
           "survey_finiteness"]


@lru_cache(maxsize=8)
def orbit_system(L: int, N: int, rho: float = 2.0, center: complex = 0j) -> EntourageSystem:
    """Cached orbit system of the default generators."""
    return moebius_orbit(base_disk=HyperbolicDisk(complex(center), float(rho)), L=L, circle=N)


def _parabolics():
    a, b = DEFAULT_GENERATORS
    return [a, b, a @ b.inverse()]


def cusp_points(N: int, depth: int = 1) -> list[int]:
    """Grid indices of parabolic fixed points under reduced words of length <= depth."""
    gens = list(DEFAULT_GENERATORS)
    maps = gens + [g.inverse() for g in gens]
    base = [g.fixed_points_disk()[0] for g in _parabolics()]
    out = []
    for w in reduced_words(len(gens), depth):
        for z in base:
            for s in reversed(w):
                z = maps[s].apply_disk(z)
            i = int(round(np.angle(z) / (2 * np.pi) * N)) % N
            if i not in out:
                out.append(i)
    return out


def _gdist(S: EntourageSystem) -> np.ndarray:
    return S.graph_distances


def _geodesic(pred: np.ndarray, a: int, c: int) -> list[int]:
    """Vertex list of the shortest-path tree geodesic from ``a`` to ``c``."""
    path = [c]
    while path[-1] != a:
        path.append(int(pred[a, path[-1]]))
    return path[::-1]


def _predecessors(S: EntourageSystem) -> np.ndarray:
    _, pred = shortest_path(S.adjacency(), unweighted=True, directed=False, return_predecessors=True)
    return pred


def _set_distance(D: np.ndarray, xs, ys) -> float:
    xs, ys = np.asarray(xs, np.int64), np.asarray(ys, np.int64)
    if xs.size == 0 or ys.size == 0:
        return math.nan
    return float(D[np.ix_(xs, ys)].min())


def _diameter(D: np.ndarray, xs) -> float:
    xs = np.asarray(xs, np.int64)
    if xs.size == 0:
        return 0.0
    return float(D[np.ix_(xs, xs)].max())


def _between_triples(S: EntourageSystem, k: int, count: int, rng) -> list[tuple[int, int, int]]:
    """Random triples ``a - b - c (k)``, found by scanning ``a`` for random ``(b, c)``."""
    out, tries = [], 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        b, c = (int(x) for x in rng.choice(S.M, 2, replace=False))
        if S.linked[b, c]:
            continue
        pos = np.flatnonzero(S.between_many(np.arange(S.M), b, c, k))
        if pos.size:
            out.append((int(rng.choice(pos)), b, c))
    return out


# -- system summary -------------------------------------------------------------

def system_summary(generators: Sequence[tuple] | None = None, rho: float = 2.0,
                   center: complex = 0j, L: int = 3, N: int = 512, k: int = 4, m: int = 4,
                   samples: int = 50, seed: int = 0) -> ExperimentReport:
    """Build an orbit system and export its graph and one horosphere.

    ``generators`` are upper half-plane maps given as coefficient quadruples.
    Reports member accounting, connectivity, the success fraction of
    ``m``-separation on random point pairs, and writes the linked-pairs edge
    list and the horosphere of circle point 0 as artifacts.
    """
    if generators is None:
        gens = list(DEFAULT_GENERATORS)
    else:
        gens = [MoebiusMap(*q, name=chr(ord("a") + i)) for i, q in enumerate(generators)]
    rep = ExperimentReport("system", {"generators": [" ".join(f"{x:.12g}" for x in g.coeffs)
                                                     for g in gens],
                                      "rho": rho, "center": str(complex(center)), "L": L,
                                      "N": N, "k": k, "m": m, "samples": samples}, seed)
    S = moebius_orbit(gens, HyperbolicDisk(complex(center), float(rho)), L=L, circle=N)
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < samples:
        p, q = (int(x) for x in rng.integers(0, N, 2))
        if p != q:
            pairs.append((p, q))
    sep = S.separation_check(m, pairs)
    for (p, q), ok, best in zip(pairs, sep.separated, sep.best_m):
        rep.rows.append({"p": p, "q": q, "separated": ok, "best_m": best})
    T = S.horosphere(0, k)
    deg = S.linked_counts() - 1
    rep.constants.update({"members": S.M, "dropped": S.dropped, "merged": S.merged,
                          "edges": int(len(S.edges())), "mean_degree": float(deg.mean()),
                          "separation_fraction": sep.success_fraction,
                          "horosphere_size": int(T.size)})
    rep.checks["connected"] = S.is_connected()
    rep.artifacts["edges.txt"] = S.edge_list_text()
    rep.artifacts["horosphere.txt"] = S.horosphere_text(T)
    return rep


# -- horosphere classification ------------------------------------------------

def experiment_horosphere_classification(rho: float = 4.0, center: complex = 1 / 3,
                                         N: int = 4096, L: int = 6, k: int = 4,
                                         levels: Sequence[int] = (4, 5, 6),
                                         samples: int = 100,
                                         sample_levels: Sequence[int] = (0, 1),
                                         conical_target: float = 0.9,
                                         seed: int = 0) -> ExperimentReport:
    """Horosphere counts at the fixed point of ``a`` and at random circle points.

    Separators come from :meth:`EntourageSystem.orbit_separators`, so they
    are not limited by the truncation.  The fixed point must count strictly
    more members at each level with the angular spread of the newest members
    shrinking; random points must mostly have an empty horosphere.
    """
    rep = ExperimentReport("horosphere", {"rho": rho, "center": str(complex(center)), "N": N,
                                          "L": L, "k": k, "levels": list(levels),
                                          "samples": samples,
                                          "sample_levels": list(sample_levels)}, seed)
    S = orbit_system(L, N, rho, complex(center))
    p = cusp_points(N, 0)[0]
    fixed = S.classify_point(p, k, levels=tuple(levels), separators="orbit")
    for lv in levels:
        rep.stability.append({"point": p, "level": lv, "count": fixed.counts[lv],
                              "spread": fixed.spread.get(lv, math.nan)})
    spreads = [fixed.spread.get(lv, math.nan) for lv in levels]
    rep.constants["fixed_point"] = p
    rep.constants["fixed_label"] = fixed.label
    rep.constants["members"] = S.M
    rep.checks["fixed_point_parabolic_like"] = fixed.label == "parabolic-like"
    rep.checks["spread_decreasing"] = all(y < x for x, y in zip(spreads, spreads[1:]))

    rng = np.random.default_rng(seed)
    pts = [int(x) for x in rng.integers(0, N, samples)]
    sub = S.restrict(max(sample_levels))
    conical = []
    for q in pts:
        c = sub.classify_point(q, k, levels=tuple(sample_levels), separators="orbit")
        row = {"point": q, "label": c.label}
        row.update({f"count_L{lv}": c.counts[lv] for lv in sample_levels})
        rep.rows.append(row)
        conical.append(c.label == "conical")
    frac = float(np.mean(conical)) if conical else 0.0
    rep.constants["conical_fraction"] = frac
    rep.checks["random_points_conical"] = frac >= conical_target
    bad = [q for q, ok in zip(pts, conical) if not ok]
    rep.witnesses["non_conical_points"] = bad
    return rep


# -- separation constants -----------------------------------------------------

def _floyd_ball(S: EntourageSystem, f: ScalingFunction, base: int) -> FloydWeightedBall:
    """``Gamma_A`` with Floyd weights at ``base``; the graph is the whole space."""
    return FloydWeightedBall.from_edges(S.M, S.edges(), f, basepoint=base)


def _horo_masks(S: EntourageSystem, k: int, cusps) -> np.ndarray:
    """Row ``j``: membership mask of the horosphere at the j-th cusp."""
    out = np.zeros((len(cusps), S.M), bool)
    for j, p in enumerate(cusps):
        out[j, S.horosphere(p, k)] = True
    return out


def _non_horospherical(path, masks: np.ndarray) -> list[int]:
    """Interior path vertices whose two path neighbours do not share a horosphere with them."""
    out = []
    for i in range(1, len(path) - 1):
        w = path[i - 1:i + 2]
        if not masks[:, w].all(axis=1).any():
            out.append(path[i])
    return out


def experiment_separation_constants(Ls: Sequence[int] = (4, 5), N: int = 512, k: int = 4,
                                    samples: int = 100, mu: float = 0.5,
                                    seed: int = 0) -> ExperimentReport:
    """Floyd separation floors ``nu`` (betweenness triples) and ``rho`` (geodesics).

    ``nu`` is the minimum of the Floyd distance at ``b`` between ``a`` and
    ``c`` over sampled triples ``a - b - c (k)``.  ``rho`` is the minimum of the
    Floyd distance at ``v`` between the endpoints of a ``Gamma_A`` geodesic,
    over interior vertices ``v`` that do not sit with both path neighbours in
    one horosphere of the cusp family.
    Both are computed with ``f = geometric(mu)``.
    """
    f = ScalingFunction.geometric(mu)
    rep = ExperimentReport("separation", {"L": list(Ls), "N": N, "k": k, "samples": samples,
                                          "f": f.describe()}, seed)
    nus, rhos = [], []
    for L in Ls:
        S = orbit_system(L, N)
        rng = np.random.default_rng(seed)
        nu, nu_w = math.inf, None
        for a, b, c in _between_triples(S, k, samples, rng):
            fb = _floyd_ball(S, f, b)
            d = float(fb.distances_from(a, stop_at=c)[0][c])
            rep.rows.append({"L": L, "kind": "nu", "a": a, "b": b, "c": c, "value": d})
            if d < nu:
                nu, nu_w = d, (a, b, c)
        D = _gdist(S)
        pred = _predecessors(S)
        masks = _horo_masks(S, k, cusp_points(N, 1))
        rho, rho_w, scored = math.inf, None, 0
        tries = 0
        while scored < samples and tries < 20 * samples:
            tries += 1
            a, c = (int(x) for x in rng.choice(S.M, 2, replace=False))
            if D[a, c] < 2:
                continue
            path = _geodesic(pred, a, c)
            inner = _non_horospherical(path, masks)
            if not inner:
                continue
            v = inner[len(inner) // 2]
            fb = _floyd_ball(S, f, v)
            d = float(fb.distances_from(a, stop_at=c)[0][c])
            rep.rows.append({"L": L, "kind": "rho", "a": a, "b": v, "c": c, "value": d})
            scored += 1
            if d < rho:
                rho, rho_w = d, (a, v, c)
        nus.append(nu)
        rhos.append(rho)
        rep.stability.append({"L": L, "nu": nu, "rho": rho, "members": S.M})
        rep.witnesses[f"nu_L{L}"] = list(nu_w) if nu_w else []
        rep.witnesses[f"rho_L{L}"] = list(rho_w) if rho_w else []
    # levels without a qualifying configuration are reported as inf, not scored
    nus_f = [x for x in nus if math.isfinite(x)]
    rhos_f = [x for x in rhos if math.isfinite(x)]
    rep.constants["nu"] = min(nus_f) if nus_f else math.nan
    rep.constants["rho"] = min(rhos_f) if rhos_f else math.nan
    rep.checks["sampled_at_top_level"] = math.isfinite(nus[-1]) and math.isfinite(rhos[-1])
    rep.checks["nu_positive"] = all(x > 0 for x in nus_f)
    rep.checks["rho_positive"] = all(x > 0 for x in rhos_f)
    # the floor may drop with the truncation only by a bounded factor
    rep.checks["nu_floor_stable"] = bool(nus_f) and min(nus_f) >= 0.5 * nus_f[0]
    rep.checks["rho_floor_stable"] = bool(rhos_f) and min(rhos_f) >= 0.5 * rhos_f[0]
    return rep


# -- projection bounds ---------------------------------------------------------

def experiment_projection_bounds(Ls: Sequence[int] = (4, 5), N: int = 512, k: int = 4,
                                 samples: int = 60, seed: int = 0) -> ExperimentReport:
    """Empirical ``D``, ``L``, ``M`` and ``E`` on ``Gamma_A``.

    D: distance from ``b`` to a geodesic between ``a`` and ``c`` for ``a - b - c (k)``.
    L: distance from the projection ``Pi_p(a)`` to a geodesic from ``a`` to
    its nearest horosphere member.
    M: distance from a geodesic vertex between two horosphere members to its
    own projection (vertices on the horosphere count 0).
    E: distance from tube members outside the horospheres to a geodesic
    between the tube's ends.
    """
    rep = ExperimentReport("projection", {"L": list(Ls), "N": N, "k": k, "samples": samples},
                           seed)
    cusps = cusp_points(N, 1)
    table = []
    for L in Ls:
        S = orbit_system(L, N)
        D = _gdist(S)
        pred = _predecessors(S)
        rng = np.random.default_rng(seed)
        horos = {p: S.horosphere(p, k) for p in cusps}
        horo = np.zeros(S.M, bool)
        for T in horos.values():
            horo[T] = True
        vals = {"D": 0.0, "L": 0.0, "M": 0.0, "E": 0.0}
        wit = {}

        def bump(key, v, w):
            if v > vals[key]:
                vals[key] = v
                wit[key] = w

        for a, b, c in _between_triples(S, k, samples, rng):
            v = _set_distance(D, [b], _geodesic(pred, a, c))
            rep.rows.append({"L": L, "kind": "D", "a": a, "b": b, "c": c, "value": v})
            bump("D", v, (a, b, c))
        for p, T in horos.items():
            if T.size == 0:
                continue
            for a in (int(x) for x in rng.choice(S.M, min(samples // 3 + 1, S.M), replace=False)):
                proj = S.project_to_horosphere(a, p, k, T)
                if proj.size == 0:
                    continue
                q = int(T[np.argmin(D[a, T])])
                v = _set_distance(D, proj, _geodesic(pred, a, q))
                rep.rows.append({"L": L, "kind": "L", "a": a, "b": p, "c": q, "value": v})
                bump("L", v, (a, p, q))
            if T.size >= 2:
                x, y = (int(t) for t in rng.choice(T, 2, replace=False))
                for g in _geodesic(pred, x, y):
                    if g in set(T.tolist()):
                        continue
                    proj = S.project_to_horosphere(g, p, k, T)
                    if proj.size == 0:
                        continue
                    v = _set_distance(D, [g], proj)
                    rep.rows.append({"L": L, "kind": "M", "a": x, "b": g, "c": y, "value": v})
                    bump("M", v, (x, g, y))
        # tubes between unlinked pairs, preferring pairs with a refinement step
        tubes = 0
        tries = 0
        while tubes < max(samples // 6, 1) and tries < 50 * samples:
            tries += 1
            a, b = (int(x) for x in rng.choice(S.M, 2, replace=False))
            if S.linked[a, b]:
                continue
            if tries < 25 * samples and S.is_nonrefinable(a, b, k + 2):
                continue
            tube = S.build_nonrefinable_tube(a, b, k)
            path = _geodesic(pred, a, b)
            tubes += 1
            for g in tube.members:
                if horo[g]:
                    continue
                v = _set_distance(D, [g], path)
                bump("E", v, (a, g, b))
            rep.rows.append({"L": L, "kind": "E", "a": a, "b": len(tube), "c": b,
                             "value": max((_set_distance(D, [g], path) for g in tube.members
                                           if not horo[g]), default=0.0)})
        table.append(vals)
        row = {"level": L, "members": S.M}
        row.update(vals)
        rep.stability.append(row)
        for key, w in wit.items():
            rep.witnesses[f"{key}_L{L}"] = list(w)
    for key in ("D", "L", "M", "E"):
        rep.constants[key] = max(t[key] for t in table)
    rep.checks["all_finite"] = all(math.isfinite(v) for t in table for v in t.values())
    rep.checks["samplers_found_configurations"] = all(
        any(r["L"] == L and r["kind"] == kind for r in rep.rows)
        for L in Ls for kind in ("D", "L", "E"))
    return rep


# -- finiteness survey ---------------------------------------------------------

def survey_finiteness(Ls: Sequence[int] = (4, 5), N: int = 512, k: int = 4,
                      max_pairs: int = 600, proj_sample: int = 12,
                      seed: int = 0) -> ExperimentReport:
    """Counts and diameters that stay bounded as the truncation grows.

    (i) non-refinable pairs not contained in one horosphere, against sampled
    unlinked pairs; the cusp family has depth ``L - 2`` so that it keeps up
    with the truncation.  (ii) ``Gamma_A``-diameters of ``Pi_p(T(q))`` for
    distinct depth-1 cusps, projecting up to ``proj_sample`` members of
    ``T(q)``.  (iii) diameters of overlaps of 1-neighbourhoods of horospheres.
    """
    rep = ExperimentReport("finiteness", {"L": list(Ls), "N": N, "k": k,
                                          "max_pairs": max_pairs,
                                          "proj_sample": proj_sample}, seed)
    cusps = cusp_points(N, 1)
    fractions = []
    proj_diams, overlaps = [], []
    fixes = True
    for L in Ls:
        S = orbit_system(L, N)
        D = _gdist(S)
        rng = np.random.default_rng(seed)
        horos = {p: S.horosphere(p, k) for p in cusps}
        deep = cusp_points(N, max(L - 2, 1))
        member_sets = [set(S.horosphere(p, k).tolist()) for p in deep]
        iu = np.argwhere(np.triu(~S.linked, 1))
        if len(iu) > max_pairs:
            iu = iu[np.sort(rng.choice(len(iu), max_pairs, replace=False))]
        nonref = outside = 0
        for a, b in iu:
            if S.is_nonrefinable(int(a), int(b), k):
                nonref += 1
                if not any(int(a) in T and int(b) in T for T in member_sets):
                    outside += 1
                    rep.witnesses.setdefault(f"outside_L{L}", []).append(f"{a}-{b}")
        frac = outside / max(len(iu), 1)
        fractions.append(frac)
        pdiam = 0.0
        for p, Tp in horos.items():
            if Tp.size == 0:
                continue
            own = np.concatenate([S.project_to_horosphere(int(t), p, k, Tp) for t in Tp])
            fixes &= set(own.tolist()) == set(Tp.tolist())
            for q, Tq in horos.items():
                if q == p or Tq.size == 0:
                    continue
                pick = Tq if Tq.size <= proj_sample else rng.choice(Tq, proj_sample, replace=False)
                img = np.unique(np.concatenate(
                    [S.project_to_horosphere(int(t), p, k, Tp) for t in pick]))
                pdiam = max(pdiam, _diameter(D, img))
        ov = 0.0
        keys = list(horos)
        for i, p in enumerate(keys):
            for q in keys[i + 1:]:
                if horos[p].size == 0 or horos[q].size == 0:
                    continue
                near_p = (D[:, horos[p]] <= 1).any(axis=1)
                near_q = (D[:, horos[q]] <= 1).any(axis=1)
                ov = max(ov, _diameter(D, np.flatnonzero(near_p & near_q)))
        proj_diams.append(pdiam)
        overlaps.append(ov)
        rep.stability.append({"L": L, "members": S.M, "cusps": len(deep), "pairs": len(iu),
                              "nonrefinable": nonref, "outside_horospheres": outside,
                              "fraction": frac, "projection_diameter": pdiam,
                              "overlap_diameter": ov})
    rep.constants["projection_diameter"] = max(proj_diams)
    rep.constants["overlap_diameter"] = max(overlaps)
    rep.checks["projection_fixes_horosphere"] = fixes
    rep.checks["outside_fraction_not_growing"] = all(
        y <= x + 1e-12 for x, y in zip(fractions, fractions[1:]))
    return rep
