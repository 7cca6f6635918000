import itertools
import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floydlab import GroupSpec, cayley_ball, word_distance
from floydlab.floyd import lambda_threshold
from floydlab.lab import experiments as cx
from floydlab.lab import system_experiments as sx
from floydlab.lab.curves import (Coset, classify_horospherical, classify_horospherical_bfs,
                                 distance_matrix, is_tight, nearby_cosets)
from floydlab.lab.report import ExperimentReport, fmt

SPEC = GroupSpec("Z^2, Z")


@pytest.fixture(scope="module")
def ball9():
    return cayley_ball(SPEC, 9)


def walk(spec, tokens, start=None):
    cur = start if start is not None else spec.identity()
    out = [cur]
    for t in tokens:
        cur = cur * spec.generator_element(spec.token(t))
        out.append(cur)
    return out


TOKENS = ["a", "A", "b", "B", "c", "C"]
walks = st.lists(st.sampled_from(TOKENS), min_size=1, max_size=6)


def bfs_from(ball, sources, maxd):
    dist = np.full(ball.n, -1)
    q = deque()
    for s in sources:
        dist[s] = 0
        q.append(s)
    while q:
        u = q.popleft()
        if dist[u] == maxd:
            continue
        for v in ball.neighbors[u]:
            if v >= 0 and dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(int(v))
    return dist


def coset_members(ball, coset):
    out = []
    for i in np.flatnonzero(ball.in_factor(coset.factor)):
        g = coset.rep * ball.element(int(i))
        if g.length <= ball.radius:
            out.append(ball.index(g))
    return out


# -- cosets and horospherical labels -----------------------------------------------

@settings(max_examples=40, deadline=None)
@given(walks, st.lists(st.sampled_from(["a", "A", "b", "B"]), max_size=3))
def test_coset_is_canonical(tokens, h):
    g = walk(SPEC, tokens)[-1]
    gh = walk(SPEC, h, start=g)[-1]
    assert Coset.of(g, 0) == Coset.of(gh, 0)


def test_coset_distance_matches_bfs(ball9):
    rng = np.random.default_rng(1)
    for _ in range(6):
        rep = walk(SPEC, rng.choice(TOKENS, 3))[-1]
        c = Coset.of(rep, 0)
        dist = bfs_from(ball9, coset_members(ball9, c), 3)
        for i in rng.choice(np.flatnonzero(ball9.length <= 4), 40):
            want = dist[i] if dist[i] >= 0 else math.inf
            got = c.distance(ball9.element(int(i)))
            assert min(got, 4) == min(want, 4)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from(TOKENS), min_size=4, max_size=6), st.integers(0, 1))
def test_horospherical_labels_match_bfs(ball9, tokens, e):
    curve = walk(SPEC, tokens)
    idx = [ball9.index(g) for g in curve]
    labels = classify_horospherical(curve, [0], 1, e)
    assert np.array_equal(labels.mask, classify_horospherical_bfs(ball9, idx, 0, 1, e))


def test_flat_curve_is_horospherical():
    curve = walk(SPEC, ["a"] * 6)
    labels = classify_horospherical(curve, [0], 0, 1)
    assert labels.mask[2:5].all() and not labels.mask[:2].any()
    assert all(lab == Coset.of(SPEC.identity(), 0) for lab in labels.labels[2:5])


def brute_tight(curve, l, c, d):
    n = len(curve)
    D = [[word_distance(x, y) for y in curve] for x in curve]
    for i, j in itertools.combinations(range(n), 2):
        if j - i <= l and not (j - i) / c - c < D[i][j] <= c * (j - i) + c:
            return False
    ball = cayley_ball(SPEC, d)  # words of length <= d
    shifts = [ball.element(i) for i in range(ball.n)]
    cands = {Coset.of(v * s, 0) for v in curve for s in shifts}
    for cos in cands:
        inside = [cos.distance(v) <= d for v in curve]
        for a in range(n):
            for b in range(a + l + 1, n):
                if all(inside[a:b + 1]) and not D[a][b] > l / c - c:
                    return False
    return True


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(TOKENS), min_size=2, max_size=9), st.integers(1, 4),
       st.sampled_from([1.0, 1.5, 2.0]))
def test_is_tight_matches_definition(tokens, l, c):
    curve = walk(SPEC, tokens)
    assert bool(is_tight(curve, l, c, [0], d=1)) == brute_tight(curve, l, c, 1)


def test_is_tight_reports_condition():
    back = walk(SPEC, ["c", "C"])
    res = is_tight(back, 2, 1.0, [0])
    assert not res and res.condition == 1
    long_flat = walk(SPEC, ["a", "b", "A", "B", "a", "b", "A"])
    res = is_tight(long_flat, 2, 1.0, [0])
    assert not res
    with pytest.raises(ValueError):
        is_tight(back, 0, 1.0, [0])


def test_distance_matrix_is_word_distance():
    curve = walk(SPEC, ["a", "c", "b", "C", "A"])
    D = distance_matrix(curve)
    for i, j in itertools.product(range(len(curve)), repeat=2):
        assert D[i, j] == word_distance(curve[i], curve[j])


def test_nearby_cosets_contains_own_coset():
    for tokens in (["a"], ["c", "a"], ["c", "a", "c"]):
        g = walk(SPEC, tokens)[-1]
        assert Coset.of(g, 0) in nearby_cosets(g, [0], 0)
        assert all(c.distance(g) <= 1 for c in nearby_cosets(g, [0], 1))


# -- reports ------------------------------------------------------------------------

def test_fmt_is_twelve_significant_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(math.inf) == "inf" and fmt(True) == "true" and fmt(None) == ""
    assert fmt([1.5, 2]) == "1.5 2"


def test_report_tables_have_fixed_columns():
    rep = ExperimentReport("x", {}, 0, rows=[{"a": 1, "b": 0.5}, {"b": 2.0, "c": "z"}])
    lines = rep.rows_csv().splitlines()
    assert lines[0] == "a,b,c"
    assert lines[2] == ",2,z"


# -- group experiments at small radii -------------------------------------------------

def test_fwgeod_below_threshold_and_tree():
    rep = cx.experiment_fwgeod(groups=("Z, Z", "Z^2, Z"), rs=(1, 2), lams=(1.05, 1.2, 1.5, 3.0))
    assert rep.passed
    # in a tree every path between two vertices is unique, so nothing can fail
    assert all(r["violations"] == 0 for r in rep.rows if r["group"] == "Z, Z")
    assert rep.constants["lambda_threshold[r=1]"] == pytest.approx(lambda_threshold(1))
    assert any(r["violations"] > 0 for r in rep.rows if r["group"] == "Z^2, Z")


def test_theoremC_small():
    rep = cx.experiment_theoremC(radii=(6, 7), samples=30)
    assert rep.passed and rep.constants["stable_prefix_length"] >= 1
    assert all(r["R_H"] >= 0 for r in rep.rows)


def test_injectivity_small():
    rep = cx.experiment_injectivity_bound(radii=(6, 7), samples=40, level_range=(2, 3))
    assert rep.passed
    assert 0 < rep.constants["c_star"] <= 1


def brute_overlap(ball, d, reps):
    """max diameter of N_d(H) & N_d(gH) over the given coset representatives."""
    H = Coset.of(GroupSpec("Z^2, Z").identity(), 0)
    near_h = bfs_from(ball, coset_members(ball, H), d) >= 0
    best = 0
    for g in reps:
        near_g = bfs_from(ball, coset_members(ball, Coset.of(g, 0)), d) >= 0
        both = np.flatnonzero(near_h & near_g & (ball.length <= ball.radius - d))
        for x, y in itertools.combinations(both, 2):
            best = max(best, word_distance(ball.element(int(x)), ball.element(int(y))))
    return best


def test_overlap_matches_brute_force():
    rep = cx.overlap_survey(ds=(0, 1), radii=(5, 6))
    assert rep.passed
    B = cayley_ball(SPEC, 6)
    reps = [walk(SPEC, w)[-1] for w in (["c"], ["C"], ["c", "a"], ["a", "c"])]
    assert rep.constants["e(0)"] == 0
    assert rep.constants["e(1)"] == brute_overlap(B, 1, reps)


def test_graph_quasiconvexity_of_flat():
    for coset in ("", "c"):
        rep = cx.experiment_graph_quasiconvexity(radii=(6, 7), samples=30, coset=coset)
        assert rep.passed and rep.constants["M"] == 0


def test_theoremB_small():
    rep = cx.experiment_theoremB(radii=(6, 7), samples=10)
    assert rep.passed and rep.constants["tight_curves"] > 0


def test_experiments_are_seeded():
    a = cx.experiment_theoremC(radii=(6,), samples=20, seed=5)
    b = cx.experiment_theoremC(radii=(6,), samples=20, seed=5)
    assert a.rows_csv() == b.rows_csv() and a.to_json() == b.to_json()


# -- orbit-system experiments ----------------------------------------------------------

def test_cusp_points_include_generator_fixed_points():
    pts = sx.cusp_points(512, 1)
    assert len(pts) == len(set(pts))
    assert 0 in pts and 256 in pts  # the fixed points at 1 and -1 on the circle


def test_system_summary_accounting():
    rep = sx.system_summary(L=3, N=256, samples=10)
    c = rep.constants
    total = 1 + 4 + 4 * 3 + 4 * 9
    assert c["members"] + c["dropped"] + c["merged"] == total
    assert rep.passed
    assert set(rep.artifacts) == {"edges.txt", "horosphere.txt"}
    assert len(rep.artifacts["edges.txt"].splitlines()) >= c["edges"]


def test_horosphere_classification_small():
    rep = sx.experiment_horosphere_classification(N=512, L=4, levels=(2, 3, 4), samples=10)
    assert set(rep.checks) == {"fixed_point_parabolic_like", "spread_decreasing",
                               "random_points_conical"}
    counts = [r["count"] for r in rep.stability if "count" in r]
    assert counts == sorted(counts)


def test_separation_constants_small():
    rep = sx.experiment_separation_constants(Ls=(4,), N=256, samples=20)
    assert rep.passed
    assert rep.constants["nu"] > 0 and rep.constants["rho"] > 0


def test_projection_bounds_small():
    rep = sx.experiment_projection_bounds(Ls=(4,), N=256, samples=10)
    assert rep.passed
    assert all(math.isfinite(v) for v in rep.constants.values())


def test_finiteness_small():
    rep = sx.survey_finiteness(Ls=(4,), N=256, max_pairs=100)
    assert rep.passed
    assert math.isfinite(rep.constants["projection_diameter"])
