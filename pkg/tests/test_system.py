import numpy as np
import pytest

from floydlab.entourage import Circle, DEFAULT_GENERATORS, Entourage, HyperbolicDisk
from floydlab.entourage.entourage import PreconditionError, is_between, is_linked
from floydlab.entourage.system import EntourageSystem, moebius_orbit, reduced_words
from floydlab.harness.oracles import nonrefinable_tubes, ordering_triples


@pytest.fixture(scope="module")
def orbit3():
    return moebius_orbit(L=3, circle=256)


# -- construction ---------------------------------------------------------------

def test_reduced_word_counts():
    assert [sum(1 for w in reduced_words(2, L) if len(w) == L) for L in range(5)] == [1, 4, 12, 36, 108]


def test_level_zero_is_the_base():
    S = moebius_orbit(L=0, circle=256)
    assert S.M == 1 and S.words == [""]
    assert S.members[0] == Entourage.geometric(Circle(256), 0j, 2.0, strict=False)


def test_member_accounting(orbit3):
    total = len(reduced_words(2, 3))
    assert orbit3.M + orbit3.dropped + orbit3.merged == total
    assert orbit3.M <= total
    assert list(orbit3.lengths) == sorted(orbit3.lengths)


def test_members_are_orbit_images(orbit3):
    C = orbit3.circle
    gens = {g.name: g for g in DEFAULT_GENERATORS}
    gens.update({g.name.swapcase(): g.inverse() for g in DEFAULT_GENERATORS})
    for i in range(0, orbit3.M, 7):
        z = 0j
        for s in reversed(orbit3.words[i]):
            z = gens[s].apply_disk(z)
        e = Entourage.geometric(C, complex(z), 2.0, strict=False)
        assert e == orbit3.members[i]


def test_linked_matrix_matches_pairwise(orbit3):
    rng = np.random.default_rng(3)
    for _ in range(60):
        a, b = rng.integers(0, orbit3.M, 2)
        assert orbit3.linked[a, b] == is_linked(orbit3.members[a], orbit3.members[b])
    assert np.array_equal(orbit3.linked, orbit3.linked.T)
    assert orbit3.linked.diagonal().all()


def test_orbit_graph_connected(orbit3):
    assert orbit3.is_connected()
    d = orbit3.graph_distances
    assert d[0, 0] == 0 and np.isfinite(d).all()


def test_betweenness_agrees_with_pairwise_function(orbit3):
    rng = np.random.default_rng(5)
    ms = orbit3.members
    for _ in range(40):
        a, b, c = rng.choice(orbit3.M, 3, replace=False)
        assert orbit3.is_between(a, b, c, 4) == is_between(ms[a], ms[b], ms[c], 4)


# -- ordering, convexity and the Busemann order -----------------------------------

def test_ordering_convexity_and_busemann_transitivity():
    # the full-size run (L=5, N=512, 10^4 triples) is an acceptance criterion
    res = ordering_triples(L=4, N=256, triples=2000)
    assert res.passed, res.line()
    assert res.detail["related"] > 100 and res.detail["transitivity_premises"] > 100


# -- tubes ------------------------------------------------------------------------

def test_nonrefinable_tubes():
    res = nonrefinable_tubes(L=4, N=256, pairs=20)
    assert res.passed, res.line()
    assert res.detail["refinable_pairs"] == 10


def test_tube_preconditions(orbit3):
    a, b = np.argwhere(orbit3.linked & ~np.eye(orbit3.M, dtype=bool))[0]
    with pytest.raises(PreconditionError):
        orbit3.build_nonrefinable_tube(a, b, 4)
    with pytest.raises(ValueError):
        orbit3.is_tube([0, 1], 2)
    assert orbit3.build_nonrefinable_tube(0, 0, 4).members == [0]


# -- horospheres --------------------------------------------------------------------

def brute_horosphere(S, p, k):
    sep = S.separators_of_point(np.arange(S.M), p, k)
    return np.flatnonzero(~sep.any(axis=1))


def test_horosphere_matches_definition(orbit3):
    for p in (0, 37, 128, 201):
        assert np.array_equal(orbit3.horosphere(p, 4), brute_horosphere(orbit3, p, 4))


def test_horosphere_grows_with_k(orbit3):
    for p in (0, 91):
        T4, T5, T6 = (set(orbit3.horosphere(p, k).tolist()) for k in (4, 5, 6))
        assert T4 <= T5 <= T6


def test_singleton_horosphere():
    S = moebius_orbit(L=0, circle=256)
    assert S.horosphere(17, 4).tolist() == [0]


def test_projection_and_visibility(orbit3):
    S, k, p = orbit3, 4, 0
    T = S.horosphere(p, k)
    Tset = set(T.tolist())
    checked = 0
    for a in range(S.M):
        if a in Tset:
            assert S.project_to_horosphere(a, p, k, T).tolist() == [a]
            continue
        proj = S.project_to_horosphere(a, p, k, T)
        assert set(proj.tolist()) <= Tset
        for q in proj[:2]:
            vis = S.visibility_neighborhood(a, int(q), p, k, T)
            assert set(vis.tolist()) <= Tset
            assert int(q) in set(vis.tolist())
            checked += 1
    assert checked > 0
    outside = next(i for i in range(S.M) if i not in Tset)
    with pytest.raises(PreconditionError):
        S.visibility_neighborhood(outside, outside, p, k, T)


def test_orbit_separators_are_orbit_members(orbit3):
    pool = orbit3.orbit_separators(100, orbit3.centers[:5])
    gens = {g.name: g for g in DEFAULT_GENERATORS}
    gens.update({g.name.swapcase(): g.inverse() for g in DEFAULT_GENERATORS})
    assert pool.M > 0
    for i in range(pool.M):
        z = 0j
        for s in reversed(pool.words[i]):
            z = gens[s].apply_disk(z)
        assert pool.members[i] == Entourage.geometric(orbit3.circle, complex(z), 2.0, strict=False)
        assert pool.members[i].satisfies_convention()


def test_orbit_pool_only_removes_members(orbit3):
    p = 77
    plain = set(orbit3.horosphere(p, 4).tolist())
    pool = orbit3.orbit_separators(p)
    merged = EntourageSystem(orbit3.circle, orbit3.members + pool.members,
                             orbit3.words + pool.words,
                             np.concatenate([orbit3.lengths, pool.lengths]))
    T = set(merged.horosphere(p, 4, candidates=np.arange(orbit3.M)).tolist())
    assert T <= plain
    lazy = set(orbit3.horosphere(p, 4, pool=merged).tolist())
    assert lazy == T


def test_classify_point_labels(orbit3):
    c = orbit3.classify_point(0, 4, levels=(1, 2, 3))
    assert c.label in ("conical", "parabolic-like", "indeterminate")
    assert set(c.counts) == {1, 2, 3}
    with pytest.raises(ValueError):
        orbit3.classify_point(0, 4, levels=(4,))
    with pytest.raises(ValueError):
        orbit3.classify_point(0, 4, separators="nearest")


# -- separation -------------------------------------------------------------------

def test_antipodal_pair_is_separated():
    S = moebius_orbit(base_disk=HyperbolicDisk(0j, 2.0), L=2, circle=512)
    rep = S.separation_check(3, [(0, 256)])
    assert rep.separated == [True] and rep.best_m[0] >= 3


def test_separation_improves_with_level():
    rng = np.random.default_rng(2)
    pairs = [tuple(int(x) for x in rng.choice(512, 2, replace=False)) for _ in range(30)]
    fr = [moebius_orbit(L=L, circle=512).separation_check(4, pairs).success_fraction
          for L in (1, 2, 3)]
    assert fr == sorted(fr)


def test_separation_rejects_equal_points(orbit3):
    with pytest.raises(PreconditionError):
        orbit3.separation_check(4, [(5, 5)])


def test_exports(orbit3):
    lines = orbit3.edge_list_text().splitlines()
    assert len(lines) == len(orbit3.edges())
    u, v = map(int, lines[0].split())
    assert orbit3.linked[u, v] and u != v
    assert orbit3.horosphere_text([0]) == "0 1\n"
