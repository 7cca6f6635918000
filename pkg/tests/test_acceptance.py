"""Acceptance criteria, one test each, at full desk scale.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""
import time

import pytest

from floydlab.floyd import ScalingFunction, check_admissible, check_condition3, lambda_threshold
from floydlab.harness import parse_config
from floydlab.harness.oracles import run_suite
from floydlab.harness.runner import run
from floydlab.lab import experiments as cx
from floydlab.lab import system_experiments as sx


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def oracle(number, title, suite, criterion, budget=None):
    res, secs = timed(run_suite, suite)
    ok = res.passed and (budget is None or secs <= budget)
    criterion(number, title, ok, f"{res.line().split(': ', 1)[1]}, {secs:.0f}s")
    assert res.passed, res.line()
    if budget is not None:
        assert secs <= budget
    return res


def test_c01_lambda_threshold(criterion):
    closed = (abs(lambda_threshold(1) - 2 ** (1 / 3)) < 1e-9
              and abs(lambda_threshold(2) - 1.5 ** (1 / 5)) < 1e-9)
    rep, secs = timed(cx.experiment_fwgeod, groups=("Z, Z", "Z^2, Z"), rs=(1, 2, 3))
    below = [r for r in rep.rows if r["below_threshold"]]
    clean = all(r["violations"] == 0 for r in below)
    ok = closed and clean and bool(below) and secs <= 120
    criterion(1, "lambda threshold formula and fwgeod sweep", ok,
              f"{len(below)} sub-threshold cases, {sum(r['pairs'] for r in below)} pairs, "
              f"{secs:.0f}s")
    assert closed and clean and below
    assert secs <= 120


def test_c02_floyd_distance_oracle(criterion):
    oracle(2, "Floyd distance equals simple-path minimum", "floyd_simple_paths", criterion, 60)


def test_c03_metric_axioms(criterion):
    res = oracle(3, "metric axioms and bilipschitz bound", "metric_axioms", criterion, 60)
    assert res.detail["bilipschitz_scored"] >= 1000 and res.detail["triples"] >= 2000


def test_c04_certificate_soundness(criterion):
    res = oracle(4, "exact certificates survive radius + 3", "certificate_soundness", criterion)
    assert res.checked == 500


def test_c05_linkedness(criterion):
    res = oracle(5, "2-SAT linkedness versus all partitions", "linkedness_partitions",
                 criterion, 120)
    assert res.checked == 200 and res.detail["linked_and_unlinked_seen"]


def test_c06_shadow_identity(criterion):
    res = oracle(6, "shadow formulas and exhaustive shadows", "shadow_identity", criterion)
    assert res.detail == {"geometric": 100, "explicit": 50}


def test_c07_ordering(criterion):
    res = oracle(7, "ordering, convexity and transitivity on L=5 N=512", "ordering_triples",
                 criterion, 300)
    assert res.checked >= 10_000


def test_c08_tubes(criterion):
    res = oracle(8, "non-refinable tube builder", "nonrefinable_tubes", criterion)
    assert res.checked == 50


def test_c09_horosphere(criterion):
    rep, secs = timed(sx.experiment_horosphere_classification)
    counts = [r["count"] for r in rep.stability]
    spreads = [r["spread"] for r in rep.stability]
    criterion(9, "horosphere classification", rep.passed,
              f"counts {counts}, spreads {[round(s, 4) for s in spreads]}, "
              f"conical {rep.constants['conical_fraction']:.2f}, {secs:.0f}s")
    assert rep.checks["fixed_point_parabolic_like"]
    assert all(b > a for a, b in zip(counts, counts[1:]))
    assert rep.checks["spread_decreasing"]
    assert rep.constants["conical_fraction"] >= 0.9


def test_c10_theoremC(criterion):
    rep, secs = timed(cx.experiment_theoremC, lams=(1.02, 1.05, 1.1, 1.2, 1.5), radii=(8, 10))
    n = rep.constants["stable_prefix_length"]
    ok = rep.passed and n >= 1 and secs <= 600
    criterion(10, "radius-stable R(H) on a lambda prefix", ok,
              f"prefix length {n}, R(H)={rep.constants.get('R_H')}, {secs:.0f}s")
    prefix = rep.stability[:n]
    assert n >= 1 and all(r["stable"] and r["skip_rate@10"] < 0.2 for r in prefix)
    assert secs <= 600


def test_c11_injectivity(criterion):
    f = ScalingFunction.polynomial(2)
    assert check_admissible(f, 4.5) and check_condition3(f, 4.0)
    rep = cx.experiment_injectivity_bound(f=f, kappa=4.0, radii=(8, 10), samples=200)
    c = rep.constants
    ok = rep.passed and c["c_star"] > 0 and c["relative_change"] < 0.1
    criterion(11, "injectivity bound c*", ok,
              f"c*={c['c_star']:.6g}, change {c['relative_change']:.3g}, "
              f"scored {c['scored_pairs']}/200")
    assert ok


ALL_EXPERIMENTS = """\
seed = 3
experiments = fwgeod, theoremC, injectivity, overlap, quasiconvexity, theoremB, system, \
horosphere, separation, projection, finiteness
group = Z^2, Z
samples = 20

[fwgeod]
r = 1 2
lambdas = 1.05 1.3
[theoremC]
radii = 6 7
[injectivity]
radii = 6 7
level_range = 2 3
[overlap]
radii = 5 6
[quasiconvexity]
radii = 6 7
[theoremB]
radii = 6 7
samples = 8
[system]
L = 3
N = 256
[horosphere]
N = 512
L = 4
levels = 2 3 4
[separation]
truncations = 4
N = 256
[projection]
truncations = 4
N = 256
samples = 8
[finiteness]
truncations = 4
N = 256
max_pairs = 60
"""


def test_c12_determinism(criterion, tmp_path):
    cfg = parse_config(ALL_EXPERIMENTS)
    run(cfg, tmp_path / "a")
    run(parse_config(ALL_EXPERIMENTS), tmp_path / "b")
    a = {p.name: p.read_bytes() for p in (tmp_path / "a").iterdir()}
    b = {p.name: p.read_bytes() for p in (tmp_path / "b").iterdir()}
    differ = sorted(n for n in a.keys() | b.keys() if a.get(n) != b.get(n))
    criterion(12, "byte-identical reruns", not differ,
              f"{len(a)} files over {len(cfg.experiments)} experiments"
              + (f", differ: {differ}" if differ else ""))
    assert not differ
