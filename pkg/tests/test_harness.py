import json
import os

import pytest
from hypothesis import given, settings, strategies as st

from floydlab.harness.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, OUT_ENV, main
from floydlab.harness.config import (DEFAULTS, PARAMS, ConfigError, RunConfig, parse_config,
                                     serialize_config)
from floydlab.harness.oracles import SUITES, run_suite, threshold_formula
from floydlab.harness.registry import REGISTRY, resolve_kwargs
from floydlab.harness.runner import TIMINGS_ENV, run

SMALL = """\
# two cheap experiments
group = Z^2, Z
experiments = theoremB, system

[theoremB]
radii = 6 7
samples = 10

[system]
L = 2
N = 256
samples = 10
"""

FAILING = """\
experiments = system, horosphere
[system]
L = 2
N = 256
samples = 5
[horosphere]
N = 256
L = 3
levels = 1 2 3
samples = 10
conical_target = 1.0
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def tree(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


# -- parsing ------------------------------------------------------------------------

def test_minimal_config_uses_documented_defaults():
    cfg = parse_config("group = Z^2, Z\nexperiments = theoremB\n")
    assert cfg.seed == 0 and cfg.k == 4 and cfg.N == 512 and cfg.m == 4
    assert cfg.experiments == ("theoremB",)
    assert cfg.params["group"] == "Z^2, Z"
    kw = resolve_kwargs(REGISTRY["theoremB"], cfg)
    assert kw["group"] == "Z^2, Z" and kw["seed"] == 0


def test_geometric_ratio_out_of_range_is_an_error():
    with pytest.raises(ConfigError) as exc:
        parse_config("experiments = injectivity\nf = geometric 1.5\n")
    assert len(exc.value.errors) == 1
    assert exc.value.errors[0].startswith("line 2:")


def test_all_errors_reported_with_line_numbers():
    text = ("group = Z^2, Q\n"          # 1 malformed factor list
            "experiments = theoremB, nope\n"
            "k = 2\n"                   # 3 out of range
            "bogus = 1\n"               # 4 unknown key
            "k = 5\n"                   # 5 duplicate
            "[theoremB]\n"
            "N = 512\n"                 # 7 not a theoremB key
            "seed = 3\n"                # 8 run key inside a section
            "[other]\n"                 # 9 unlisted section
            "just words\n")             # 10 not key = value
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    lines = sorted(int(e.split(":")[0].split()[1]) for e in exc.value.errors)
    assert lines == [1, 2, 3, 4, 5, 7, 8, 9, 10]


def test_converter_errors_are_reported():
    with pytest.raises(ConfigError) as exc:
        parse_config("experiments = theoremB\n[theoremB]\nd = 1 2\n")
    assert exc.value.errors == ["line 3: [theoremB] d: d takes a single value here"]


def test_config_section_overrides_shared_values():
    cfg = parse_config("experiments = system, horosphere\nN = 256\n[system]\nN = 128\n")
    assert resolve_kwargs(REGISTRY["system"], cfg)["N"] == 128
    assert resolve_kwargs(REGISTRY["horosphere"], cfg)["N"] == 256
    # without an explicit value the experiment default beats the shared default
    cfg = parse_config("experiments = horosphere\n")
    assert resolve_kwargs(REGISTRY["horosphere"], cfg)["N"] == 4096


def test_round_trip_of_examples():
    for text in (SMALL, FAILING, "experiments =\n",
                 "seed = 7\nparallel = true\nexperiments = injectivity\nf = polynomial 2\n"
                 "center = 0.25 -0.1\n[injectivity]\nlevel_range = 3 5\nlam = 4.5\n"):
        cfg = parse_config(text)
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert serialize_config(again) == serialize_config(cfg)


VALUES = {
    "k": st.integers(3, 9).map(str),
    "N": st.integers(16, 4096).map(str),
    "rho": st.floats(0.1, 8.0, allow_nan=False).map(repr),
    "lambdas": st.lists(st.floats(1.001, 4.0), min_size=1, max_size=4).map(
        lambda v: " ".join(map(repr, v))),
    "f": st.one_of(st.floats(0.01, 0.99).map(lambda m: f"geometric {m!r}"),
                   st.integers(2, 5).map(lambda k: f"polynomial {k}")),
    "center": st.tuples(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6)).map(
        lambda z: f"{z[0]!r} {z[1]!r}"),
    "radii": st.lists(st.integers(1, 12), min_size=1, max_size=3).map(
        lambda v: " ".join(map(str, v))),
}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31), st.dictionaries(st.sampled_from(sorted(VALUES)),
                                               st.just(None), max_size=5), st.data())
def test_round_trip_property(seed, keys, data):
    lines = [f"seed = {seed}", "experiments = system, theoremC"]
    for key in keys:
        lines.append(f"{key} = {data.draw(VALUES[key])}")
    cfg = parse_config("\n".join(lines) + "\n")
    assert parse_config(serialize_config(cfg)) == cfg


def test_every_registry_key_is_a_documented_parameter():
    for exp in REGISTRY.values():
        assert exp.keys <= set(PARAMS), exp.name
    assert set(DEFAULTS) <= set(PARAMS)


# -- running ------------------------------------------------------------------------

def test_empty_experiment_list(tmp_path):
    man = run(parse_config("experiments =\n"), tmp_path / "out")
    assert man.entries == [] and man.passed
    doc = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert doc["experiments"] == [] and doc["files"] == ["config.txt"]
    assert main(["run", "--config", write(tmp_path, "experiments =\n"),
                 "--out", str(tmp_path / "cli")]) == EXIT_OK


def test_rerun_is_byte_identical(tmp_path):
    cfg = parse_config(SMALL)
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    a, b = tree(tmp_path / "a"), tree(tmp_path / "b")
    assert a == b
    assert "system.edges.txt" in a and "theoremB.csv" in a


def test_manifest_lists_exactly_the_files_written(tmp_path):
    cfg = parse_config(SMALL)
    man = run(cfg, tmp_path)
    doc = json.loads((tmp_path / "manifest.json").read_text())
    on_disk = {p.name for p in tmp_path.iterdir()} - {"manifest.json"}
    assert set(doc["files"]) == on_disk == set(man.files)
    assert doc["config_hash"] == parse_config(serialize_config(cfg)).digest()
    assert [e["name"] for e in doc["experiments"]] == ["theoremB", "system"]
    assert doc["versions"]["floydlab"]


def test_seed_changes_outputs(tmp_path):
    cfg = parse_config(SMALL)
    run(cfg, tmp_path / "a")
    cfg.seed = 11
    run(cfg, tmp_path / "b")
    assert tree(tmp_path / "a")["theoremB.csv"] != tree(tmp_path / "b")["theoremB.csv"]


def test_parallel_mode_matches_sequential(tmp_path):
    run(parse_config(SMALL), tmp_path / "seq")
    run(parse_config("parallel = true\n" + SMALL), tmp_path / "par")
    seq, par = tree(tmp_path / "seq"), tree(tmp_path / "par")
    assert set(seq) == set(par)
    for name in seq:
        if name not in ("config.txt", "manifest.json"):
            assert seq[name] == par[name], name


def test_timings_are_opt_in(tmp_path, monkeypatch):
    monkeypatch.delenv(TIMINGS_ENV, raising=False)
    run(parse_config(SMALL), tmp_path / "a")
    assert not (tmp_path / "a" / "timings.json").exists()
    monkeypatch.setenv(TIMINGS_ENV, "1")
    run(parse_config(SMALL), tmp_path / "b")
    times = json.loads((tmp_path / "b" / "timings.json").read_text())
    assert set(times) == {"theoremB", "system"}
    assert "timings.json" in json.loads((tmp_path / "b" / "manifest.json").read_text())["files"]


def test_failing_check_exits_one_with_complete_manifest(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, FAILING), "--out", str(out)]) == EXIT_FAIL
    doc = json.loads((out / "manifest.json").read_text())
    status = {e["name"]: e["status"] for e in doc["experiments"]}
    assert status == {"system": "passed", "horosphere": "failed"}
    assert not doc["passed"]
    assert all((out / f).exists() for f in doc["files"])


def test_precondition_failure_is_recorded(tmp_path):
    text = "experiments = system\n[system]\nL = 2\nN = 128\nrho = 0.5\n"
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, text), "--out", str(out)]) == EXIT_FAIL
    entry = json.loads((out / "manifest.json").read_text())["experiments"][0]
    assert entry["status"] == "error"
    assert entry["checks"] == {"preconditions_met": False}
    assert "ConventionError" in (out / "system.error.txt").read_text()


def test_config_error_exits_two(tmp_path, capsys):
    path = write(tmp_path, "experiments = theoremB\nf = geometric 1.5\nk = 1\n")
    assert main(["check", "--config", path]) == EXIT_CONFIG
    assert main(["run", "--config", path, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 2" in err and "line 3" in err
    assert not (tmp_path / "o").exists()
    assert main(["check", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def test_output_root_environment_variable(tmp_path, monkeypatch):
    path = write(tmp_path, "experiments =\n")
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "root"))
    assert main(["run", "--config", path]) == EXIT_OK
    (sub,) = (tmp_path / "root").iterdir()
    assert (sub / "manifest.json").exists()
    # --out wins over the environment
    assert main(["run", "--config", path, "--out", str(tmp_path / "explicit")]) == EXIT_OK
    assert (tmp_path / "explicit" / "manifest.json").exists()


def test_seed_flag_overrides_config(tmp_path):
    path = write(tmp_path, "seed = 3\nexperiments =\n")
    main(["run", "--config", path, "--seed", "9", "--out", str(tmp_path / "o")])
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["seed"] == 9


def test_list_and_check(tmp_path, capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in REGISTRY:
        assert f"{name}:" in out
    assert main(["check", "--config", write(tmp_path, SMALL)]) == EXIT_OK


def test_oracle_subcommand(capsys):
    assert main(["oracle", "threshold_formula"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("PASS threshold_formula")
    assert main(["oracle", "no_such_suite"]) == EXIT_CONFIG


def test_oracle_results_are_seeded():
    assert run_suite("linkedness_partitions", seed=4) == run_suite("linkedness_partitions", seed=4)
    assert threshold_formula().passed
    with pytest.raises(KeyError):
        run_suite("nope")
    assert set(SUITES) >= {"floyd_simple_paths", "metric_axioms", "certificate_soundness",
                           "linkedness_partitions", "shadow_identity"}
