"""Execute a run configuration and persist its outputs.

Every output file is a pure function of the configuration and the code
version.  Wall-clock times go to a separate ``timings.json`` only when
``FLOYDLAB_TIMINGS`` is set, so the default outputs are byte-identical
across reruns.
"""
from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..entourage.entourage import ConventionError, PreconditionError
from .config import RunConfig, serialize_config
from .registry import REGISTRY, resolve_kwargs

__all__ = ["ResultManifest", "run", "TIMINGS_ENV"]

TIMINGS_ENV = "FLOYDLAB_TIMINGS"


@dataclass
class ResultManifest:
    config_hash: str
    seed: int
    versions: dict
    entries: list = field(default_factory=list)   # one dict per experiment, in order
    timings: str | None = None

    @property
    def passed(self) -> bool:
        return all(e["status"] == "passed" for e in self.entries)

    @property
    def files(self) -> list[str]:
        out = ["config.txt"]
        for e in self.entries:
            out.extend(e["files"])
        return out

    def to_json(self) -> str:
        files = self.files + ([self.timings] if self.timings else [])
        doc = {"config_hash": self.config_hash, "seed": self.seed, "versions": self.versions,
               "experiments": self.entries, "files": files, "passed": self.passed}
        if self.timings:
            doc["timings"] = self.timings
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _versions() -> dict:
    return {"floydlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": ".".join(map(str, sys.version_info[:3]))}


def _execute(name: str, kwargs: dict):
    """Run one experiment; returns (report or None, error text or None, seconds)."""
    t0 = time.perf_counter()
    try:
        rep = REGISTRY[name].fn(**kwargs)
        return rep, None, time.perf_counter() - t0
    except (PreconditionError, ConventionError, ValueError, RuntimeError) as exc:
        return None, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0


def _write(out: Path, name: str, rep, error: str | None) -> dict:
    files = []

    def put(suffix: str, text: str):
        path = f"{name}.{suffix}"
        (out / path).write_text(text)
        files.append(path)

    if rep is None:
        put("error.txt", error + "\n")
        return {"name": name, "status": "error", "error": error, "files": files,
                "checks": {"preconditions_met": False}}
    put("csv", rep.rows_csv())
    put("stability.csv", rep.stability_csv())
    put("summary.csv", rep.summary_csv())
    put("witnesses.txt", rep.witness_text())
    put("json", rep.to_json())
    for suffix, text in sorted(rep.artifacts.items()):
        put(suffix, text)
    return {"name": name, "status": "passed" if rep.passed else "failed", "files": files,
            "checks": {k: bool(v) for k, v in rep.checks.items()}}


def run(cfg: RunConfig, out_dir: str | os.PathLike) -> ResultManifest:
    """Execute the listed experiments in order and write all outputs into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = serialize_config(cfg)
    (out / "config.txt").write_text(text)
    man = ResultManifest(cfg.digest(), cfg.seed, _versions())
    jobs = [(name, resolve_kwargs(REGISTRY[name], cfg)) for name in cfg.experiments]
    if cfg.parallel and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            futures = [pool.submit(_execute, name, kw) for name, kw in jobs]
            results = [f.result() for f in futures]
    else:
        results = [_execute(name, kw) for name, kw in jobs]
    timings = {}
    for (name, _), (rep, err, secs) in zip(jobs, results):
        man.entries.append(_write(out, name, rep, err))
        timings[name] = round(secs, 3)
    if os.environ.get(TIMINGS_ENV):
        man.timings = "timings.json"
        (out / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    (out / "manifest.json").write_text(man.to_json())
    return man
