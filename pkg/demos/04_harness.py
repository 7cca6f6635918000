"""
Running experiments from a config file
======================================

The same flow as ``floydlab run --config quick.cfg --out results/quick``.
"""

import json
import tempfile
from pathlib import Path

from floydlab.harness import parse_config
from floydlab.harness.runner import run

text = (Path(__file__).with_name("quick.cfg")).read_text()
cfg = parse_config(text)
print(f"experiments: {', '.join(cfg.experiments)}; k={cfg.k} N={cfg.N} seed={cfg.seed}")

out = Path(tempfile.mkdtemp()) / "quick"
man = run(cfg, out)
print(f"passed: {man.passed}")
print(json.dumps({e["name"]: e["checks"] for e in man.entries}, indent=2))
print(sorted(p.name for p in out.iterdir()))
