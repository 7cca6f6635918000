"""Experiment reports: per-sample rows, estimated constants, stability and witnesses.

Every number is rendered with 12 significant digits so that reruns with the
same seed produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

__all__ = ["ExperimentReport", "fmt"]


def fmt(x) -> str:
    """Deterministic text for a table cell."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    if x is None:
        return ""
    if isinstance(x, (list, tuple)):
        return " ".join(fmt(v) for v in x)
    return str(x)


@dataclass
class ExperimentReport:
    name: str
    params: dict
    seed: int
    constants: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    stability: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)  # extra file suffix -> text

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def _table(self, rows) -> str:
        if not rows:
            return ""
        cols = list(rows[0].keys())
        for r in rows[1:]:
            for c in r:
                if c not in cols:
                    cols.append(c)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in cols])
        return buf.getvalue()

    def rows_csv(self) -> str:
        return self._table(self.rows)

    def stability_csv(self) -> str:
        return self._table(self.stability)

    def summary_csv(self) -> str:
        """One line per estimated constant and per check."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "key", "value"])
        for k, v in self.constants.items():
            w.writerow([self.name, k, fmt(v)])
        for k, v in self.checks.items():
            w.writerow([self.name, f"check:{k}", fmt(bool(v))])
        return buf.getvalue()

    def witness_text(self) -> str:
        lines = []
        for k, v in self.witnesses.items():
            lines.append(f"{k}: {fmt(v) if not isinstance(v, str) else v}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_json(self) -> str:
        def clean(x):
            if isinstance(x, dict):
                return {str(k): clean(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            if isinstance(x, float):
                return fmt(x)
            if hasattr(x, "item"):
                return clean(x.item())
            return x

        doc = {"name": self.name, "seed": self.seed, "params": clean(self.params),
               "constants": clean(self.constants), "checks": clean(self.checks),
               "notes": list(self.notes)}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def __str__(self):
        parts = [f"{self.name} (seed {self.seed})"]
        for k, v in self.constants.items():
            parts.append(f"  {k} = {fmt(v)}")
        for k, v in self.checks.items():
            parts.append(f"  [{'ok' if v else 'FAIL'}] {k}")
        return "\n".join(parts)
