"""Line-based run configuration.

Format::

    # comment
    seed = 0
    experiments = fwgeod, theoremC
    k = 4                      # shared parameter, applies where accepted

    [theoremC]                 # overrides for one experiment
    lambdas = 1.02 1.05 1.1
    radii = 8 10

Top-level keys are run settings or shared parameters; a section named
after a listed experiment overrides parameters for that experiment only.
Parsing collects every error with its line number before failing.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ..floyd import parse_scaling
from ..groups import GroupSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config", "PARAMS",
           "DEFAULTS"]


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


# -- value types --------------------------------------------------------------

def _int(lo=None, hi=None):
    def parse(text):
        v = int(text)
        if lo is not None and v < lo:
            raise ValueError(f"must be >= {lo}")
        if hi is not None and v > hi:
            raise ValueError(f"must be <= {hi}")
        return v

    def show(v):
        return str(v)
    return parse, show


def _float(lo=None, lo_open=False, hi=None, hi_open=False):
    def parse(text):
        v = float(text)
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise ValueError(f"must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and (v > hi or (hi_open and v == hi)):
            raise ValueError(f"must be {'<' if hi_open else '<='} {hi}")
        return v

    def show(v):
        return repr(float(v))
    return parse, show


def _list(item):
    parse_item, show_item = item

    def parse(text):
        parts = text.replace(",", " ").split()
        if not parts:
            raise ValueError("empty list")
        return tuple(parse_item(p) for p in parts)

    def show(v):
        return " ".join(show_item(x) for x in v)
    return parse, show


def _group():
    def parse(text):
        GroupSpec(text)  # raises on malformed factor lists
        return ", ".join(p.strip() for p in text.split(","))

    return parse, str


def _groups():
    g_parse, _ = _group()

    def parse(text):
        parts = [p for p in text.split(";") if p.strip()]
        if not parts:
            raise ValueError("empty group list")
        return tuple(g_parse(p) for p in parts)

    def show(v):
        return "; ".join(v)
    return parse, show


def _scaling():
    def parse(text):
        f = parse_scaling(text)
        return f.describe()

    return parse, str


def _complex():
    def parse(text):
        parts = text.split()
        if len(parts) != 2:
            raise ValueError("expected 'RE IM'")
        z = complex(float(parts[0]), float(parts[1]))
        if abs(z) >= 1:
            raise ValueError("disk center must lie inside the unit disk")
        return z

    def show(v):
        return f"{v.real!r} {v.imag!r}"
    return parse, show


def _generators():
    def parse(text):
        out = []
        for chunk in text.split(";"):
            nums = chunk.replace(",", " ").split()
            if len(nums) != 4:
                raise ValueError("each generator needs four coefficients a b c d")
            a, b, c, d = (float(x) for x in nums)
            if a * d - b * c <= 1e-12:
                raise ValueError("generator needs a positive determinant")
            out.append((a, b, c, d))
        return tuple(out)

    def show(v):
        return "; ".join(" ".join(repr(x) for x in g) for g in v)
    return parse, show


def _bool():
    def parse(text):
        t = text.lower()
        if t in ("true", "yes", "1"):
            return True
        if t in ("false", "no", "0"):
            return False
        raise ValueError("expected true or false")

    def show(v):
        return "true" if v else "false"
    return parse, show


def _names():
    def parse(text):
        names = [p.strip() for p in text.split(",") if p.strip()]
        return tuple(names)

    def show(v):
        return ", ".join(v)
    return parse, show


def _text():
    def parse(text):
        return text

    return parse, str


# key -> (parser, printer, description)
PARAMS = {
    "group": (*_group(), "factor list, e.g. Z^2, Z"),
    "groups": (*_groups(), "factor lists separated by ';'"),
    "factor": (*_int(0), "index of the parabolic factor"),
    "coset": (*_text(), "coset representative as a word ('' for H itself)"),
    "f": (*_scaling(), "scaling function: geometric MU (0<MU<1) or polynomial K"),
    "lambdas": (*_list(_float(1.0, lo_open=True)), "slowness grid, each > 1"),
    "lam": (*_float(1.0, lo_open=True), "slowness bound > 1"),
    "kappa": (*_float(1.0, lo_open=True), "condition constant > 1"),
    "mu": (*_float(0.0, True, 1.0, True), "geometric ratio in (0, 1)"),
    "r": (*_list(_int(1, 4)), "geodesic lengths, 1..4"),
    "radii": (*_list(_int(1, 12)), "ball radii, 1..12"),
    "pool_radius": (*_int(1), "subgroup sampling radius"),
    "samples": (*_int(1), "sample count"),
    "max_pairs": (*_int(1), "pair budget"),
    "hop": (*_int(1), "subgroup step length"),
    "level_range": (*_list(_int(0)), "two word lengths LO HI"),
    "d": (*_list(_int(0)), "neighbourhood sizes"),
    "l": (*_int(1), "tightness window"),
    "c": (*_float(1.0), "quasigeodesic constant >= 1"),
    "e": (*_int(0), "horospherical flank length"),
    "k": (*_int(3), "betweenness constant > 2"),
    "m": (*_int(3), "separation constant"),
    "N": (*_int(16, 1 << 15), "circle grid size"),
    "L": (*_int(0, 8), "truncation word length"),
    "truncations": (*_list(_int(0, 8)), "truncation word lengths"),
    "levels": (*_list(_int(0, 8)), "classification levels"),
    "sample_levels": (*_list(_int(0, 8)), "classification levels for random points"),
    "rho": (*_float(0.0, True), "base disk radius > 0"),
    "center": (*_complex(), "base disk center RE IM"),
    "generators": (*_generators(), "Möbius maps as 'a b c d' separated by ';'"),
    "conical_target": (*_float(0.0, False, 1.0), "required conical fraction"),
}

RUN_KEYS = {
    "seed": (*_int(0), "random seed"),
    "output": (*_text(), "output directory"),
    "experiments": (*_names(), "experiments in execution order"),
    "parallel": (*_bool(), "run experiments concurrently"),
}

DEFAULTS = {"k": 4, "N": 512, "m": 4}


@dataclass
class RunConfig:
    seed: int = 0
    output: str | None = None
    experiments: tuple = ()
    parallel: bool = False
    params: dict = field(default_factory=dict)     # explicitly set shared parameters
    sections: dict = field(default_factory=dict)   # experiment -> overrides

    def shared(self, key: str):
        """Shared parameter value, falling back to the documented default."""
        return self.params.get(key, DEFAULTS.get(key))

    @property
    def k(self) -> int:
        return self.shared("k")

    @property
    def N(self) -> int:
        return self.shared("N")

    @property
    def m(self) -> int:
        return self.shared("m")

    def digest(self) -> str:
        return hashlib.sha256(serialize_config(self).encode()).hexdigest()


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse_config(text: str, registry=None) -> RunConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    if registry is None:
        from .registry import REGISTRY as registry
    errors: list[str] = []
    cfg = RunConfig()
    seen_top: dict[str, int] = {}
    section = None
    section_lines: dict[str, int] = {}
    seen_in: dict[str, dict] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                errors.append(f"line {no}: malformed section header {raw.strip()!r}")
                section = "\0invalid"
                continue
            section = line[1:-1].strip()
            if section in section_lines:
                errors.append(f"line {no}: duplicate section [{section}] "
                              f"(first at line {section_lines[section]})")
            section_lines.setdefault(section, no)
            cfg.sections.setdefault(section, {})
            seen_in.setdefault(section, {})
            continue
        if "=" not in line:
            errors.append(f"line {no}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            errors.append(f"line {no}: missing key")
            continue
        if section == "\0invalid":
            continue
        if section is None:
            if key in seen_top:
                errors.append(f"line {no}: duplicate key {key!r} (first at line {seen_top[key]})")
                continue
            seen_top[key] = no
            if key in RUN_KEYS:
                parse = RUN_KEYS[key][0]
                try:
                    setattr(cfg, key, parse(value))
                except ValueError as exc:
                    errors.append(f"line {no}: {key}: {exc}")
                continue
            if key not in PARAMS:
                errors.append(f"line {no}: unknown key {key!r}")
                continue
            try:
                cfg.params[key] = PARAMS[key][0](value)
            except ValueError as exc:
                errors.append(f"line {no}: {key}: {exc}")
            continue
        # inside an experiment section
        if key in seen_in[section]:
            errors.append(f"line {no}: duplicate key {key!r} in [{section}] "
                          f"(first at line {seen_in[section][key]})")
            continue
        seen_in[section][key] = no
        allowed = registry[section].keys if section in registry else None
        if key in RUN_KEYS:
            errors.append(f"line {no}: {key!r} is a run setting and belongs at the top")
            continue
        if key not in PARAMS or (allowed is not None and key not in allowed):
            errors.append(f"line {no}: unknown key {key!r} for [{section}]")
            continue
        try:
            cfg.sections[section][key] = PARAMS[key][0](value)
        except ValueError as exc:
            errors.append(f"line {no}: {key}: {exc}")
    listed = set()
    exp_line = seen_top.get("experiments", 0)
    for name in cfg.experiments:
        if name not in registry:
            errors.append(f"line {exp_line}: unknown experiment {name!r}")
        if name in listed:
            errors.append(f"line {exp_line}: experiment {name!r} listed twice")
        listed.add(name)
    for name, no in section_lines.items():
        if name not in listed:
            errors.append(f"line {no}: section [{name}] does not match a listed experiment")
    if not errors:
        from .registry import resolve_kwargs
        for name in cfg.experiments:
            exp = registry[name]
            for key in exp.convert:
                lines = seen_in.get(name, {})
                no = lines.get(key, seen_top.get(key))
                if no is None:
                    continue
                try:
                    resolve_kwargs(exp, cfg)
                except ValueError as exc:
                    errors.append(f"line {no}: [{name}] {key}: {exc}")
                    break
    if errors:
        raise ConfigError(errors)
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text; parsing it gives back an equal config."""
    lines = [f"seed = {cfg.seed}"]
    if cfg.output is not None:
        lines.append(f"output = {cfg.output}")
    lines.append(f"experiments = {', '.join(cfg.experiments)}")
    if cfg.parallel:
        lines.append("parallel = true")
    for key in sorted(cfg.params):
        lines.append(f"{key} = {PARAMS[key][1](cfg.params[key])}")
    for name in sorted(cfg.sections):
        lines.append("")
        lines.append(f"[{name}]")
        for key in sorted(cfg.sections[name]):
            lines.append(f"{key} = {PARAMS[key][1](cfg.sections[name][key])}")
    return "\n".join(lines) + "\n"
