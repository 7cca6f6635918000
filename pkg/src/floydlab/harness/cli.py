"""Command line entry point: ``floydlab run|check|list|oracle``.

Exit codes: 0 success, 1 a check or oracle failed, 2 configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ConfigError, parse_config

__all__ = ["main", "OUT_ENV"]

OUT_ENV = "FLOYDLAB_OUT"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _load(args):
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {args.config}: {exc.strerror}"])
    cfg = parse_config(text)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _out_dir(args, cfg) -> Path:
    if args.out:
        return Path(args.out)
    root = os.environ.get(OUT_ENV)
    if cfg.output:
        return Path(root, cfg.output) if root else Path(cfg.output)
    return Path(root or "results", f"run-{cfg.digest()[:12]}")


def _cmd_run(args) -> int:
    from .runner import run

    cfg = _load(args)
    out = _out_dir(args, cfg)
    man = run(cfg, out)
    for e in man.entries:
        print(f"{e['status'].upper():7s} {e['name']}")
        for name, ok in e["checks"].items():
            if not ok:
                print(f"        failed check: {name}")
        if "error" in e:
            print(f"        {e['error']}")
    print(f"outputs in {out}")
    return EXIT_OK if man.passed else EXIT_FAIL


def _cmd_check(args) -> int:
    cfg = _load(args)
    print(f"config OK: {len(cfg.experiments)} experiment(s), seed {cfg.seed}, "
          f"hash {cfg.digest()[:12]}")
    return EXIT_OK


def _cmd_list(args) -> int:
    from .config import DEFAULTS, PARAMS
    from .registry import REGISTRY

    for exp in REGISTRY.values():
        print(f"{exp.name}: {exp.summary}")
        print(f"    keys: {', '.join(sorted(exp.keys))}")
    print("\nparameters:")
    for key, (_, _, desc) in PARAMS.items():
        default = f" (default {DEFAULTS[key]})" if key in DEFAULTS else ""
        print(f"    {key}: {desc}{default}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    from .oracles import SUITES, run_suite

    names = args.suites or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        print(f"unknown oracle suite(s): {', '.join(unknown)}", file=sys.stderr)
        return EXIT_CONFIG
    ok = True
    for name in names:
        res = run_suite(name, seed=args.seed or 0)
        print(res.line(), flush=True)
        ok &= res.passed
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="floydlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="execute a config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./results)")
    r.add_argument("--seed", type=int, help="override the config seed")
    c = sub.add_parser("check", help="validate a config without running it")
    c.add_argument("--config", required=True)
    c.add_argument("--seed", type=int)
    sub.add_parser("list", help="show registered experiments and parameters")
    o = sub.add_parser("oracle", help="run the brute-force oracle suites")
    o.add_argument("suites", nargs="*")
    o.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "check": _cmd_check, "list": _cmd_list,
               "oracle": _cmd_oracle}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
