"""Command-line entry point: ``ui-lab <protocol> --config cfg.json``.

Exit codes: 0 success, 1 failed ``verify`` check, 2 configuration error,
3 domain error. Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .checks import run_checks
from .errors import ConfigError, UILabError
from .experiments import PROTOCOLS, ExperimentConfig, run_experiment

SEED_ENV = "UI_LAB_SEED"


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ui-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PROTOCOLS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--out", type=Path, help="write the table here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--shots", type=int, help="override the config's shot count")
        p.add_argument("--seed", type=int, help=f"override the seed (beats ${SEED_ENV})")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="set a parameter; VALUE is parsed as JSON when possible")
        p.add_argument("--workers", type=int, default=None,
                       help="evaluate sweep points concurrently")
    sub.add_parser("verify", help="run the built-in invariant checks")
    return parser


def _load_config(args) -> ExperimentConfig:
    raw = {"protocol": args.command}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", key="config") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}", key="config") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object", key="config")
        raw.setdefault("protocol", args.command)
        if raw["protocol"] != args.command:
            raise ConfigError(f"config is for {raw['protocol']!r}, not {args.command!r}",
                              key="protocol")
    params = dict(raw.get("parameters", {}))
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", key="set")
        params[key] = _parse_value(value)
    raw["parameters"] = params
    cfg = ExperimentConfig.from_dict(raw)

    seed = args.seed
    if seed is None and os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer", key=SEED_ENV) from None
    return cfg.with_overrides(shots=args.shots, seed=seed)


def _error(kind: str, exc: Exception, code: int) -> int:
    payload = {"error": kind, "message": str(exc)}
    if isinstance(exc, ConfigError) and exc.key is not None:
        payload["key"] = exc.key
    print(json.dumps(payload), file=sys.stderr)
    return code


def _verify() -> int:
    results = run_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "verify":
        return _verify()
    try:
        cfg = _load_config(args)
        table = run_experiment(cfg, workers=args.workers)
        text = table.render(args.format)
    except ConfigError as exc:
        return _error("ConfigError", exc, 2)
    except UILabError as exc:
        return _error(type(exc).__name__, exc, 3)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
