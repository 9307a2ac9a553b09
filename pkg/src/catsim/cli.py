"""Command-line entry point: ``catsim run | list | validate``."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .scenarios import list_scenarios, resolve_config, run_scenario, write_outputs

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def load_config(path, scenario=None):
    """Read a JSON config; ``scenario`` fills in (or must match) its ``scenario`` field."""
    if path is None:
        raw = {}
    else:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if scenario is not None:
        if raw.get("scenario", scenario) != scenario:
            raise ConfigError(f"config names scenario {raw['scenario']!r}, command line {scenario!r}")
        raw = dict(raw, scenario=scenario)
    return raw


def build_parser():
    ap = argparse.ArgumentParser(prog="catsim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("scenario")
    run.add_argument("--config", default=None, help="JSON config file")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="output directory")
    sub.add_parser("list", help="list scenarios")
    val = sub.add_parser("validate", help="check a config file and print the resolved form")
    val.add_argument("--config", required=True)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, desc in list_scenarios():
            print(f"{name:22s} {desc}")
        return EXIT_OK
    try:
        if args.command == "validate":
            cfg = resolve_config(load_config(args.config))
            print(json.dumps(cfg, indent=2, sort_keys=True))
            return EXIT_OK
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = resolve_config(load_config(args.config, args.scenario), seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out is not None:
        cfg["output"] = args.out
    report = run_scenario(cfg)
    for c in report.checks:
        print(c.line())
    for path in write_outputs(report, cfg["output"]):
        print(f"wrote {path}")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
