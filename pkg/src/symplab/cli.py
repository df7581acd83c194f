"""Command-line experiment runner.

Usage:
    symplab list
    symplab run --config experiment.cfg [--out DIR] [--set key=value ...]
                [--no-figures]

Config files are flat key=value lines ('#' starts a comment); --set
overrides apply last.  Exit codes: 0 all checks passed, 2 at least one
check failed, 1 usage/configuration/execution error.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .zoo import MapSpecError


def _parse_config_file(path: str) -> dict:
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise experiments.ConfigError(
                    f"{path}:{lineno}: expected key=value, got {line!r}")
            raw[key.strip()] = value.strip()
    return raw


def _apply_overrides(raw: dict, pairs) -> dict:
    for item in pairs or ():
        key, eq, value = item.partition("=")
        if not eq:
            raise experiments.ConfigError(f"--set expects key=value, got {item!r}")
        raw[key.strip()] = value.strip()
    return raw


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="symplab",
                                     description="area-preserving dynamics experiments")
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("list", help="list registered experiments")
    runp = sub.add_parser("run", help="run one experiment from a config file")
    runp.add_argument("--config", required=True, help="flat key=value config file")
    runp.add_argument("--out", default=None, help="output directory (default: 'out')")
    runp.add_argument("--set", action="append", metavar="KEY=VALUE", dest="overrides",
                      help="override a config key (repeatable, later wins)")
    runp.add_argument("--no-figures", action="store_true",
                      help="skip figure rendering")

    args = parser.parse_args(argv)
    if args.command == "list":
        for name, desc in experiments.list_experiments():
            print(f"{name:22s} {desc}")
        return 0
    if args.command != "run":
        parser.print_usage()
        return 1

    try:
        raw = _parse_config_file(args.config)
        raw = _apply_overrides(raw, args.overrides)
        out_dir = args.out or raw.get("out", "out")
        report = experiments.run(raw, out_dir, make_figures=not args.no_figures)
    except (experiments.ConfigError, MapSpecError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # execution failure, not a check failure
        print(f"execution error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    report.print_summary()
    return 0 if report.all_passed else 2


if __name__ == "__main__":
    sys.exit(main())
