"""Command-line entry point: ``energywalk {run,preset,list-presets,selftest}``."""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import EnergyWalkError, NoConvergence
from .harness.config import ConfigError, load_config
from .harness.presets import list_presets, load_preset
from .harness.runner import InvariantViolation, run_scenario
from .harness.selftest import run_selftest

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_INVARIANT = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="energywalk",
                                     description="Energy-ladder walks: classical transport and collision-model coherence.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a JSON config")
    run.add_argument("config")
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument("--no-svg", action="store_true", help="skip SVG plots")

    preset = sub.add_parser("preset", help="run a built-in figure preset")
    preset.add_argument("name")
    preset.add_argument("--out", default="out")
    preset.add_argument("--no-svg", action="store_true")

    sub.add_parser("list-presets", help="list built-in presets")
    sub.add_parser("selftest", help="run the oracle-equivalence and invariant battery")
    return parser


def _execute(cfg, args) -> int:
    report = run_scenario(cfg, args.out, svg_enabled=not args.no_svg)
    print("\n".join(report.lines()))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-presets":
            for name, description in list_presets():
                print(f"{name:8s} {description}")
            return EXIT_OK
        if args.command == "selftest":
            _, failed = run_selftest()
            return EXIT_OK if failed == 0 else EXIT_INVARIANT
        cfg = load_config(args.config) if args.command == "run" else load_preset(args.name)
        return _execute(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except NoConvergence as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvariantViolation, EnergyWalkError) as exc:
        print(f"error: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
