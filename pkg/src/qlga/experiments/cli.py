"""Command line entry point: ``qlga <verb> [options]``.

Exit codes: 0 success, 3 configuration error, 4 numeric contract violation,
5 output failure.  argparse's own usage errors exit with 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, NumericContractError, OutputError, QLGAError
from .config import config_from_dict, deep_merge, load_config_file, parse_overrides
from .runner import run
from .scenarios import SCENARIOS, scenario_dict

EXIT_OK = 0
EXIT_CONFIG = ConfigError.exit_code
EXIT_NUMERIC = NumericContractError.exit_code
EXIT_IO = OutputError.exit_code

log = logging.getLogger("qlga")


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out-dir", default=default("out"), help="directory for tables and manifest")
    parser.add_argument("--format", choices=("csv", "json"), default=default("csv"))
    parser.add_argument("--seed", type=int, default=default(None), help="seed for randomized initial states")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def _physics_flags(parser: argparse.ArgumentParser, lattice: bool = True) -> None:
    parser.add_argument("--theta", help="rule angle, e.g. pi/3 or 1.047")
    parser.add_argument("--rho", help="rule angle, e.g. pi/4")
    if lattice:
        parser.add_argument("--N", type=int, help="number of lattice sites")
        parser.add_argument("--depth", help="square-well depth (omit for no potential)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlga",
        description="Simulate the one-particle quantum lattice gas automaton and emit data tables.",
    )
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run a YAML config file or a named scenario")
    p.add_argument("config", help="path to a YAML config, or a scenario name such as fig5")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, dotted keys for nesting (repeatable)")

    p = sub.add_parser("dispersion", help="tabulate (k, +omega, -omega)")
    _physics_flags(p, lattice=False)
    p.add_argument("--resolution", type=int, default=256)

    p = sub.add_parser("planewave", help="evolve a plane wave |k, epsilon>")
    _physics_flags(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--epsilon", type=int, choices=(-1, 1), default=1)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("packet", help="evolve a binomial wave packet")
    _physics_flags(p)
    p.add_argument("--k0", help="carrier wave number, e.g. pi/4")
    p.add_argument("--x0", type=int)
    p.add_argument("--s", type=int, help="even packet width")
    p.add_argument("--epsilon", type=int, choices=(-1, 1), default=1)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("spectrum", help="eigenpairs of the global evolution matrix")
    _physics_flags(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--lowest-positive", type=int, metavar="K")
    group.add_argument("--nearest", type=float, metavar="OMEGA")
    p.add_argument("--sweep-count", type=int, help="emit eigenvalue bands over depths in [0, pi]")

    sub.add_parser("list-scenarios", help="show the preset registry")

    for name, action in sub.choices.items():
        _global_flags(action, suppress=True)
    return parser


def _prune(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def _common(args) -> dict:
    out = _prune({"theta": getattr(args, "theta", None), "rho": getattr(args, "rho", None),
                  "N": getattr(args, "N", None)})
    depth = getattr(args, "depth", None)
    if depth is not None:
        out["potential"] = {"kind": "square_well", "depth": depth}
    return out


def config_from_args(args):
    """Translate parsed arguments into a validated ExperimentConfig."""
    if args.verb == "run":
        target = args.config
        if target in SCENARIOS and not Path(target).exists():
            raw = scenario_dict(target)
        else:
            raw = load_config_file(target)
            if "scenario" in raw and raw["scenario"] in SCENARIOS:
                raw = deep_merge(scenario_dict(raw["scenario"]), raw)
        raw = deep_merge(raw, parse_overrides(args.overrides))
    else:
        raw = scenario_dict(args.verb)
        raw = deep_merge(raw, _common(args))
        if args.verb == "dispersion":
            raw["resolution"] = args.resolution
        elif args.verb == "planewave":
            raw = deep_merge(raw, {"initial": {"kind": "plane_wave", "n": args.n, "epsilon": args.epsilon}})
            raw["steps"] = args.steps if args.steps is not None else raw.get("N", 32)
        elif args.verb == "packet":
            raw = deep_merge(raw, {"initial": _prune({"k0": args.k0, "x0": args.x0, "s": args.s,
                                                      "epsilon": args.epsilon})})
            if args.steps is not None:
                raw["steps"] = args.steps
        elif args.verb == "spectrum":
            if args.lowest_positive is not None:
                raw["modes"] = {"kind": "lowest_positive", "count": args.lowest_positive}
            elif args.nearest is not None:
                raw["modes"] = {"kind": "nearest", "omega": args.nearest}
            if args.sweep_count is not None:
                raw["potential"] = {"kind": "square_well"}
                raw["sweep"] = {"start": 0.0, "stop": "pi", "count": args.sweep_count}
                raw["outputs"] = ["bands"]
    if args.seed is not None:
        raw["seed"] = args.seed
    return config_from_dict(raw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.verb == "list-scenarios":
        for name, entry in SCENARIOS.items():
            print(f"{name:<12} {entry.get('description', '')}")
        return EXIT_OK

    try:
        cfg = config_from_args(args)
        manifest = run(cfg, args.out_dir, args.format)
    except QLGAError as exc:
        print(f"qlga: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    print(json.dumps({"manifest": manifest.path, "summary": manifest.summary}, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
