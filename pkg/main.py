#!/usr/bin/env python3
"""Decomposition growth lab: entry point.

Usage:
    python main.py ball --space "grigorchuk@3"
    python main.py decompose --space "z^1@20" --radius 2 --mesh 3R --strategy greedy
    python main.py profile --space "z^2" --ball-radii 4 8 --radii 1..5 --out table.csv
    python main.py pullback --size 10 --scale 3 --radius 4
    python main.py pullback --size 4 --scale 3 --chain runs/pullback_<checksum>/chain.json
    python main.py product --x "z^1@10" --y "z^1@10" --radii 1 2
    python main.py product --chain-x x.json --chain-y y.json
    python main.py fiber --ball-radius 6 --radii 2 4 --stab-radii 4
    python main.py witness --space "z^1@30" --n 1 2 3 --report out.json
    python main.py demo-thm51
    python main.py cache list
    python main.py --config path/to/config.json -v profile
"""

from __future__ import annotations

import argparse
import logging
import shutil
import sys
from pathlib import Path
from typing import List, Optional

# Ensure the package root is on sys.path so absolute imports work
_ROOT = Path(__file__).resolve().parent
if str(_ROOT) not in sys.path:
    sys.path.insert(0, str(_ROOT))

from config.settings import ExperimentConfig
from core.enums import ExitCode
from core.errors import ConfigError, ToolkitError
from core.experiment_engine import ExperimentEngine
from data.ball_cache import CACHE_ENV, BallCache, default_cache_dir
from utils.logging_setup import setup_logging

logger = logging.getLogger("main")

DEFAULTS_PATH = _ROOT / "config" / "defaults.json"


def parse_radii(text: str) -> List[int]:
    """``"1..5"`` or ``"1,2,4"`` as a list of ints."""
    try:
        if ".." in text:
            lo, _, hi = text.partition("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid radii {text!r}; use 'a..b' or 'a,b,c'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Finite-scale decomposition complexity and property A witnesses",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--config", type=str, default=str(DEFAULTS_PATH),
                        help="Path to a config JSON file")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("ball", help="Enumerate a ball and check its metric")
    p.add_argument("--space", required=True, help="Space descriptor, e.g. 'free:2@3'")

    p = sub.add_parser("decompose", help="One (R, n)-decomposition with verification")
    p.add_argument("--space", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--mesh", default=None, help="Mesh rule 'kR' or fixed D (config default if omitted)")
    p.add_argument("--strategy", default=None, choices=["greedy", "grid", "exact"])

    p = sub.add_parser("profile", help="Dimension-growth profile table")
    p.add_argument("--space", action="append", default=None,
                   help="Group descriptor without '@N' (repeatable; config default if omitted)")
    p.add_argument("--ball-radii", type=int, nargs="+", default=None)
    p.add_argument("--radii", type=parse_radii, default=None, help="'a..b' or 'a,b,c'")
    p.add_argument("--mesh-rule", default=None)
    p.add_argument("--out", type=str, default=None, help="Also copy the CSV here")

    p = sub.add_parser("pullback", help="Pull decompositions back along x -> scale*x on a path")
    p.add_argument("--size", type=int, default=10)
    p.add_argument("--scale", type=int, default=3)
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--chain", default=None, help="Stored target chain (JSON); its space is the target")
    p.add_argument("--source", default=None, help="Source space (default path:SIZE)")

    p = sub.add_parser("product", help="Product chain of two spaces")
    p.add_argument("--x", default=None)
    p.add_argument("--y", default=None)
    p.add_argument("--radii", type=int, nargs="+", default=[1, 2])
    p.add_argument("--chain-x", default=None, help="Stored chain (JSON) for the first factor")
    p.add_argument("--chain-y", default=None, help="Stored chain (JSON) for the second factor")

    p = sub.add_parser("fiber", help="Fibered chain of Z2 wr Z over Z")
    p.add_argument("--ball-radius", type=int, default=6)
    p.add_argument("--radii", type=int, nargs="+", default=[2, 4])
    p.add_argument("--stab-radii", type=int, nargs="+", default=[4])
    p.add_argument("--chain", default=None, help="Stored chain (JSON) on the Z-ball of radius 2*BALL_RADIUS")

    p = sub.add_parser("witness", help="Property A witnesses and their verification")
    p.add_argument("--space", default=None)
    p.add_argument("--n", type=int, nargs="+", default=None, help="Witness scales")
    p.add_argument("--vectors", action="store_true", help="Embed the witness vectors in the report")
    p.add_argument("--report", type=str, default=None, help="Also copy report.json here")

    sub.add_parser("demo-thm51", help="(Z wr F_2) x Grigorchuk finite-scale demonstration")

    p = sub.add_parser("cache", help=f"Ball cache (directory overridable via {CACHE_ENV})")
    p.add_argument("action", choices=["list", "clear"])
    return parser


def load_config(path: str) -> ExperimentConfig:
    config_path = Path(path)
    if config_path.exists():
        return ExperimentConfig.load(config_path)
    if config_path != DEFAULTS_PATH:
        raise ConfigError(f"config file {path} not found")
    return ExperimentConfig()


def _copy(src: Path, dest: Optional[str]) -> None:
    if dest:
        Path(dest).parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(src, dest)
        logger.info("Copied %s to %s", src.name, dest)


def run(args: argparse.Namespace) -> None:
    config = load_config(args.config)
    level = logging.DEBUG if args.verbose else logging.INFO

    if args.verb == "cache":
        cache = BallCache(default_cache_dir(config.cache.directory))
        if args.action == "list":
            for entry in cache.entries():
                print(f"{entry.group}@{entry.radius}\t{entry.describe}\t{entry.sphere_sizes}")
        else:
            print(f"removed {cache.clear()} entries from {cache.directory}")
        return

    if args.verb == "profile":
        if args.space:
            config.profile.spaces = args.space
        if args.ball_radii is not None:
            config.profile.ball_radii = args.ball_radii
        if args.radii is not None:
            config.profile.radii = args.radii
        if args.mesh_rule:
            config.decomposition.mesh_rule = args.mesh_rule

    engine = ExperimentEngine(config, log_level=level)
    if args.verb == "ball":
        result = engine.run_ball(args.space)
    elif args.verb == "decompose":
        result = engine.run_decompose(args.space, args.radius, args.mesh, args.strategy)
    elif args.verb == "profile":
        result = engine.run_profile()
        _copy(result.run_dir / "profile.csv", args.out)
    elif args.verb == "pullback":
        result = engine.run_pullback(args.size, args.scale, args.radius, args.chain, args.source)
    elif args.verb == "product":
        result = engine.run_product(args.x, args.y, args.radii, args.chain_x, args.chain_y)
    elif args.verb == "fiber":
        result = engine.run_fiber(args.ball_radius, args.radii, args.stab_radii, args.chain)
    elif args.verb == "witness":
        result = engine.run_witness(args.space, args.n, include_vectors=args.vectors)
        _copy(result.report_path, args.report)
    else:
        result = engine.run_demo()
    print(result.report_path)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    # Console logging until a run folder exists
    setup_logging(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        run(args)
    except ToolkitError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return int(e.exit_code)
    except Exception:
        logger.exception("Unexpected failure")
        return int(ExitCode.FAILURE)
    return int(ExitCode.OK)


if __name__ == "__main__":
    sys.exit(main())
