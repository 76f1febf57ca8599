"""Command-line entry point: ``greenicn simulate --config run.yaml``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import ConfigError, RunConfig
from .experiment import derive_seed, emit_mix_report, random_profile, rerun_from_manifest, run_experiment
from .topology import load_topology, synthetic_isp, write_topology
from .weather import HOURS_PER_YEAR, synthesize_weather, write_weather_csv


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _words(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greenicn", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an alpha sweep described by a config file")
    sim.add_argument("--config", required=True)
    sim.add_argument("--alpha", type=_floats, action="extend", help="alpha value(s), comma separated")
    sim.add_argument("--strategy", type=_words, action="extend",
                     help="none, all, cachedbit, nbsc or nbsc-green (comma separated)")
    sim.add_argument("--scenario", type=_words, action="extend", help="A and/or B")
    sim.add_argument("--season", type=_words, action="extend", help="Winter, Spring, Summer, Fall")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out")

    rerun = sub.add_parser("rerun", help="re-run one cell recorded in a manifest")
    rerun.add_argument("--manifest", required=True)
    rerun.add_argument("--cell", required=True, help="cell name as listed in the manifest")
    rerun.add_argument("--out", required=True)

    mix = sub.add_parser("mix-report", help="per-router optimal wind share and mean green ratio")
    mix.add_argument("--config", required=True)
    mix.add_argument("--scenario", choices=("A", "B"))
    mix.add_argument("--seed", type=int)
    mix.add_argument("--out", required=True, help="CSV file to write")

    topo = sub.add_parser("make-topology", help="write a seeded synthetic ISP topology file")
    topo.add_argument("--routers", type=int, default=278)
    topo.add_argument("--locations", type=int, default=27)
    topo.add_argument("--seed", type=int, default=1)
    topo.add_argument("--out", required=True)

    wx = sub.add_parser("make-weather", help="write seeded synthetic weather for a topology's locations")
    wx.add_argument("--topology", required=True)
    wx.add_argument("--seed", type=int, default=1)
    wx.add_argument("--hours", type=int, default=HOURS_PER_YEAR)
    wx.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            cfg = RunConfig.load(args.config).override(
                alphas=args.alpha, strategies=args.strategy, scenarios=args.scenario, seasons=args.season,
                seed=args.seed, output=args.out)
            result = run_experiment(cfg, args.out)
        elif args.command == "rerun":
            result = rerun_from_manifest(args.manifest, args.cell, args.out)
        elif args.command == "mix-report":
            cfg = RunConfig.load(args.config).override(seed=args.seed)
            rows = emit_mix_report(cfg, args.out, args.scenario)
            print(f"wrote {len(rows)} routers to {args.out}")
            return 0
        elif args.command == "make-topology":
            write_topology(synthetic_isp(args.routers, args.locations, args.seed), args.out)
            return 0
        else:
            topo = load_topology(args.topology)
            series = []
            for loc in sorted(set(topo.locations.values())):
                loc_seed = derive_seed(args.seed, "location", loc)
                profile = random_profile(np.random.default_rng(derive_seed(loc_seed, "profile")))
                series.append(synthesize_weather(loc_seed, profile, args.hours, loc))
            write_weather_csv(series, args.out)
            return 0
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    ok = len(result.cells) - len(result.failed)
    print(f"{ok}/{len(result.cells)} cells completed; results in {result.out_dir}")
    for cr in result.failed:
        print(f"failed: {cr.cell.name}: {cr.error}", file=sys.stderr)
    return 1 if result.failed else 0


if __name__ == "__main__":
    sys.exit(main())
