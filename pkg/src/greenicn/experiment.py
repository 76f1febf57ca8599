"""Sweep orchestration: build worlds, run (alpha, season, strategy, scenario) cells, write CSVs."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .energy import RouterEnergyProfile, TurbinePowerCurve, load_turbine_curves, optimal_beta
from .metrics import summarize
from .simulation import World, plan_routes, simulate
from .topology import assign_roles, load_topology, synthetic_isp
from .weather import (HOURS_PER_YEAR, DEFAULT_SEASONS, SeasonWindow, WeatherProfile, load_weather_csv,
                      season_slice, synthesize_weather)
from .workload import build_catalog, scenario_capacities, scenario_sizing

log = logging.getLogger(__name__)

SUMMARY_HEADER = ("alpha", "season", "strategy", "scenario", "seed", "hit_rate", "footprint_reduction",
                  "green_brown_ratio", "brown_packet_reduction", "brown_energy_savings", "failed_discoveries")
HOURLY_HEADER = ("hour", "requests", "hits", "hop_units", "baseline_hop_units", "green_packets", "brown_packets",
                 "brown_watt_hours", "baseline_brown_watt_hours")
MIX_HEADER = ("router", "location", "capacity_c", "optimal_beta", "avg_green_ratio")


def derive_seed(master: int, *parts) -> int:
    """Stable 63-bit seed from the master seed and cell coordinates."""
    blob = json.dumps([master, *[str(p) for p in parts]]).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(round(value, 12))
    return str(value)


# -- world construction ----------------------------------------------------

def turbine_curve(cfg: RunConfig) -> TurbinePowerCurve:
    if isinstance(cfg.turbine, dict):
        return TurbinePowerCurve.from_points(cfg.turbine["points"], cfg.turbine.get("name", "custom"))
    curves = load_turbine_curves()
    if cfg.turbine not in curves:
        raise ValueError(f"turbine: unknown curve {cfg.turbine!r}; available {sorted(curves)}")
    return curves[cfg.turbine]


def load_network(cfg: RunConfig):
    if cfg.topology is not None:
        topo = load_topology(cfg.resolve(cfg.topology))
    else:
        opts = dict(cfg.synthetic_topology)
        topo = synthetic_isp(int(opts.get("routers", 50)), int(opts.get("locations", 8)),
                             int(opts.get("seed", derive_seed(cfg.seed, "topology"))), int(opts.get("attach", 2)))
    return assign_roles(topo, cfg.servers, cfg.clients)


def random_profile(rng) -> WeatherProfile:
    wind_mean = float(rng.uniform(3.0, 9.0))
    return WeatherProfile(solar_amplitude=float(rng.uniform(500.0, 1000.0)), wind_mean=wind_mean,
                          wind_variance=float((0.5 * wind_mean) ** 2),
                          seasonal_modulation=float(rng.uniform(0.2, 0.5)))


def annual_weather(cfg: RunConfig, locations) -> dict:
    if cfg.weather is not None:
        series = load_weather_csv(cfg.resolve(cfg.weather))
        missing = sorted(set(locations) - set(series))
        if missing:
            raise ValueError(f"weather: no series for locations {', '.join(missing[:10])}")
        return series
    opts = dict(cfg.synthetic_weather or {})
    seed = int(opts.get("seed", derive_seed(cfg.seed, "weather")))
    horizon = int(opts.get("horizon_hours", HOURS_PER_YEAR))
    fixed = opts.get("locations", {})
    default = opts.get("profile")
    out = {}
    for loc in sorted(set(locations)):
        loc_seed = derive_seed(seed, "location", loc)
        if loc in fixed:
            profile = WeatherProfile(**fixed[loc])
        elif default is not None:
            profile = WeatherProfile(**default)
        else:
            profile = random_profile(np.random.default_rng(derive_seed(loc_seed, "profile")))
        out[loc] = synthesize_weather(loc_seed, profile, horizon, loc)
    return out


def season_windows(cfg: RunConfig) -> list[SeasonWindow]:
    return [DEFAULT_SEASONS[s] if isinstance(s, str) else SeasonWindow(s["name"], int(s["start_hour"]),
                                                                      int(s["length_hours"]))
            for s in cfg.seasons]


def beta_grid(cfg: RunConfig) -> tuple[float, ...]:
    n = int(round(1.0 / cfg.beta_step))
    grid = sorted({round(min(1.0, i * cfg.beta_step), 10) for i in range(n + 1)} | {1.0})
    return tuple(grid)


@dataclass
class Network:
    """Topology, weather and sizing for one scenario; shared by all of its seasons."""

    topo: object
    annual: dict
    profiles: dict
    curve: TurbinePowerCurve


def build_network(cfg: RunConfig, scenario: str, topo=None, annual=None) -> Network:
    topo = topo or load_network(cfg)
    annual = annual or annual_weather(cfg, topo.locations.values())
    curve = turbine_curve(cfg)
    demands = {n: cfg.chassis_w + cfg.line_card_w * topo.degree(n) for n in topo.nodes}
    sizings = scenario_sizing(scenario, topo.nodes, annual, demands, topo.locations,
                              derive_seed(cfg.seed, "capacity", scenario), curve, cfg.panel_rating_w,
                              beta_grid(cfg))
    profiles = {n: RouterEnergyProfile.uniform(topo.degree(n), cfg.chassis_w, cfg.line_card_w, sizings[n])
                for n in topo.nodes}
    return Network(topo, annual, profiles, curve)


def build_world(cfg: RunConfig, net: Network, window: SeasonWindow) -> World:
    weather = {loc: season_slice(net.annual[loc], window) for loc in set(net.topo.locations.values())}
    catalog = build_catalog(cfg.catalog_size, cfg.zipf_s, net.topo.servers, derive_seed(cfg.seed, "catalog"))
    return World(net.topo, weather, net.profiles, catalog, net.curve, cfg.panel_rating_w,
                 request_seed=derive_seed(cfg.seed, "requests", window.name))


# -- cells -----------------------------------------------------------------

@dataclass
class Cell:
    alpha: float
    season: str
    strategy: str
    scenario: str
    seed: int = 0

    @property
    def name(self) -> str:
        return f"alpha={self.alpha:g}_season={self.season}_strategy={self.strategy}_scenario={self.scenario}"


@dataclass
class CellResult:
    cell: Cell
    summary: dict | None = None
    hourly_file: str | None = None
    error: str | None = None


@dataclass
class ExperimentResult:
    out_dir: Path
    cells: list[CellResult] = field(default_factory=list)

    @property
    def failed(self) -> list[CellResult]:
        return [c for c in self.cells if c.error is not None]


def cell_seed(cfg: RunConfig, alpha: float, season: str, strategy: str, scenario: str) -> int:
    return derive_seed(cfg.seed, repr(float(alpha)), season, strategy, scenario)


def run_cell(cfg: RunConfig, world: World, cell: Cell, plan=None, baseline=None):
    """Simulate one cell; returns (summary row dict, hourly rows)."""
    kwargs = dict(capacity=cfg.cache_capacity, rate=cfg.request_rate,
                  filter_bits=cfg.bloom_bits_per_entry * max(1, cfg.cache_capacity),
                  hash_count=cfg.bloom_hashes, reply_symmetry=cfg.reply_symmetry, warmup=cfg.warmup_hours,
                  hop_budget=cfg.hop_budget_factor * len(world.topo))
    if baseline is None:
        base_plan = plan if plan is not None and plan.alpha == 0.0 else None
        baseline = simulate(world, 0.0, "none", seed=cell_seed(cfg, 0.0, cell.season, "none", cell.scenario),
                            plan=base_plan, **kwargs)
    result = simulate(world, cell.alpha, cell.strategy, seed=cell.seed, plan=plan, **kwargs)
    report = summarize(result.measured, baseline.measured[: len(result.measured)])
    row = {"alpha": cell.alpha, "season": cell.season, "strategy": cell.strategy, "scenario": cell.scenario,
           "seed": cfg.seed, "hit_rate": report.hit_rate, "footprint_reduction": report.footprint_reduction,
           "green_brown_ratio": report.green_brown_ratio, "brown_packet_reduction": report.brown_packet_reduction,
           "brown_energy_savings": report.brown_energy_savings, "failed_discoveries": report.failed_discoveries}
    hourly = [(h.hour, h.requests, h.hits, h.hop_units, h.baseline_hop_units, h.green_packets, h.brown_packets,
               h.brown_wh, h.baseline_brown_wh) for h in result.hours]
    return row, hourly, baseline


def write_rows(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def resolved_config(cfg: RunConfig) -> dict:
    d = cfg.to_dict()
    for key in ("topology", "weather"):
        if d[key] is not None:
            d[key] = str(cfg.resolve(d[key]).resolve())
    return d


def run_experiment(cfg: RunConfig, out_dir: str | Path | None = None, only: Cell | None = None) -> ExperimentResult:
    """Run every (alpha, season, strategy, scenario) cell of ``cfg``.

    Writes ``hourly/<cell>.csv`` per cell, ``summary.csv`` and
    ``manifest.json`` under ``out_dir``. A failing cell is logged and
    listed in the manifest; the others still complete.
    """
    out = Path(out_dir if out_dir is not None else cfg.resolve(cfg.output))
    out.mkdir(parents=True, exist_ok=True)
    result = ExperimentResult(out)
    windows = season_windows(cfg)
    topo = load_network(cfg)
    annual = annual_weather(cfg, topo.locations.values())
    for scenario in cfg.scenarios:
        if only is not None and scenario != only.scenario:
            continue
        net = build_network(cfg, scenario, topo, annual)
        for window in windows:
            if only is not None and window.name != only.season:
                continue
            world = build_world(cfg, net, window)
            baseline = None
            for alpha in cfg.alphas:
                if only is not None and alpha != only.alpha:
                    continue
                plan = None
                for strategy in cfg.strategies:
                    if only is not None and strategy != only.strategy:
                        continue
                    cell = Cell(alpha, window.name, strategy, scenario,
                                cell_seed(cfg, alpha, window.name, strategy, scenario))
                    cr = CellResult(cell)
                    try:
                        if plan is None:
                            plan = plan_routes(world, alpha, cfg.hop_budget_factor * len(world.topo))
                        row, hourly, baseline = run_cell(cfg, world, cell, plan, baseline)
                        cr.summary = row
                        cr.hourly_file = f"hourly/{cell.name}.csv"
                        write_rows(out / cr.hourly_file, HOURLY_HEADER, hourly)
                    except Exception as exc:  # keep the sweep going; the manifest records it
                        log.exception("cell %s failed", cell.name)
                        cr.error = f"{type(exc).__name__}: {exc}"
                    result.cells.append(cr)
    done = [c for c in result.cells if c.summary is not None]
    write_rows(out / "summary.csv", SUMMARY_HEADER, ([c.summary[k] for k in SUMMARY_HEADER] for c in done))
    manifest = {
        "config": resolved_config(cfg),
        "config_sha256": cfg.digest(),
        "master_seed": cfg.seed,
        "cells": [{"name": c.cell.name, "alpha": c.cell.alpha, "season": c.cell.season,
                   "strategy": c.cell.strategy, "scenario": c.cell.scenario, "cell_seed": c.cell.seed,
                   "request_seed": derive_seed(cfg.seed, "requests", c.cell.season),
                   "hourly_file": c.hourly_file, "status": "failed" if c.error else "ok", "error": c.error}
                  for c in result.cells],
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return result


def rerun_from_manifest(manifest_path: str | Path, cell_name: str, out_dir: str | Path) -> ExperimentResult:
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    entry = next((c for c in manifest["cells"] if c["name"] == cell_name), None)
    if entry is None:
        raise KeyError(f"no cell named {cell_name!r} in {manifest_path}")
    cfg = RunConfig.from_mapping(manifest["config"])
    cell = Cell(entry["alpha"], entry["season"], entry["strategy"], entry["scenario"], entry["cell_seed"])
    return run_experiment(cfg, out_dir, only=cell)


# -- optimal mix report ----------------------------------------------------

def mix_report(cfg: RunConfig, scenario: str | None = None) -> list[tuple]:
    scenario = scenario or cfg.scenarios[0]
    topo = load_network(cfg)
    annual = annual_weather(cfg, topo.locations.values())
    curve = turbine_curve(cfg)
    caps = scenario_capacities(scenario, topo.nodes, derive_seed(cfg.seed, "capacity", scenario))
    grid = beta_grid(cfg)
    rows = []
    for n in topo.nodes:
        demand = cfg.chassis_w + cfg.line_card_w * topo.degree(n)
        weather = annual[topo.locations[n]]
        beta, avg = optimal_beta(weather, caps[n], demand, curve, cfg.panel_rating_w, grid)
        rows.append((n, topo.locations[n], caps[n], beta, avg))
    return rows


def emit_mix_report(cfg: RunConfig, dest: str | Path, scenario: str | None = None) -> list[tuple]:
    rows = mix_report(cfg, scenario)
    write_rows(Path(dest), MIX_HEADER, rows)
    return rows
