"""Zipf catalogue, constant-rate request stream and per-router infrastructure sizing."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .energy import (DEFAULT_BETA_GRID, DEFAULT_PANEL_RATING_W, InfrastructureSizing, TurbinePowerCurve,
                     optimal_beta, size_infrastructure)

DEFAULT_ZIPF_S = 0.9
DEFAULT_RATE = 10  # requests per client per hour


def zipf_probabilities(n_chunks: int, s: float) -> np.ndarray:
    ranks = np.arange(1, n_chunks + 1, dtype=float)
    w = ranks ** -s
    return w / w.sum()


@dataclass(frozen=True, eq=False)
class Catalog:
    """Chunks ``0..n_chunks-1`` in popularity order, each stored at one server."""

    n_chunks: int
    s: float
    placement: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)

    def server_of(self, chunk_id: int):
        return self.placement[chunk_id]

    def sample(self, rng, size: int) -> np.ndarray:
        return np.searchsorted(self._cdf, rng.random(size), side="right")


def build_catalog(n_chunks: int, s: float, servers: Sequence, seed) -> Catalog:
    if n_chunks < 1:
        raise ValueError("catalogue needs at least one chunk")
    if not servers:
        raise ValueError("catalogue needs at least one server")
    rng = np.random.default_rng(seed)
    picks = rng.integers(len(servers), size=n_chunks)
    placement = tuple(servers[i] for i in picks)
    return Catalog(n_chunks, s, placement, zipf_probabilities(n_chunks, s))


class RequestEvent(NamedTuple):
    hour: int
    client: str
    chunk_id: int


def generate_requests(catalog: Catalog, clients: Sequence, rate: int, hour: int, seed) -> list[RequestEvent]:
    """``rate`` requests per client for one hour, interleaved round-robin across clients."""
    if rate < 0:
        raise ValueError("request rate must be non-negative")
    if rate == 0 or not clients:
        return []
    rng = np.random.default_rng([_seed_int(seed), hour])
    chunks = catalog.sample(rng, rate * len(clients))
    n = len(clients)
    return [RequestEvent(hour, clients[i % n], int(c)) for i, c in enumerate(chunks)]


def _seed_int(seed) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def scenario_capacities(scenario: str, routers: Sequence, seed) -> dict:
    if scenario == "A":
        return {r: 2.0 for r in routers}
    if scenario == "B":
        rng = np.random.default_rng(seed)
        draws = rng.uniform(0.0, 3.0, size=len(routers))
        return {r: float(c) for r, c in zip(routers, draws)}
    raise ValueError(f"unknown scenario {scenario!r}, expected 'A' or 'B'")


def scenario_sizing(scenario: str, routers: Sequence, annual_weather: Mapping, demands: Mapping,
                    locations: Mapping, seed, curve: TurbinePowerCurve,
                    panel_rating: float = DEFAULT_PANEL_RATING_W,
                    beta_grid: Sequence[float] = DEFAULT_BETA_GRID) -> dict[str, InfrastructureSizing]:
    """Size every router's wind/solar plant for scenario A (c = 2) or B (c ~ U[0, 3]).

    The wind share of each router is the one maximising its mean annual
    green ratio at its location.
    """
    caps = scenario_capacities(scenario, routers, seed)
    best: dict = {}
    out = {}
    for r in routers:
        weather = annual_weather[locations[r]]
        key = (locations[r], caps[r])
        if key not in best:
            # the optimum depends on c only, not on the router's absolute demand
            best[key] = optimal_beta(weather, caps[r], 1.0, curve, panel_rating, beta_grid)[0]
        out[r] = size_infrastructure(best[key], caps[r], weather, demands[r], curve, panel_rating)
    return out
