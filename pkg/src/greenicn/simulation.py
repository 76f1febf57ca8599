"""Hourly simulation loop: weather -> green ratios -> routes -> requests -> power states.

Hop units count links between hosts: a client sits one link before its
access router and a server one link past its router, so a chunk found at
the client's own router costs one unit and a chunk from the origin costs
the router path length plus two. With ``reply_symmetry`` the reply's trip
back is counted as well, doubling every figure.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .caching import (DEFAULT_BITS_PER_ENTRY, DEFAULT_HASHES, REDIRECT, REPLY, ChunkPacket, ContentStore,
                      Strategy, make_strategy, rebuild_summary)
from .energy import (DEFAULT_PANEL_RATING_W, PowerState, RouterEnergyProfile, TurbinePowerCurve, brown_power,
                     green_ratio, power_demand, renewable_supply)
from .routing import GradientField, HopTable, RouteTable, default_hop_budget, refresh_routes, shortest_descent
from .topology import Topology
from .weather import WeatherSeries
from .workload import DEFAULT_RATE, Catalog, RequestEvent, generate_requests

log = logging.getLogger(__name__)

DEFAULT_WARMUP_HOURS = 24


@dataclass
class World:
    """Everything a run shares regardless of routing weight or caching strategy."""

    topo: Topology
    weather: Mapping[str, WeatherSeries]  # per location, already cut to the simulated window
    profiles: Mapping[str, RouterEnergyProfile]
    catalog: Catalog
    curve: TurbinePowerCurve
    panel_rating: float = DEFAULT_PANEL_RATING_W
    request_seed: int = 0

    def __post_init__(self):
        for node in self.topo.nodes:
            if self.profiles[node].n_line_cards != self.topo.degree(node):
                raise ValueError(f"router {node}: line-card count differs from its degree")
        lengths = {len(self.weather[self.topo.locations[n]]) for n in self.topo.nodes}
        if len(lengths) != 1:
            raise ValueError("weather series of the routers' locations differ in length")
        self.hops = HopTable(self.topo)

    @property
    def horizon(self) -> int:
        return len(self.weather[self.topo.locations[self.topo.nodes[0]]])

    def pairs(self) -> list[tuple[str, str]]:
        return [(c, s) for c in self.topo.clients for s in self.topo.servers]

    def supplies(self, hour: int) -> dict[str, float]:
        out = {}
        for node in self.topo.nodes:
            w = self.weather[self.topo.locations[node]]
            out[node] = renewable_supply(self.profiles[node].sizing, w.wind_speed[hour], w.ghi[hour],
                                         self.curve, self.panel_rating).total
        return out


@dataclass
class RoutePlan:
    """Adopted routes per hour for one routing weight; independent of the caching strategy."""

    alpha: float
    supplies: list[dict[str, float]]
    green: list[dict[str, float]]
    tables: list[RouteTable]
    failures: list[int]


def plan_routes(world: World, alpha: float, hop_budget: int | None = None) -> RoutePlan:
    hop_budget = hop_budget or default_hop_budget(world.topo)
    pairs = world.pairs()
    table = RouteTable()
    plan = RoutePlan(alpha, [], [], [], [])
    for hour in range(world.horizon):
        supply = world.supplies(hour)
        green = {n: green_ratio(supply[n], world.profiles[n].all_on_demand) for n in world.topo.nodes}
        field_ = GradientField(world.topo, alpha, green, world.hops)
        table, failed = refresh_routes(world.topo, field_, pairs, table, hop_budget)
        plan.supplies.append(supply)
        plan.green.append(green)
        plan.tables.append(table)
        plan.failures.append(failed)
    return plan


@dataclass
class HourlyCounters:
    hour: int
    requests: int = 0
    hits: int = 0
    failed_requests: int = 0
    redirects: int = 0
    hop_units: int = 0
    baseline_hop_units: int = 0
    packets: dict = field(default_factory=dict)
    green_packets: float = 0.0
    brown_packets: float = 0.0
    brown_wh: float = 0.0
    baseline_brown_wh: float = 0.0
    failed_discoveries: int = 0
    used_links: set = field(default_factory=set)
    router_green: dict = field(default_factory=dict)
    line_cards_on: dict = field(default_factory=dict)


class RequestOutcome(NamedTuple):
    served_at: str | None  # router that held the chunk; None when the origin server answered
    hop_units: int
    hit: bool
    redirected: bool


def _link(a, b):
    return (a, b) if a <= b else (b, a)


def route_request(event: RequestEvent, server: str, path: Sequence[str] | None, stores: Mapping[str, ContentStore],
                  strategy: Strategy, summaries: Mapping | None, counters: HourlyCounters, *, hops: HopTable,
                  green: Mapping[str, float], rng, reply_symmetry: bool = True) -> RequestOutcome:
    """Serve one request along its adopted path and update ``counters``.

    The first router holding the chunk answers; under NbSC a miss may be
    redirected once to a neighbour advertising the chunk. If the neighbour
    turns out not to have it, the request continues from there to the
    server on a shortest path. Replies retrace the request, and the
    admission policy runs only on routers of the adopted path.
    """
    scale = 2 if reply_symmetry else 1
    baseline = hops.distance(event.client, server) + 2
    counters.requests += 1
    counters.baseline_hop_units += scale * baseline

    if path is None:
        path = shortest_descent(hops, event.client, server)
        counters.failed_requests += 1
        _account(counters, list(path), None)
        counters.hop_units += scale * baseline
        return RequestOutcome(None, baseline, False, False)

    chunk = event.chunk_id
    on_path = set(path)
    visited: list[str] = []
    served_at = None
    admit_from = len(path) - 1  # index of the first router, going downstream, that may admit
    redirected = False
    for k, router in enumerate(path):
        visited.append(router)
        nbr_summaries = summaries.get(router, ()) if summaries is not None else ()
        action, target = strategy.respond(stores[router], chunk, nbr_summaries, on_path, green, rng)
        if action == REPLY:
            served_at = router
            admit_from = k - 1
            break
        if action == REDIRECT:
            redirected = True
            admit_from = k
            visited.append(target)
            if stores[target].lookup(chunk):
                served_at = target
            else:
                for q in shortest_descent(hops, target, server)[1:]:
                    visited.append(q)
                    if stores[q].lookup(chunk):
                        served_at = q
                        break
            break

    units = len(visited) + (1 if served_at is None else 0)
    counters.hop_units += scale * units
    if served_at is not None:
        counters.hits += 1
    if redirected:
        counters.redirects += 1
    _account(counters, visited, served_at)

    packet = ChunkPacket(chunk, len(path))
    for router in reversed(path[: admit_from + 1]):
        strategy.admit(stores[router], packet, rng)
    return RequestOutcome(served_at, units, served_at is not None, redirected)


def _account(counters: HourlyCounters, visited: list[str], served_at):
    pk = counters.packets
    for r in visited:
        pk[r] = pk.get(r, 0) + 1
    reply_path = visited[:-1] if served_at is not None else visited
    for r in reply_path:
        pk[r] = pk.get(r, 0) + 1
    used = counters.used_links
    for a, b in zip(visited, visited[1:]):
        used.add(_link(a, b))


@dataclass
class SimulationResult:
    hours: list[HourlyCounters]
    warmup: int

    @property
    def measured(self) -> list[HourlyCounters]:
        return self.hours[self.warmup:]


def simulate(world: World, alpha: float, strategy: str | Strategy, *, seed: int = 0,
             capacity: int = 4096, rate: int = DEFAULT_RATE, filter_bits: int | None = None,
             hash_count: int = DEFAULT_HASHES, reply_symmetry: bool = True,
             warmup: int = DEFAULT_WARMUP_HOURS, hop_budget: int | None = None,
             plan: RoutePlan | None = None) -> SimulationResult:
    """Run the hourly loop over the world's weather window.

    ``seed`` drives the strategy's coin flips and neighbour picks; the
    request stream comes from ``world.request_seed`` so runs differing only
    in ``alpha`` or strategy see the same requests.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    strat = make_strategy(strategy) if isinstance(strategy, str) else strategy
    if plan is None:
        plan = plan_routes(world, alpha, hop_budget)
    elif plan.alpha != alpha or len(plan.tables) != world.horizon:
        raise ValueError("route plan does not match this run")
    topo = world.topo
    rng = np.random.default_rng(seed)
    stores = {n: ContentStore(capacity, n) for n in topo.nodes}
    bits = filter_bits or max(1, DEFAULT_BITS_PER_ENTRY * capacity)
    clients = topo.clients
    edge_index = {n: {v: i for i, v in enumerate(topo.neighbors(n))} for n in topo.nodes}
    hours = []
    for hour in range(world.horizon):
        counters = HourlyCounters(hour, failed_discoveries=plan.failures[hour])
        table = plan.tables[hour]
        green = plan.green[hour]
        summaries = None
        if strat.cooperative:
            own = {n: rebuild_summary(stores[n], bits, hash_count, hour) for n in topo.nodes}
            summaries = {n: [own[v] for v in topo.neighbors(n)] for n in topo.nodes}

        events = generate_requests(world.catalog, clients, rate, hour, world.request_seed)
        for ev in events:
            server = world.catalog.server_of(ev.chunk_id)
            path = table.get(ev.client, server)
            route_request(ev, server, path, stores, strat, summaries, counters, hops=world.hops,
                          green=green, rng=rng, reply_symmetry=reply_symmetry)

        if rate > 0:
            for p in table.paths.values():
                for a, b in zip(p, p[1:]):
                    counters.used_links.add(_link(a, b))
        _energy(world, plan.supplies[hour], counters, edge_index)
        hours.append(counters)
    if warmup >= len(hours):
        log.warning("warm-up of %d hours covers the whole %d-hour window; measuring every hour",
                    warmup, len(hours))
        warmup = 0
    return SimulationResult(hours, warmup)


def _energy(world: World, supplies: Mapping[str, float], counters: HourlyCounters, edge_index):
    cards_on = {n: [False] * world.topo.degree(n) for n in world.topo.nodes}
    for a, b in counters.used_links:
        cards_on[a][edge_index[a][b]] = True
        cards_on[b][edge_index[b][a]] = True
    for node in world.topo.nodes:
        prof = world.profiles[node]
        supply = supplies[node]
        state = PowerState(tuple(cards_on[node]))
        counters.line_cards_on[node] = state.line_cards_on
        counters.brown_wh += brown_power(supply, prof, state)
        counters.baseline_brown_wh += max(0.0, prof.all_on_demand - supply)
        g = green_ratio(supply, power_demand(prof, state))
        counters.router_green[node] = g
        n_pk = counters.packets.get(node, 0)
        if n_pk:
            counters.green_packets += n_pk * g
            counters.brown_packets += n_pk * (1.0 - g)
