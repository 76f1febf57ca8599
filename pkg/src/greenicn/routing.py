"""Renewable-aware gradient routing: gradient field and hop-by-hop discovery.

A discovery packet walks from the source towards the destination, always
taking the unexplored link with the highest gradient. Each router keeps two
per-session lists: neighbours it received the packet from (``q_in``) and
neighbours it sent it to (``q_out``). A router with no unexplored link sends
the packet back to the most recent entry of ``q_in`` it has not sent to yet.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, NamedTuple

from .topology import Topology, bfs_distances

IN_PROGRESS = "in-progress"
FOUND = "found"
FAILED = "failed"  # backtracking exhausted at the source
BUDGET_EXHAUSTED = "budget-exhausted"


def gradient(alpha: float, green: float, hop: float) -> float:
    return alpha * green + (1.0 - alpha) * hop


class HopTable:
    """Normalised hop scores of every link towards a set of destinations, computed on demand."""

    def __init__(self, topo: Topology):
        self.topo = topo
        self._weights: dict[str, dict[str, int]] = {}
        self._scores: dict[str, dict[str, dict[str, float]]] = {}

    def weights(self, destination: str) -> dict[str, int]:
        if destination not in self._weights:
            if destination not in self.topo:
                raise KeyError(destination)
            self._weights[destination] = bfs_distances(self.topo.adjacency, destination)
        return self._weights[destination]

    def scores(self, destination: str) -> dict[str, dict[str, float]]:
        table = self._scores.get(destination)
        if table is None:
            w = self.weights(destination)
            table = {}
            for i, nbrs in self.topo.adjacency.items():
                ws = [w[k] for k in nbrs]
                hi, lo = max(ws), min(ws)
                span = hi - lo
                table[i] = {k: (1.0 if span == 0 else (hi - w[k]) / span) for k in nbrs}
            self._scores[destination] = table
        return table

    def distance(self, a: str, b: str) -> int:
        return self.weights(b)[a]


class GradientField:
    """Gradient of every link for a given weighting and set of green ratios.

    ``alpha`` = 0 routes purely on hop count, ``alpha`` = 1 purely on the
    green ratio of the next router.
    """

    def __init__(self, topo: Topology, alpha: float, green: Mapping[str, float], hops: HopTable | None = None):
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        self.topo = topo
        self.alpha = alpha
        self.green = green
        self.hops = hops or HopTable(topo)

    def value(self, i: str, j: str, destination: str) -> float:
        return gradient(self.alpha, self.green[j], self.hops.scores(destination)[i][j])

    def row(self, i: str, destination: str) -> list[tuple[str, float]]:
        h = self.hops.scores(destination)[i]
        a, g = self.alpha, self.green
        return [(j, a * g[j] + (1.0 - a) * hj) for j, hj in h.items()]


class TableField:
    """Explicit per-link gradients, for replaying hand-drawn examples."""

    def __init__(self, values: Mapping[tuple[str, str], float], default: float = 0.0):
        self.values = dict(values)
        self.default = default

    def value(self, i, j, destination) -> float:
        return self.values.get((i, j), self.default)


@dataclass
class DiscoverySession:
    source: Hashable
    destination: Hashable
    q_in: dict = field(default_factory=dict)
    q_out: dict = field(default_factory=dict)
    status: str = IN_PROGRESS

    def next_hop(self, topo: Topology, current, incoming, grad) -> Hashable | None:
        """Pick where the discovery packet goes from ``current``.

        Returns the eligible neighbour with the highest gradient (ties to
        the neighbour listed first, i.e. the smallest id), or a backtrack
        target, or None when ``current`` has nowhere left to send it.
        """
        q_in = self.q_in.setdefault(current, [])
        q_out = self.q_out.setdefault(current, [])
        if incoming is not None:
            q_in.append(incoming)
        nxt, best = None, None
        for v in topo.neighbors(current):
            if v in q_in or v in q_out:
                continue
            g = grad.value(current, v, self.destination)
            if best is None or g > best:
                best, nxt = g, v
        if nxt is None:
            for v in reversed(q_in):
                if v not in q_out:
                    nxt = v
                    break
        if nxt is not None:
            q_out.append(nxt)
        return nxt

    def close(self, status: str):
        self.status = status
        self.q_in.clear()
        self.q_out.clear()


class Discovery(NamedTuple):
    status: str
    path: tuple | None
    steps: int
    trace: tuple

    @property
    def found(self) -> bool:
        return self.status == FOUND


def default_hop_budget(topo: Topology) -> int:
    return 4 * len(topo)


def discover(topo: Topology, grad, source, destination, hop_budget: int | None = None) -> Discovery:
    """Walk a discovery packet from ``source`` to ``destination``.

    The returned path is the walk with every detour erased: whenever the
    packet comes back to a router already on the path, the path is cut
    back to that router. If a router other than the source runs out of
    options the packet steps back along the path towards the source.
    """
    if source == destination:
        raise ValueError("source and destination must differ")
    if hop_budget is None:
        hop_budget = default_hop_budget(topo)
    session = DiscoverySession(source, destination)
    path = [source]
    on_path = {source: 0}
    trace = [source]
    current, incoming = source, None
    steps = 0
    while current != destination:
        if steps >= hop_budget:
            session.close(BUDGET_EXHAUSTED)
            return Discovery(BUDGET_EXHAUSTED, None, steps, tuple(trace))
        nxt = session.next_hop(topo, current, incoming, grad)
        steps += 1
        if nxt is None:
            if current == source:
                session.close(FAILED)
                return Discovery(FAILED, None, steps, tuple(trace))
            nxt = path[on_path[current] - 1]
        incoming, current = current, nxt
        trace.append(nxt)
        if nxt in on_path:
            cut = on_path[nxt] + 1
            for dropped in path[cut:]:
                del on_path[dropped]
            del path[cut:]
        else:
            on_path[nxt] = len(path)
            path.append(nxt)
    session.close(FOUND)
    return Discovery(FOUND, tuple(path), steps, tuple(trace))


@dataclass
class RouteTable:
    """Adopted path per (client, server) pair plus a running discovery-failure count."""

    paths: dict = field(default_factory=dict)
    failures: int = 0

    def get(self, source, destination):
        return self.paths.get((source, destination))


def refresh_routes(topo: Topology, grad, pairs: Iterable[tuple], table: RouteTable | None = None,
                   hop_budget: int | None = None) -> tuple[RouteTable, int]:
    """Re-discover every pair; pairs whose discovery fails keep their previous path.

    Returns the updated table and the number of failures in this round.
    """
    table = table if table is not None else RouteTable()
    failed = 0
    new_paths = dict(table.paths)
    for src, dst in pairs:
        result = discover(topo, grad, src, dst, hop_budget)
        if result.found:
            new_paths[(src, dst)] = result.path
        else:
            failed += 1
    return RouteTable(new_paths, table.failures + failed), failed


def shortest_descent(hops: HopTable, start: str, destination: str) -> tuple[str, ...]:
    """Shortest path following strictly decreasing hop count, ties to the smallest id."""
    w = hops.weights(destination)
    path = [start]
    node = start
    while node != destination:
        node = next(v for v in hops.topo.neighbors(node) if w[v] == w[node] - 1)
        path.append(node)
    return tuple(path)
