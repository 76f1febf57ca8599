"""Router-level ISP graph, role assignment and hop-count fields."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

SERVER = "server"
CLIENT = "client"
TRANSPORT = "transport"


class TopologyError(ValueError):
    pass


def node_key(node_id: str):
    """Sort key: numeric ids in numeric order, ahead of the rest in lexical order."""
    s = str(node_id)
    try:
        return (0, int(s), "")
    except ValueError:
        return (1, 0, s)


@dataclass
class Topology:
    locations: dict[str, str]
    adjacency: dict[str, tuple[str, ...]]
    roles: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], locations: Mapping[str, str] | None = None,
                   roles: Mapping[str, str] | None = None) -> "Topology":
        edges = [(str(a), str(b)) for a, b in edges]
        locations = {str(k): str(v) for k, v in (locations or {}).items()}
        nbrs: dict[str, set[str]] = {n: set() for n in locations}
        for a, b in edges:
            if a == b:
                raise TopologyError(f"self-loop on node {a}")
            for n in (a, b):
                if n not in nbrs:
                    nbrs[n] = set()
                    locations.setdefault(n, n)
            if b in nbrs[a]:
                raise TopologyError(f"duplicate edge {a} {b}")
            nbrs[a].add(b)
            nbrs[b].add(a)
        adjacency = {n: tuple(sorted(v, key=node_key)) for n, v in sorted(nbrs.items(), key=lambda kv: node_key(kv[0]))}
        topo = cls(locations, adjacency, {n: TRANSPORT for n in adjacency})
        if roles:
            topo.roles.update(roles)
        topo.check_connected()
        return topo

    @property
    def nodes(self) -> list[str]:
        return list(self.adjacency)

    def __len__(self):
        return len(self.adjacency)

    def __contains__(self, node):
        return node in self.adjacency

    def neighbors(self, node: str) -> tuple[str, ...]:
        return self.adjacency[node]

    def degree(self, node: str) -> int:
        return len(self.adjacency[node])

    def edges(self) -> list[tuple[str, str]]:
        seen = []
        for a, nb in self.adjacency.items():
            for b in nb:
                if node_key(a) < node_key(b):
                    seen.append((a, b))
        return seen

    def with_role(self, role: str) -> list[str]:
        return [n for n in self.adjacency if self.roles.get(n) == role]

    @property
    def servers(self) -> list[str]:
        return self.with_role(SERVER)

    @property
    def clients(self) -> list[str]:
        return self.with_role(CLIENT)

    def components(self) -> list[list[str]]:
        seen: set[str] = set()
        comps = []
        for start in self.adjacency:
            if start in seen:
                continue
            comp = list(bfs_distances(self.adjacency, start))
            seen.update(comp)
            comps.append(sorted(comp, key=node_key))
        return comps

    def check_connected(self):
        if not self.adjacency:
            raise TopologyError("topology has no nodes")
        comps = self.components()
        if len(comps) > 1:
            listing = "; ".join("{" + ", ".join(c[:10]) + (", ..." if len(c) > 10 else "") + "}" for c in comps)
            raise TopologyError(f"graph is disconnected, {len(comps)} components: {listing}")


def bfs_distances(adjacency: Mapping[str, Iterable[str]], root: str) -> dict[str, int]:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def hop_weights(topo: Topology, destination: str) -> dict[str, int]:
    """Hop count of every router to ``destination``."""
    if destination not in topo:
        raise KeyError(destination)
    return bfs_distances(topo.adjacency, destination)


def normalized_hop(topo: Topology, weights: Mapping[str, int], i: str, j: str) -> float:
    """Closeness of neighbour ``j`` of ``i`` to the destination, rescaled over i's neighbours.

    1 for the neighbour(s) nearest to the destination, 0 for the farthest.
    When every neighbour is equally far all of them score 1.
    """
    nbrs = topo.neighbors(i)
    if j not in nbrs:
        raise ValueError(f"{j} is not a neighbour of {i}")
    ws = [weights[k] for k in nbrs]
    hi, lo = max(ws), min(ws)
    if hi == lo:
        return 1.0
    return (hi - weights[j]) / (hi - lo)


def assign_roles(topo: Topology, n_servers: int, n_clients: int) -> Topology:
    """Highest-degree routers front servers, lowest-degree ones front clients.

    Ties in degree go to the smaller node id in both rankings.
    """
    n = len(topo)
    if n_servers < 0 or n_clients < 0 or n_servers + n_clients > n:
        raise TopologyError(f"cannot place {n_servers} servers and {n_clients} clients on {n} routers")
    by_degree_desc = sorted(topo.adjacency, key=lambda v: (-topo.degree(v), node_key(v)))
    by_degree_asc = sorted(topo.adjacency, key=lambda v: (topo.degree(v), node_key(v)))
    roles = {v: TRANSPORT for v in topo.adjacency}
    servers = by_degree_desc[:n_servers]
    for v in servers:
        roles[v] = SERVER
    picked = 0
    for v in by_degree_asc:
        if picked == n_clients:
            break
        if roles[v] == TRANSPORT:
            roles[v] = CLIENT
            picked += 1
    return Topology(dict(topo.locations), dict(topo.adjacency), roles)


# -- text format -----------------------------------------------------------

def load_topology(source) -> Topology:
    """Read ``node <id> <location>`` and ``edge <a> <b>`` lines; ``#`` starts a comment."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    locations: dict[str, str] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        if kind == "node" and len(parts) == 3:
            if parts[1] in locations:
                raise TopologyError(f"line {lineno}: node {parts[1]} declared twice")
            locations[parts[1]] = parts[2]
        elif kind == "edge" and len(parts) == 3:
            edges.append((parts[1], parts[2]))
        else:
            raise TopologyError(f"line {lineno}: cannot parse {raw.strip()!r}")
    for a, b in edges:
        for n in (a, b):
            if n not in locations:
                raise TopologyError(f"edge references undeclared node {n}")
    return Topology.from_edges(edges, locations)


def write_topology(topo: Topology, dest) -> None:
    lines = [f"node {n} {topo.locations[n]}" for n in topo.nodes]
    lines += [f"edge {a} {b}" for a, b in topo.edges()]
    body = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(body)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)


def synthetic_isp(n_routers: int, n_locations: int, seed: int, attach: int = 2) -> Topology:
    """Seeded POP-structured graph with a heavy-tailed degree distribution.

    Routers are spread over ``n_locations`` cities (city sizes skewed so a
    few large POPs dominate). Each new router links to ``attach`` existing
    routers chosen by preferential attachment, favouring its own city.
    """
    if n_routers < 2:
        raise ValueError("need at least two routers")
    rng = random.Random(seed)
    n_locations = max(1, min(n_locations, n_routers))
    weights = [1.0 / (k + 1) for k in range(n_locations)]
    cities = [f"city{k:02d}" for k in range(n_locations)]
    city_of = [cities[k % n_locations] if k < n_locations else rng.choices(cities, weights)[0]
               for k in range(n_routers)]
    edges: set[tuple[int, int]] = set()
    degree = [0] * n_routers

    def link(a, b):
        key = (min(a, b), max(a, b))
        if a != b and key not in edges:
            edges.add(key)
            degree[a] += 1
            degree[b] += 1

    link(0, 1)
    for new in range(2, n_routers):
        targets: set[int] = set()
        same_city = [v for v in range(new) if city_of[v] == city_of[new]]
        if same_city:
            targets.add(rng.choice(same_city))
        while len(targets) < min(attach, new):
            pool = range(new)
            targets.add(rng.choices(pool, [degree[v] + 1 for v in pool])[0])
        for t in targets:
            link(new, t)
    locations = {str(v): city_of[v] for v in range(n_routers)}
    return Topology.from_edges(((str(a), str(b)) for a, b in sorted(edges)), locations)
