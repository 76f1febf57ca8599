import io

import pytest
from hypothesis import given, settings, strategies as st

from greenicn.topology import (CLIENT, SERVER, TRANSPORT, Topology, TopologyError, assign_roles, bfs_distances,
                               hop_weights, load_topology, normalized_hop, synthetic_isp, write_topology)


def test_line_file():
    topo = load_topology(io.StringIO("node a X\nnode b X\nnode c Y\nedge a b\nedge b c\n"))
    assert {n: topo.degree(n) for n in topo.nodes} == {"a": 1, "b": 2, "c": 1}
    assert topo.locations["c"] == "Y"


def test_comments_and_blank_lines():
    topo = load_topology(io.StringIO("# net\n\nnode 1 A  # first\nnode 2 A\nedge 1 2\n"))
    assert topo.edges() == [("1", "2")]


@pytest.mark.parametrize("text", ["node a X\nedge a a\n", "node a X\nnode b X\nedge a b\nedge b a\n",
                                  "node a X\nnode b X\nnode c X\nedge a b\n", "node a X\nedge a z\n",
                                  "router a X\n"])
def test_malformed_files(text):
    with pytest.raises(TopologyError):
        load_topology(io.StringIO(text))


def test_disconnected_error_lists_components():
    with pytest.raises(TopologyError, match="component"):
        Topology.from_edges([("1", "2"), ("3", "4")])


def test_round_trip(tmp_path):
    topo = synthetic_isp(30, 5, seed=4)
    path = tmp_path / "t.txt"
    write_topology(topo, path)
    back = load_topology(path)
    assert back.adjacency == topo.adjacency and back.locations == topo.locations


def test_sprint_sized_synthetic_roles():
    topo = assign_roles(synthetic_isp(278, 27, seed=1), 40, 80)
    roles = list(topo.roles.values())
    assert len(topo) == 278
    assert (roles.count(SERVER), roles.count(CLIENT), roles.count(TRANSPORT)) == (40, 80, 158)
    assert min(topo.degree(s) for s in topo.servers) >= max(topo.degree(c) for c in topo.clients)


def test_star_hub_is_server():
    topo = assign_roles(Topology.from_edges([("0", "1"), ("0", "2"), ("0", "3"), ("0", "4")]), 1, 2)
    assert topo.servers == ["0"]
    assert topo.clients == ["1", "2"]


def test_too_many_roles():
    with pytest.raises(TopologyError):
        assign_roles(Topology.from_edges([("1", "2")]), 1, 2)


def test_bfs_line(line3):
    assert hop_weights(line3, "3") == {"1": 2, "2": 1, "3": 0}


def test_bfs_cycle_opposite():
    cycle = Topology.from_edges([("1", "2"), ("2", "3"), ("3", "4"), ("4", "1")])
    assert hop_weights(cycle, "1")["3"] == 2


def test_normalized_hop_values():
    # node i with neighbours at distances 1, 2 and 3 from the destination
    topo = Topology.from_edges([("i", "a"), ("i", "b"), ("i", "c"), ("a", "d"), ("b", "x"), ("x", "d"),
                                ("c", "y"), ("y", "z"), ("z", "d")])
    w = hop_weights(topo, "d")
    assert (w["a"], w["b"], w["c"]) == (1, 2, 3)
    assert [normalized_hop(topo, w, "i", j) for j in "abc"] == [1.0, 0.5, 0.0]


def test_normalized_hop_equal_weights_is_one(line3):
    assert normalized_hop(line3, hop_weights(line3, "1"), "2", "1") == 1.0


def test_synthetic_is_seeded():
    assert synthetic_isp(40, 6, 9).adjacency == synthetic_isp(40, 6, 9).adjacency
    assert synthetic_isp(40, 6, 9).adjacency != synthetic_isp(40, 6, 10).adjacency


@st.composite
def random_graphs(draw, max_nodes=12):
    n = draw(st.integers(2, max_nodes))
    edges = [(str(k), str(draw(st.integers(0, k - 1)))) for k in range(1, n)]  # spanning tree
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    seen = {frozenset(e) for e in edges}
    for a, b in extra:
        key = frozenset((str(a), str(b)))
        if a != b and key not in seen:
            seen.add(key)
            edges.append((str(a), str(b)))
    return Topology.from_edges(edges)


@settings(max_examples=60, deadline=None)
@given(random_graphs())
def test_bfs_is_a_shortest_path_metric(topo):
    dest = topo.nodes[0]
    w = bfs_distances(topo.adjacency, dest)
    assert w[dest] == 0
    for a, b in topo.edges():
        assert abs(w[a] - w[b]) <= 1
    for n in topo.nodes:
        if n != dest:
            assert any(w[v] == w[n] - 1 for v in topo.neighbors(n))
            scores = [normalized_hop(topo, w, n, v) for v in topo.neighbors(n)]
            assert all(0.0 <= s <= 1.0 for s in scores) and max(scores) == 1.0


@settings(max_examples=30, deadline=None)
@given(random_graphs(), st.data())
def test_roles_partition(topo, data):
    n_s = data.draw(st.integers(0, len(topo)))
    n_c = data.draw(st.integers(0, len(topo) - n_s))
    t = assign_roles(topo, n_s, n_c)
    assert len(t.servers) == n_s and len(t.clients) == n_c
    assert not set(t.servers) & set(t.clients)
