import numpy as np
import pytest

from greenicn.caching import ContentStore, make_strategy, rebuild_summary
from greenicn.metrics import brown_energy_savings, footprint_reduction, hit_rate, summarize
from greenicn.routing import HopTable
from greenicn.simulation import HourlyCounters, plan_routes, route_request, simulate
from greenicn.workload import RequestEvent

from worlds import line_world, make_world


def _route(path, stores, strategy="all", summaries=None, chunk=7, server=None, green=None, seed=0):
    topo_nodes = {n for n in stores}
    counters = HourlyCounters(0)
    ev = RequestEvent(0, path[0], chunk)
    out = route_request(ev, server or path[-1], path, stores, make_strategy(strategy), summaries, counters,
                        hops=_route.hops, green=green or {n: 1.0 for n in topo_nodes},
                        rng=np.random.default_rng(seed))
    return out, counters


@pytest.fixture
def line5():
    world = line_world(5)
    _route.hops = world.hops
    return world


def _stores(world, cap=4):
    return {n: ContentStore(cap, n) for n in world.topo.nodes}


def test_hit_at_first_router(line5):
    stores = _stores(line5)
    stores["0"].insert(7)
    out, c = _route(("0", "1", "2", "3", "4"), stores)
    assert out.hit and out.served_at == "0" and out.hop_units == 1
    assert c.hop_units == 2 and c.baseline_hop_units == 2 * (4 + 2)


def test_cold_caches_cost_the_full_path(line5):
    out, c = _route(("0", "1", "2", "3", "4"), _stores(line5), strategy="none")
    assert not out.hit and out.hop_units == 6 == 4 + 2
    assert footprint_reduction(c) == 0.0


def test_all_second_request_hits_first_router(line5):
    stores = _stores(line5)
    _route(("0", "1", "2", "3", "4"), stores)
    out, _ = _route(("0", "1", "2", "3", "4"), stores)
    assert out.served_at == "0" and out.hop_units == 1


def test_admission_only_downstream(line5):
    stores = _stores(line5)
    stores["2"].insert(7)
    _route(("0", "1", "2", "3", "4"), stores)
    assert 7 in stores["0"] and 7 in stores["1"]
    assert 7 not in stores["3"] and 7 not in stores["4"]


def test_longer_path_without_hits_is_negative():
    world = make_world([("0", "1"), ("1", "2"), ("0", "3"), ("3", "4"), ("4", "2")], ["0"], ["2"])
    _route.hops = world.hops
    out, c = _route(("0", "3", "4", "2"), _stores(world), strategy="none")
    assert footprint_reduction(c) < 0


def test_packet_and_link_accounting(line5):
    stores = _stores(line5)
    stores["1"].insert(7)
    _, c = _route(("0", "1", "2", "3", "4"), stores)
    # request visits 0 and 1, the reply leaves 1 and passes 0 again
    assert c.packets == {"0": 2, "1": 1}
    assert c.used_links == {("0", "1")}


def test_nbsc_redirect_to_neighbour():
    # 0-1-2 path with neighbour 3 hanging off router 0
    world = make_world([("0", "1"), ("1", "2"), ("0", "3")], ["0"], ["2"])
    _route.hops = world.hops
    stores = _stores(world)
    stores["3"].insert(7)
    summaries = {"0": [rebuild_summary(stores["1"], 64), rebuild_summary(stores["3"], 64)]}
    out, c = _route(("0", "1", "2"), stores, strategy="nbsc", summaries=summaries)
    assert out.redirected and out.served_at == "3" and out.hop_units == 2
    assert c.redirects == 1 and c.hits == 1
    assert 7 not in stores["1"] and 7 not in stores["2"]  # nothing past the redirect point admits


def test_nbsc_false_positive_continues_to_server():
    world = make_world([("0", "1"), ("1", "2"), ("0", "3"), ("3", "2")], ["0"], ["2"])
    _route.hops = world.hops
    stores = _stores(world)
    stale = ContentStore(4, "3")
    stale.insert(7)
    summaries = {"0": [rebuild_summary(stale, 64)]}
    out, c = _route(("0", "1", "2"), stores, strategy="nbsc", summaries=summaries)
    assert out.redirected and not out.hit
    assert out.hop_units == 4  # client->0, 0->3, 3->2, 2->server
    assert ("2", "3") in c.used_links


def test_missing_path_falls_back_to_shortest(line5):
    counters = HourlyCounters(0)
    out = route_request(RequestEvent(0, "0", 1), "4", None, _stores(line5), make_strategy("all"), None, counters,
                        hops=HopTable(line5.topo), green={}, rng=np.random.default_rng(0))
    assert counters.failed_requests == 1 and out.hop_units == 6


def test_zero_requests_switch_everything_off():
    world = line_world(4)
    res = simulate(world, 0.0, "all", rate=0, warmup=0)
    assert brown_energy_savings(res.measured) == 1.0
    assert all(not any(s) for h in res.hours for s in h.line_cards_on.values())


def test_small_catalog_fits_in_cache():
    world = line_world(4, catalog_size=5, hours=48)
    res = simulate(world, 0.0, "all", capacity=10, rate=10, warmup=24)
    assert hit_rate(res.measured) == 1.0


def test_adopted_path_cards_on_even_when_served_at_first_router():
    world = line_world(4, catalog_size=1, hours=30)
    res = simulate(world, 0.0, "all", capacity=10, rate=5, warmup=24)
    last = res.hours[-1]
    assert last.hits == last.requests
    assert last.used_links == {("0", "1"), ("1", "2"), ("2", "3")}


def test_brown_energy_matches_hand_count():
    # one sunny hour for router 1 only; all line-cards on along the line
    world = line_world(3, hours=1, catalog_size=3, ghi=[1000.0], solar_scale={"1": 0.1})
    res = simulate(world, 0.0, "none", rate=1, warmup=0)
    h = res.hours[0]
    # router 1 draws 210+2*70=350 W, gets 400 W; routers 0 and 2 draw 280 W each from the grid
    assert h.brown_wh == pytest.approx(560.0)
    assert h.router_green["1"] == 1.0 and h.router_green["0"] == 0.0


def test_run_is_deterministic():
    world = make_world([("0", "1"), ("1", "2"), ("2", "3"), ("3", "0"), ("1", "3")], ["0", "2"], ["1", "3"],
                       hours=30, catalog_size=50, ghi=np.tile([0, 300, 900, 300, 0, 0], 5),
                       solar_scale={"1": 0.2, "2": 0.05})
    a = simulate(world, 0.7, "nbsc", seed=4, capacity=5, rate=20, warmup=2)
    b = simulate(world, 0.7, "nbsc", seed=4, capacity=5, rate=20, warmup=2)
    assert summarize(a.measured) == summarize(b.measured)


def test_plan_is_shared_and_checked():
    world = line_world(4, hours=26)
    plan = plan_routes(world, 0.5)
    assert len(plan.tables) == 26
    with pytest.raises(ValueError):
        simulate(world, 0.2, "all", plan=plan)
    with pytest.raises(ValueError):
        simulate(world, 1.2, "all")


def test_warmup_longer_than_run_measures_everything(caplog):
    world = line_world(3, hours=5)
    res = simulate(world, 0.0, "all", warmup=24)
    assert res.warmup == 0 and "warm-up" in caplog.text


def test_nbsc_beats_cachedbit_on_twenty_routers():
    from greenicn.config import RunConfig
    from greenicn.experiment import build_network, build_world, load_network, season_windows

    cfg = RunConfig.from_mapping({"synthetic_topology": {"routers": 20, "locations": 4}, "servers": 3,
                                  "clients": 6, "seasons": ["Spring"], "catalog_size": 20000,
                                  "request_rate": 30, "cache_capacity": 128, "seed": 3})
    net = build_network(cfg, "A", load_network(cfg))
    world = build_world(cfg, net, season_windows(cfg)[0])
    plan = plan_routes(world, 0.0)
    fp = {s: footprint_reduction(simulate(world, 0.0, s, seed=1, capacity=128, rate=30, plan=plan).measured)
          for s in ("cachedbit", "nbsc")}
    assert fp["nbsc"] > fp["cachedbit"] > 0.05
