import numpy as np
import pytest

from greenicn.topology import Topology, assign_roles
from greenicn.weather import WeatherSeries


def series(wind, ghi, loc="L"):
    return WeatherSeries(loc, np.asarray(wind, dtype=float), np.asarray(ghi, dtype=float))


@pytest.fixture
def line3():
    return Topology.from_edges([("1", "2"), ("2", "3")])


@pytest.fixture
def small_isp():
    # two clients on the rim, a server at the hub
    edges = [("1", "2"), ("2", "3"), ("3", "4"), ("4", "1"), ("2", "5"), ("3", "5"), ("5", "6"), ("6", "7")]
    return assign_roles(Topology.from_edges(edges), 1, 2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
