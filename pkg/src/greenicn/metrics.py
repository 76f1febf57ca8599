"""Reduce hourly counters to hit rate, footprint, green/brown and energy metrics.

Ratios over several hours are taken on summed counters (request- or
energy-weighted), never as means of hourly ratios. Undefined values come
back as None; a green/brown ratio with no brown packets is ``math.inf``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .energy import savings_from_totals
from .simulation import HourlyCounters


def _sum(counters, attr):
    if isinstance(counters, HourlyCounters):
        return getattr(counters, attr)
    return sum(getattr(c, attr) for c in counters)


def hit_rate(counters) -> float | None:
    requests = _sum(counters, "requests")
    if requests == 0:
        return None
    return _sum(counters, "hits") / requests


def footprint_reduction(counters) -> float | None:
    baseline = _sum(counters, "baseline_hop_units")
    if baseline == 0:
        return None
    return 1.0 - _sum(counters, "hop_units") / baseline


def green_brown_ratio(counters) -> float | None:
    green, brown = _sum(counters, "green_packets"), _sum(counters, "brown_packets")
    if brown > 0:
        return green / brown
    return math.inf if green > 0 else None


def brown_packet_reduction(counters, baseline_counters) -> float | None:
    baseline = _sum(baseline_counters, "brown_packets")
    if baseline <= 0:
        return None
    return 1.0 - _sum(counters, "brown_packets") / baseline


def brown_energy_savings(counters) -> float | None:
    """Network brown-energy reduction from switching unused line-cards off.

    None when the network never draws brown power even fully switched on.
    """
    result = savings_from_totals(_sum(counters, "brown_wh"), _sum(counters, "baseline_brown_wh"))
    return None if result.fully_green else result.value


@dataclass
class MetricsReport:
    hit_rate: float | None
    footprint_reduction: float | None
    green_brown_ratio: float | None
    brown_packet_reduction: float | None
    brown_energy_savings: float | None
    failed_discoveries: int = 0
    alpha: float | None = None
    strategy: str | None = None
    scenario: str | None = None
    season: str | None = None
    seed: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def summarize(counters: Sequence[HourlyCounters], baseline: Sequence[HourlyCounters] | None = None,
              **meta) -> MetricsReport:
    return MetricsReport(
        hit_rate=hit_rate(counters),
        footprint_reduction=footprint_reduction(counters),
        green_brown_ratio=green_brown_ratio(counters),
        brown_packet_reduction=brown_packet_reduction(counters, baseline) if baseline is not None else None,
        brown_energy_savings=brown_energy_savings(counters),
        failed_discoveries=_sum(counters, "failed_discoveries"),
        **meta,
    )


def per_hour(counters: Iterable[HourlyCounters], baseline: Sequence[HourlyCounters] | None = None) -> list[MetricsReport]:
    counters = list(counters)
    base = list(baseline) if baseline is not None else [None] * len(counters)
    return [summarize(c, b) for c, b in zip(counters, base)]
