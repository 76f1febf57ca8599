"""Router power model, renewable supply and brown-energy accounting.

All powers are in watts. One simulated step is one hour, so a watt drawn
for a step is booked as one watt-hour.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import yaml

DEFAULT_CHASSIS_W = 210.0
DEFAULT_LINE_CARD_W = 70.0
DEFAULT_PANEL_RATING_W = 4000.0
STANDARD_GHI = 1000.0  # W/m2 at which a panel delivers its rating
DEFAULT_BETA_GRID = tuple(round(0.1 * i, 1) for i in range(11))

_CURVE_FILE = Path(__file__).parent / "data" / "turbine_curves.yaml"


class InfeasibleSizing(ValueError):
    """Raised when a renewable source must supply power but never produces any."""


@dataclass(frozen=True)
class TurbinePowerCurve:
    """Piecewise-linear wind-speed to power table.

    Output is zero below the first tabulated speed (cut-in) and above the
    last one (cut-out).
    """

    speeds: tuple[float, ...]
    powers: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.speeds) != len(self.powers) or len(self.speeds) < 2:
            raise ValueError("turbine curve needs at least two (speed, power) points")
        if any(b <= a for a, b in zip(self.speeds, self.speeds[1:])):
            raise ValueError("turbine curve speeds must be strictly increasing")
        if min(self.powers) < 0:
            raise ValueError("turbine curve powers must be non-negative")

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], name: str = "") -> "TurbinePowerCurve":
        pts = [(float(s), float(p)) for s, p in points]
        return cls(tuple(s for s, _ in pts), tuple(p for _, p in pts), name)

    @property
    def rated_power(self) -> float:
        return max(self.powers)

    def __call__(self, wind_speed):
        out = np.interp(wind_speed, self.speeds, self.powers, left=0.0, right=0.0)
        return float(out) if np.ndim(out) == 0 else out


def load_turbine_curves(path=None) -> dict[str, TurbinePowerCurve]:
    """Read named turbine curves from a YAML table (``name: {points: [[v, P], ...]}``)."""
    with open(path or _CURVE_FILE, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return {name: TurbinePowerCurve.from_points(entry["points"], name) for name, entry in raw.items()}


def default_curve(name: str = "hy5") -> TurbinePowerCurve:
    return load_turbine_curves()[name]


@dataclass(frozen=True)
class InfrastructureSizing:
    wind_scale: float = 0.0
    solar_scale: float = 0.0
    beta: float = 0.0
    capacity_c: float = 0.0

    def __post_init__(self):
        if self.wind_scale < 0 or self.solar_scale < 0:
            raise ValueError("infrastructure scales must be non-negative")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.capacity_c < 0:
            raise ValueError("capacity_c must be non-negative")


@dataclass(frozen=True)
class RouterEnergyProfile:
    chassis_power: float
    line_card_powers: tuple[float, ...]
    sizing: InfrastructureSizing = field(default_factory=InfrastructureSizing)

    def __post_init__(self):
        if self.chassis_power <= 0:
            raise ValueError("chassis power must be positive")
        if any(p <= 0 for p in self.line_card_powers):
            raise ValueError("line-card powers must be positive")

    @classmethod
    def uniform(cls, n_line_cards: int, chassis: float = DEFAULT_CHASSIS_W,
                line_card: float = DEFAULT_LINE_CARD_W, sizing: InfrastructureSizing | None = None):
        return cls(chassis, (line_card,) * n_line_cards, sizing or InfrastructureSizing())

    @property
    def n_line_cards(self) -> int:
        return len(self.line_card_powers)

    @property
    def all_on_demand(self) -> float:
        return self.chassis_power + sum(self.line_card_powers)


@dataclass(frozen=True)
class PowerState:
    """On/off vector of a router. The chassis is on iff a line-card is on."""

    line_cards_on: tuple[bool, ...]

    @property
    def chassis_on(self) -> bool:
        return any(self.line_cards_on)

    @classmethod
    def all_on(cls, n: int) -> "PowerState":
        return cls((True,) * n)

    @classmethod
    def all_off(cls, n: int) -> "PowerState":
        return cls((False,) * n)


class RenewableSupply(NamedTuple):
    wind_power: float
    solar_power: float

    @property
    def total(self) -> float:
        return self.wind_power + self.solar_power


def power_demand(profile: RouterEnergyProfile, state: PowerState) -> float:
    if len(state.line_cards_on) != profile.n_line_cards:
        raise ValueError(
            f"power state has {len(state.line_cards_on)} line-cards, profile has {profile.n_line_cards}"
        )
    if not state.chassis_on:
        return 0.0
    return profile.chassis_power + sum(p for p, on in zip(profile.line_card_powers, state.line_cards_on) if on)


def renewable_supply(sizing: InfrastructureSizing, wind_speed: float, ghi: float,
                     curve: TurbinePowerCurve, panel_rating: float = DEFAULT_PANEL_RATING_W) -> RenewableSupply:
    wind = sizing.wind_scale * curve(max(0.0, wind_speed))
    solar = sizing.solar_scale * panel_rating * max(0.0, ghi) / STANDARD_GHI
    return RenewableSupply(wind, solar)


def green_ratio(supply, demand: float) -> float:
    """Share of ``demand`` covered by renewables, saturating at 1.

    A router drawing nothing is counted as fully green.
    """
    total = supply.total if isinstance(supply, RenewableSupply) else float(supply)
    if demand <= 0 or total >= demand:
        return 1.0
    return max(0.0, total) / demand


def brown_power(supply, profile: RouterEnergyProfile, state: PowerState) -> float:
    total = supply.total if isinstance(supply, RenewableSupply) else float(supply)
    return max(0.0, power_demand(profile, state) - total)


class BrownSavings(NamedTuple):
    value: float
    fully_green: bool = False


def savings_from_totals(brown_wh: float, baseline_brown_wh: float) -> BrownSavings:
    if baseline_brown_wh <= 0:
        return BrownSavings(0.0, True)
    return BrownSavings(1.0 - brown_wh / baseline_brown_wh, False)


def brown_savings(samples: Iterable[tuple[RouterEnergyProfile, PowerState, RenewableSupply]]) -> BrownSavings:
    """Network brown-energy reduction over router-hours.

    ``samples`` yields one ``(profile, state, supply)`` per router per hour.
    The reference for each sample is the same router with every line-card on.
    """
    actual = baseline = 0.0
    for profile, state, supply in samples:
        actual += brown_power(supply, profile, state)
        baseline += brown_power(supply, profile, PowerState.all_on(profile.n_line_cards))
    return savings_from_totals(actual, baseline)


# -- infrastructure sizing -------------------------------------------------

def _unit_profiles(wind_speeds, ghis, curve, panel_rating):
    wind = np.asarray(curve(np.clip(np.asarray(wind_speeds, dtype=float), 0.0, None)), dtype=float)
    solar = panel_rating * np.clip(np.asarray(ghis, dtype=float), 0.0, None) / STANDARD_GHI
    return wind, solar


def _scales(beta, capacity_c, demand_all_on, wind_unit, solar_unit):
    if capacity_c == 0 or demand_all_on == 0:
        return 0.0, 0.0
    wind_peak = float(wind_unit.max(initial=0.0))
    solar_peak = float(solar_unit.max(initial=0.0))
    if beta > 0 and wind_peak <= 0:
        raise InfeasibleSizing(f"beta={beta} needs wind power but the series has none")
    if beta < 1 and solar_peak <= 0:
        raise InfeasibleSizing(f"beta={beta} needs solar power but the series has none")
    # unit-peak-normalised shapes, mixed at beta : 1 - beta
    w = beta / wind_peak if beta > 0 else 0.0
    s = (1.0 - beta) / solar_peak if beta < 1 else 0.0
    mixed_peak = float(np.max(w * wind_unit + s * solar_unit))
    k = capacity_c * demand_all_on / mixed_peak
    return w * k, s * k


def size_infrastructure(beta: float, capacity_c: float, weather, demand_all_on: float,
                        curve: TurbinePowerCurve, panel_rating: float = DEFAULT_PANEL_RATING_W) -> InfrastructureSizing:
    """Scale wind and solar so the annual supply peak equals ``capacity_c * demand_all_on``.

    Wind and solar installed peaks stand in the ratio ``beta : 1 - beta``.
    When the two sources peak at different hours the combined peak is lower
    than the sum of the parts, so both are scaled up together until the
    combined peak meets the target.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if capacity_c < 0:
        raise ValueError("capacity_c must be non-negative")
    wind_unit, solar_unit = _unit_profiles(weather.wind_speed, weather.ghi, curve, panel_rating)
    ws, ss = _scales(beta, capacity_c, demand_all_on, wind_unit, solar_unit)
    return InfrastructureSizing(ws, ss, beta, capacity_c)


def annual_supply(sizing: InfrastructureSizing, weather, curve: TurbinePowerCurve,
                  panel_rating: float = DEFAULT_PANEL_RATING_W) -> np.ndarray:
    wind_unit, solar_unit = _unit_profiles(weather.wind_speed, weather.ghi, curve, panel_rating)
    return sizing.wind_scale * wind_unit + sizing.solar_scale * solar_unit


def average_green_ratio(sizing, weather, demand_all_on, curve, panel_rating=DEFAULT_PANEL_RATING_W) -> float:
    supply = annual_supply(sizing, weather, curve, panel_rating)
    if demand_all_on <= 0:
        return 1.0
    return float(np.mean(np.minimum(1.0, supply / demand_all_on)))


def optimal_beta(weather, capacity_c: float, demand_all_on: float, curve: TurbinePowerCurve,
                 panel_rating: float = DEFAULT_PANEL_RATING_W,
                 beta_grid: Sequence[float] = DEFAULT_BETA_GRID) -> tuple[float, float]:
    """Grid-search the wind share maximising the mean hourly green ratio.

    Shares that would need a source absent from the series are skipped.
    Ties go to the smallest share. Returns ``(beta, avg_green_ratio)``.
    """
    if not beta_grid:
        raise ValueError("beta_grid must not be empty")
    wind_unit, solar_unit = _unit_profiles(weather.wind_speed, weather.ghi, curve, panel_rating)
    best_beta, best_avg = None, -1.0
    for beta in sorted(beta_grid):
        try:
            ws, ss = _scales(beta, capacity_c, demand_all_on, wind_unit, solar_unit)
        except InfeasibleSizing:
            continue
        supply = ws * wind_unit + ss * solar_unit
        avg = float(np.mean(np.minimum(1.0, supply / demand_all_on))) if demand_all_on > 0 else 1.0
        if avg > best_avg:
            best_beta, best_avg = beta, avg
    if best_beta is None:
        # neither source ever produces: nothing to optimise
        return float(min(beta_grid)), 0.0
    return float(best_beta), best_avg
