"""Hourly wind-speed / GHI series: CSV ingestion, synthesis and season windows."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

log = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760
CSV_HEADER = ("location_id", "hour", "wind_speed_mps", "ghi_wm2")
OFFSET_COLUMN = "hour_offset"


class WeatherFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WeatherSeries:
    location_id: str
    wind_speed: np.ndarray
    ghi: np.ndarray
    clamped: int = 0

    def __post_init__(self):
        wind = np.asarray(self.wind_speed, dtype=float)
        ghi = np.asarray(self.ghi, dtype=float)
        if wind.shape != ghi.shape or wind.ndim != 1:
            raise ValueError("wind_speed and ghi must be 1-D arrays of equal length")
        if (wind < 0).any() or (ghi < 0).any():
            raise ValueError("weather readings must be non-negative")
        wind.setflags(write=False)
        ghi.setflags(write=False)
        object.__setattr__(self, "wind_speed", wind)
        object.__setattr__(self, "ghi", ghi)

    def __len__(self):
        return len(self.wind_speed)

    def __eq__(self, other):
        if not isinstance(other, WeatherSeries):
            return NotImplemented
        return (self.location_id == other.location_id
                and np.array_equal(self.wind_speed, other.wind_speed)
                and np.array_equal(self.ghi, other.ghi))

    __hash__ = None


@dataclass(frozen=True)
class SeasonWindow:
    name: str
    start_hour: int
    length_hours: int

    @classmethod
    def from_dates(cls, name: str, month: int, first_day: int, last_day: int) -> "SeasonWindow":
        """Window covering ``first_day``..``last_day`` (inclusive) of ``month`` in a non-leap year."""
        days_before = sum((31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)[: month - 1])
        return cls(name, 24 * (days_before + first_day - 1), 24 * (last_day - first_day + 1))


DEFAULT_SEASONS = {
    "Winter": SeasonWindow.from_dates("Winter", 1, 1, 7),
    "Spring": SeasonWindow.from_dates("Spring", 4, 6, 12),
    "Summer": SeasonWindow.from_dates("Summer", 7, 11, 27),
    "Fall": SeasonWindow.from_dates("Fall", 10, 21, 27),
}


def season_slice(series: WeatherSeries, window: SeasonWindow) -> WeatherSeries:
    start, stop = window.start_hour, window.start_hour + window.length_hours
    if window.length_hours <= 0 or start < 0 or stop > len(series):
        raise ValueError(
            f"window {window.name} [{start}, {stop}) outside series horizon of {len(series)} hours"
        )
    return WeatherSeries(series.location_id, series.wind_speed[start:stop].copy(),
                         series.ghi[start:stop].copy())


def load_weather_csv(source) -> dict[str, WeatherSeries]:
    """Parse a weather CSV into one series per location.

    Negative readings are clamped to zero and counted in ``WeatherSeries.clamped``.
    An optional ``hour_offset`` column shifts a location's series in time
    (value at file hour ``h`` lands on hour ``h + offset``, wrapping around).
    """
    if hasattr(source, "read"):
        return _parse_weather(source)
    with open(source, newline="", encoding="utf-8") as fh:
        return _parse_weather(fh)


def _parse_weather(fh) -> dict[str, WeatherSeries]:
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise WeatherFormatError("empty weather file") from None
    if tuple(header[:4]) != CSV_HEADER or header[4:] not in ([], [OFFSET_COLUMN]):
        raise WeatherFormatError(f"unexpected header {header!r}, expected {','.join(CSV_HEADER)}")
    has_offset = len(header) == 5

    rows: dict[str, dict[int, tuple[float, float]]] = {}
    offsets: dict[str, int] = {}
    clamped: dict[str, int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise WeatherFormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            loc = row[0].strip()
            hour = int(row[1])
            wind = float(row[2])
            ghi = float(row[3])
            offset = int(row[4]) if has_offset else 0
        except ValueError as exc:
            raise WeatherFormatError(f"line {lineno}: {exc}") from None
        if not loc or hour < 0 or not (math.isfinite(wind) and math.isfinite(ghi)):
            raise WeatherFormatError(f"line {lineno}: malformed row {row!r}")
        per_loc = rows.setdefault(loc, {})
        if hour in per_loc:
            raise WeatherFormatError(f"line {lineno}: duplicate hour {hour} for location {loc}")
        if offsets.setdefault(loc, offset) != offset:
            raise WeatherFormatError(f"line {lineno}: inconsistent hour_offset for location {loc}")
        n_neg = (wind < 0) + (ghi < 0)
        if n_neg:
            clamped[loc] = clamped.get(loc, 0) + n_neg
        per_loc[hour] = (max(0.0, wind), max(0.0, ghi))

    out = {}
    for loc, per_loc in rows.items():
        horizon = max(per_loc) + 1
        gaps = [h for h in range(horizon) if h not in per_loc]
        if gaps:
            shown = ", ".join(str(h) for h in gaps[:20])
            raise WeatherFormatError(f"location {loc}: gap at hour {shown}" + (" ..." if len(gaps) > 20 else ""))
        values = np.array([per_loc[h] for h in range(horizon)], dtype=float)
        shift = offsets[loc] % horizon
        if shift:
            values = np.roll(values, shift, axis=0)
        if clamped.get(loc):
            log.warning("location %s: clamped %d negative readings to 0", loc, clamped[loc])
        out[loc] = WeatherSeries(loc, values[:, 0], values[:, 1], clamped.get(loc, 0))
    return out


def write_weather_csv(series: Mapping[str, WeatherSeries] | list[WeatherSeries], dest) -> None:
    items = series.values() if isinstance(series, Mapping) else series
    own = not hasattr(dest, "write")
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for s in items:
            for hour, (w, g) in enumerate(zip(s.wind_speed, s.ghi)):
                writer.writerow((s.location_id, hour, repr(float(w)), repr(float(g))))
    finally:
        if own:
            fh.close()


@dataclass(frozen=True)
class WeatherProfile:
    solar_amplitude: float = 900.0  # W/m2 clear-sky noon peak
    wind_mean: float = 6.0  # m/s
    wind_variance: float = 4.0
    seasonal_modulation: float = 0.3  # relative swing of the solar peak over the year
    sunrise_hour: int = 6
    sunset_hour: int = 18


def synthesize_weather(seed: int, profile: WeatherProfile = WeatherProfile(),
                       horizon_hours: int = HOURS_PER_YEAR, location_id: str = "synthetic") -> WeatherSeries:
    """Reproducible artificial weather.

    GHI is a half-sine bump between sunrise and sunset, scaled by a yearly
    cosine peaking at the summer solstice. Wind speed is gamma distributed
    with the requested mean and variance (constant when the variance is 0).
    """
    if horizon_hours < 24:
        raise ValueError("horizon_hours must be at least 24")
    hours = np.arange(horizon_hours)
    hour_of_day = hours % 24
    day_of_year = (hours // 24) % 365
    day_length = profile.sunset_hour - profile.sunrise_hour
    phase = (hour_of_day - profile.sunrise_hour) / day_length
    diurnal = np.where((phase > 0) & (phase < 1), np.sin(np.pi * np.clip(phase, 0, 1)), 0.0)
    seasonal = 1.0 + profile.seasonal_modulation * np.cos(2 * np.pi * (day_of_year - 171) / 365)
    ghi = np.maximum(0.0, profile.solar_amplitude * seasonal * diurnal)

    rng = np.random.default_rng(seed)
    if profile.wind_variance <= 0 or profile.wind_mean <= 0:
        wind = np.full(horizon_hours, max(0.0, profile.wind_mean))
    else:
        shape = profile.wind_mean ** 2 / profile.wind_variance
        scale = profile.wind_variance / profile.wind_mean
        wind = rng.gamma(shape, scale, size=horizon_hours)
    return WeatherSeries(location_id, wind, ghi)
