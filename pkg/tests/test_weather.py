import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from greenicn.weather import (DEFAULT_SEASONS, HOURS_PER_YEAR, SeasonWindow, WeatherFormatError, WeatherProfile,
                              WeatherSeries, load_weather_csv, season_slice, synthesize_weather,
                              write_weather_csv)


def _csv(rows, header="location_id,hour,wind_speed_mps,ghi_wm2"):
    return io.StringIO(header + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n")


def test_full_year_file():
    rows = [("A", h, 5.0, 100.0) for h in range(HOURS_PER_YEAR)]
    out = load_weather_csv(_csv(rows))
    assert list(out) == ["A"]
    assert len(out["A"]) == HOURS_PER_YEAR


def test_negative_reading_is_clamped_and_counted():
    out = load_weather_csv(_csv([("A", 0, -1, 10), ("A", 1, 3, 20)]))
    assert out["A"].wind_speed[0] == 0.0
    assert out["A"].clamped == 1


def test_gap_is_reported():
    rows = [("A", h, 1, 1) for h in range(200) if h != 100]
    with pytest.raises(WeatherFormatError, match="gap at hour 100"):
        load_weather_csv(_csv(rows))


def test_duplicate_hour_rejected():
    with pytest.raises(WeatherFormatError):
        load_weather_csv(_csv([("A", 0, 1, 1), ("A", 0, 2, 2)]))


def test_bad_header_rejected():
    with pytest.raises(WeatherFormatError):
        load_weather_csv(_csv([("A", 0, 1, 1)], header="loc,h,w,g"))


def test_non_numeric_value_names_line():
    with pytest.raises(WeatherFormatError, match="line 3"):
        load_weather_csv(_csv([("A", 0, 1, 1), ("A", 1, "x", 1)]))


def test_hour_offset_shifts_series():
    rows = [("A", h, float(h), 0.0, 1) for h in range(4)]
    out = load_weather_csv(_csv(rows, "location_id,hour,wind_speed_mps,ghi_wm2,hour_offset"))
    assert list(out["A"].wind_speed) == [3.0, 0.0, 1.0, 2.0]


def test_round_trip(tmp_path):
    a = synthesize_weather(1, horizon_hours=48, location_id="A")
    b = synthesize_weather(2, horizon_hours=48, location_id="B")
    path = tmp_path / "w.csv"
    write_weather_csv([a, b], path)
    back = load_weather_csv(path)
    assert back["A"] == a and back["B"] == b


def test_zero_solar_amplitude():
    w = synthesize_weather(3, WeatherProfile(solar_amplitude=0.0), 240)
    assert not w.ghi.any()


def test_constant_wind_when_variance_zero():
    w = synthesize_weather(3, WeatherProfile(wind_mean=6.5, wind_variance=0.0), 240)
    assert np.all(w.wind_speed == 6.5)


def test_synthesis_is_deterministic():
    assert synthesize_weather(11, horizon_hours=500) == synthesize_weather(11, horizon_hours=500)
    assert synthesize_weather(11, horizon_hours=500) != synthesize_weather(12, horizon_hours=500)


def test_synthetic_sun_follows_the_day():
    w = synthesize_weather(0, horizon_hours=24 * 10)
    hours = np.arange(len(w)) % 24
    assert not w.ghi[(hours <= 6) | (hours >= 18)].any()
    assert (w.ghi[hours == 12] > 0).all()


def test_season_slice():
    year = synthesize_weather(5)
    win = season_slice(year, SeasonWindow("w", 0, 168))
    assert len(win) == 168
    np.testing.assert_array_equal(win.ghi, year.ghi[:168])


def test_default_winter_window():
    assert DEFAULT_SEASONS["Winter"] == SeasonWindow("Winter", 0, 168)


def test_window_past_end():
    with pytest.raises(ValueError):
        season_slice(synthesize_weather(5, horizon_hours=100), SeasonWindow("x", 50, 168))


def test_series_is_read_only():
    w = synthesize_weather(5, horizon_hours=24)
    with pytest.raises(ValueError):
        w.ghi[0] = 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 1200), st.floats(0.5, 12), st.floats(0, 20))
def test_synthetic_weather_is_physical(seed, amp, mean, var):
    w = synthesize_weather(seed, WeatherProfile(solar_amplitude=amp, wind_mean=mean, wind_variance=var), 24 * 7)
    assert len(w) == 168
    assert (w.wind_speed >= 0).all() and (w.ghi >= 0).all()
    assert w.ghi.max() <= amp * 1.5 + 1e-9
