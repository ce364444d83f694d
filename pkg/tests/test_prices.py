import numpy as np
import pytest

from plantsched.prices import (
    ACTUAL,
    DAY_AHEAD,
    PriceSeries,
    energy_cost,
    load_price_csv,
    save_price_csv,
    synth_profile,
)


def write(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_mwh_conversion(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n2024-05-01T00:00,32.5\n")
        series = load_price_csv(path, unit="per_MWh")
        assert series.prices[0] == pytest.approx(0.0325)

    def test_empty_file_rejected(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n")
        with pytest.raises(ValueError):
            load_price_csv(path)

    def test_negative_price_rejected_with_row(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n2024-05-01T00:00,1.0\n2024-05-01T01:00,-1\n")
        with pytest.raises(ValueError, match="row 2"):
            load_price_csv(path)

    def test_non_monotone_rejected(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n2024-05-01T02:00,1.0\n2024-05-01T01:00,1.0\n")
        with pytest.raises(ValueError, match="row 2"):
            load_price_csv(path)

    def test_malformed_row(self, tmp_path):
        path = write(tmp_path, "timestamp,price\nnot-a-date,1.0\n")
        with pytest.raises(ValueError, match="row 1"):
            load_price_csv(path)

    def test_round_trip_six_decimals(self, tmp_path):
        series = synth_profile(48, 0.03, 0.09, {17, 18, 19}, noise_seed=5)
        out = tmp_path / "out.csv"
        save_price_csv(series, out)
        back = load_price_csv(out)
        np.testing.assert_allclose(back.prices, series.prices, atol=5e-7)
        assert back.start_hour == series.start_hour


class TestSynthProfile:
    def test_constant_when_flat_and_noiseless(self):
        series = synth_profile(24, 0.05, 0.05, set(), noise_seed=0, noise_frac=0.0)
        np.testing.assert_allclose(series.prices, 0.05)

    def test_peak_count(self):
        series = synth_profile(24, 0.03, 0.09, {17, 18, 19}, noise_seed=0)
        assert int((series.prices >= 0.09 * 0.9).sum()) == 3

    def test_deterministic(self):
        a = synth_profile(72, 0.03, 0.09, {8, 9}, noise_seed=11)
        b = synth_profile(72, 0.03, 0.09, {8, 9}, noise_seed=11)
        np.testing.assert_array_equal(a.prices, b.prices)

    def test_nonnegative_and_multiday(self):
        series = synth_profile(120, 0.02, 0.4, {14, 15, 16, 17}, noise_seed=2)
        assert (series.prices >= 0).all()
        assert int((series.prices >= 0.4 * 0.9).sum()) == 4 * 5

    def test_rejects_peak_below_base(self):
        with pytest.raises(ValueError):
            synth_profile(24, 0.09, 0.03, set(), noise_seed=0)


class TestEnergyCost:
    def test_zero_energy(self):
        assert energy_cost(0.05, 0.0) == 0.0

    def test_hand_values(self):
        assert energy_cost(0.05, 100.0) == pytest.approx(5.0)
        assert energy_cost(0.0325, 39.0) == pytest.approx(1.2675)

    def test_bilinear(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            rho, e, a, b = rng.uniform(0.01, 2, 4)
            assert energy_cost(a * rho, b * e) == pytest.approx(a * b * energy_cost(rho, e))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            energy_cost(-0.1, 1.0)


class TestSeriesType:
    def test_kind_checked(self):
        with pytest.raises(ValueError):
            PriceSeries(start_hour=None, prices=[0.1], kind="foo")

    def test_slice_bounds(self):
        series = synth_profile(24, 0.03, 0.09, {7}, noise_seed=0, kind=DAY_AHEAD)
        assert series.kind == DAY_AHEAD
        assert len(series.slice(0, 24)) == 24
        with pytest.raises(ValueError):
            series.slice(10, 24)

    def test_immutable(self):
        series = synth_profile(24, 0.03, 0.09, {7}, noise_seed=0, kind=ACTUAL)
        with pytest.raises(ValueError):
            series.prices[0] = 1.0
