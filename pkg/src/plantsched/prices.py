"""Hourly electricity price series: CSV ingestion, synthetic profiles, cost.

Two kinds of series exist and are kept apart on purpose: the day-ahead
forecast drives offline maintenance planning, the realized series drives
closed-loop scheduling and all billed-cost accounting.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

__all__ = ["PriceSeries", "load_price_csv", "save_price_csv", "synth_profile", "energy_cost"]

DAY_AHEAD = "day_ahead"
ACTUAL = "actual"
_KINDS = (DAY_AHEAD, ACTUAL)


@dataclass(frozen=True)
class PriceSeries:
    """Hourly prices in $/kWh starting at `start_hour`."""

    start_hour: datetime
    prices: np.ndarray
    kind: str

    def __post_init__(self):
        arr = np.asarray(self.prices, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("prices must be a nonempty vector")
        if (arr < 0).any():
            raise ValueError("prices must be nonnegative")
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "prices", arr)

    def __len__(self) -> int:
        return self.prices.size

    def slice(self, start: int, length: int) -> np.ndarray:
        if start < 0 or start + length > len(self):
            raise ValueError(
                f"requested hours [{start}, {start + length}) exceed series of length {len(self)}"
            )
        return self.prices[start : start + length]


def load_price_csv(path, unit: str = "per_kWh", kind: str = ACTUAL) -> PriceSeries:
    """Parse `timestamp,price` rows at hourly resolution.

    per_MWh values are converted to $/kWh. Malformed rows, non-monotone or
    non-hourly timestamps, and negative prices are rejected with the
    offending row index (1-based, header excluded).
    """
    if unit not in ("per_kWh", "per_MWh"):
        raise ValueError("unit must be per_kWh or per_MWh")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].replace(" ", "").lower() != "timestamp,price":
        raise ValueError("price CSV must start with a 'timestamp,price' header")
    rows = lines[1:]
    if not rows:
        raise ValueError("price CSV holds no data rows")
    stamps: list[datetime] = []
    values: list[float] = []
    for i, row in enumerate(rows, start=1):
        parts = row.split(",")
        if len(parts) != 2:
            raise ValueError(f"row {i}: expected 'timestamp,price', got {row!r}")
        try:
            stamp = datetime.fromisoformat(parts[0].strip())
            price = float(parts[1])
        except ValueError as exc:
            raise ValueError(f"row {i}: {exc}") from exc
        if price < 0:
            raise ValueError(f"row {i}: negative price {price}")
        if stamps and stamp - stamps[-1] != timedelta(hours=1):
            raise ValueError(f"row {i}: timestamps must advance by exactly one hour")
        stamps.append(stamp)
        values.append(price)
    prices = np.asarray(values, dtype=float)
    if unit == "per_MWh":
        prices = prices / 1000.0
    return PriceSeries(start_hour=stamps[0], prices=prices, kind=kind)


def save_price_csv(series: PriceSeries, path) -> None:
    """Write a series back to the CSV exchange format (6 decimal places)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("timestamp,price\n")
        for i, price in enumerate(series.prices):
            stamp = series.start_hour + timedelta(hours=i)
            fh.write(f"{stamp.isoformat(timespec='minutes')},{price:.6f}\n")


def synth_profile(
    hours: int,
    base: float,
    peak: float,
    peak_hours,
    noise_seed: int,
    noise_frac: float = 0.1,
    kind: str = ACTUAL,
    start_hour: datetime | None = None,
) -> PriceSeries:
    """Deterministic flat/peak profile with seeded bounded noise.

    The value is `peak` during the given hours-of-day and `base` elsewhere,
    plus uniform noise bounded by noise_frac * base (noise_frac <= 0.1 so
    prices stay nonnegative and peaks stay separated).
    """
    if base < 0 or peak < base:
        raise ValueError("need 0 <= base <= peak")
    if not 0 <= noise_frac <= 0.1:
        raise ValueError("noise_frac must lie in [0, 0.1]")
    peak_set = {int(h) for h in peak_hours}
    rng = np.random.default_rng(noise_seed)
    hod = np.arange(hours) % 24
    values = np.where(np.isin(hod, sorted(peak_set)), peak, base).astype(float)
    values = values + rng.uniform(-noise_frac * base, noise_frac * base, size=hours)
    return PriceSeries(
        start_hour=start_hour or datetime(2024, 5, 1),
        prices=np.maximum(values, 0.0),
        kind=kind,
    )


def energy_cost(price: float, energy: float) -> float:
    """Billed cost of one step: price ($/kWh) times energy (kWh)."""
    if price < 0 or energy < 0:
        raise ValueError("price and energy must be nonnegative")
    return float(price * energy)
