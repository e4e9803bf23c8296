"""Synthetic storm/buoy builders shared by the tests."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import List, Tuple

import numpy as np

from hurricane_nra.ingest import BuoyReading, StormReading

FIXTURES = Path(__file__).parent / "fixtures"
T0 = datetime(2005, 8, 1, tzinfo=timezone.utc)

# Exact relation planted at the oracle lag: 0.002 W + 0.00001 W^2 + 0.001 W w = 1
ORACLE_DT = 3
ORACLE_ALPHA = {"W": 0.002, "W^2": 0.00001, "Ww": 0.001}
ORACLE_TERMS = ["W", "W^2", "Ww"]


def oracle_buoy_wind(W: float) -> float:
    return (1.0 - ORACLE_ALPHA["W"] * W - ORACLE_ALPHA["W^2"] * W * W) / (ORACLE_ALPHA["Ww"] * W)


def build_oracle_dataset(seed: int = 7, days: int = 20) -> Tuple[List[StormReading], List[BuoyReading]]:
    """Storm readings every 6 h; buoy readings every 6 h from 40 days earlier.

    Buoy wind satisfies the planted relation with the storm wind exactly
    ORACLE_DT days later; everything else is noise.
    """
    rng = np.random.default_rng(seed)
    step = timedelta(hours=6)
    n_storm = days * 4
    storms = []
    for i in range(n_storm):
        ts = T0 + i * step
        W = float(rng.integers(2, 33) * 5)
        storms.append(
            StormReading(ts, "AL012005", "ORACLE", 20.0 + 0.1 * i, -60.0 - 0.1 * i, W, float(rng.integers(900, 1010)))
        )
    wind_at = {s.timestamp: s.wind for s in storms}

    buoys = []
    ts = T0 - timedelta(days=40)
    end = storms[-1].timestamp
    while ts <= end:
        W = wind_at.get(ts + timedelta(days=ORACLE_DT))
        w = oracle_buoy_wind(W) if W is not None else float(rng.uniform(1.0, 20.0))
        buoys.append(
            BuoyReading(
                ts,
                "42001",
                w,
                float(rng.uniform(1000.0, 1020.0)),
                float(rng.uniform(20.0, 30.0)),
                float(rng.uniform(25.0, 31.0)),
            )
        )
        ts += step
    return storms, buoys


def make_storm(ts: datetime, wind, pressure=1000.0, storm_id="AL012005", name="TEST") -> StormReading:
    return StormReading(ts, storm_id, name, 25.0, -80.0, wind, pressure)


def make_buoy(ts: datetime, w=5.0, p=1010.0, a=27.0, t=28.5, station="42001") -> BuoyReading:
    return BuoyReading(ts, station, w, p, a, t)
