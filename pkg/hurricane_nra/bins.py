"""Buoy conditions averaged by observed storm wind, and their constancy."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from hurricane_nra.errors import InsufficientDataError, RecordError
from hurricane_nra.factor import constancy_index
from hurricane_nra.ingest import BUOY_VARIABLES, JoinedRecord

logger = logging.getLogger(__name__)

BIN_COLUMNS = ["wind", "n", "mean_w", "mean_p", "mean_a", "mean_t"]


@dataclass(frozen=True)
class WindBinSummary:
    wind: float
    n: int
    mean_w: float
    mean_p: float
    mean_a: float
    mean_t: float


def _complete_values(records: Sequence[JoinedRecord]) -> pd.DataFrame:
    rows = []
    for r in records:
        values = r.values()
        for var, v in values.items():
            if v is None:
                raise RecordError(r.key, var)
        rows.append(values)
    return pd.DataFrame(rows, columns=["W", "P", *BUOY_VARIABLES])


def off_grid_winds(records: Sequence[JoinedRecord]) -> List[float]:
    """Observed storm winds that are not multiples of 5 kt."""
    return sorted({r.storm.wind for r in records if r.storm.wind is not None and r.storm.wind % 5 != 0})


def bin_means(records: Sequence[JoinedRecord]) -> List[WindBinSummary]:
    """Group complete records by exact storm wind W; unweighted means of w, p, a, t."""
    if not records:
        return []
    df = _complete_values(records)
    lint = off_grid_winds(records)
    if lint:
        logger.warning("binning %d wind value(s) that are not multiples of 5: %s", len(lint), lint)
    grouped = df.groupby("W", sort=True)
    means = grouped[list(BUOY_VARIABLES)].mean()
    counts = grouped.size()
    return [
        WindBinSummary(
            wind=float(w),
            n=int(counts.loc[w]),
            mean_w=float(means.loc[w, "w"]),
            mean_p=float(means.loc[w, "p"]),
            mean_a=float(means.loc[w, "a"]),
            mean_t=float(means.loc[w, "t"]),
        )
        for w in means.index
    ]


def bins_frame(summaries: Sequence[WindBinSummary]) -> pd.DataFrame:
    return pd.DataFrame([s.__dict__ for s in summaries], columns=BIN_COLUMNS)


def _series_constancy(x: np.ndarray) -> float:
    # an all-zero series has no defined index
    if not np.any(x):
        return float("nan")
    return constancy_index(x)


def variability_report(summaries: Sequence[WindBinSummary]) -> pd.DataFrame:
    """Constancy index of each per-bin mean series, most constant first; NaN for an all-zero series."""
    if len(summaries) < 2:
        raise InsufficientDataError(f"variability needs at least 2 wind bins, got {len(summaries)}")
    df = bins_frame(summaries)
    rows = [{"variable": var, "constancy": _series_constancy(df[f"mean_{var}"].to_numpy())} for var in BUOY_VARIABLES]
    out = pd.DataFrame(rows)
    return out.sort_values(by="constancy", ascending=False, kind="mergesort").reset_index(drop=True)


def pressure_bin_wind_means(records: Sequence[JoinedRecord], width: float = 5.0) -> Dict[float, float]:
    """Mean storm wind per storm-pressure bin [k*width, (k+1)*width); keys are bin lower edges."""
    acc: Dict[float, List[float]] = {}
    for r in records:
        if r.storm.wind is None or r.storm.pressure is None:
            continue
        edge = float(np.floor(r.storm.pressure / width) * width)
        acc.setdefault(edge, []).append(r.storm.wind)
    return {edge: float(np.mean(ws)) for edge, ws in sorted(acc.items())}


def reference_wind(pressure_means: Dict[float, float], pressure: float, width: float = 5.0):
    if not pressure_means:
        return None
    edge = float(np.floor(pressure / width) * width)
    return pressure_means.get(edge)
