"""Storm categories by maximum wind, and descriptive statistics of a storm set."""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from hurricane_nra.errors import InsufficientDataError, ScaleError
from hurricane_nra.ingest import StormReading
from hurricane_nra.outputs import open_text

logger = logging.getLogger(__name__)

WEAK_WIND = 45.0
EXTREME_WIND = 145.0
HISTOGRAM_WIDTH = 5.0


@dataclass(frozen=True)
class CategoryScale:
    """Ordered (label, minimum wind in kt); the first label covers everything below the second minimum."""

    name: str
    thresholds: Tuple[Tuple[str, float], ...]

    def __post_init__(self):
        if not self.thresholds:
            raise ScaleError(f"scale {self.name!r} has no categories")
        mins = [m for _, m in self.thresholds]
        if any(b <= a for a, b in zip(mins, mins[1:])):
            raise ScaleError(f"scale {self.name!r} minimums must be strictly increasing: {mins}")
        labels = [lbl for lbl, _ in self.thresholds]
        if len(set(labels)) != len(labels):
            raise ScaleError(f"scale {self.name!r} repeats a label: {labels}")

    @property
    def labels(self) -> List[str]:
        return [lbl for lbl, _ in self.thresholds]

    def category_of(self, wind: float) -> str:
        label = self.thresholds[0][0]
        for lbl, minimum in self.thresholds[1:]:
            if wind >= minimum:
                label = lbl
            else:
                break
        return label

    def to_dict(self) -> Dict[str, object]:
        return {"name": self.name, "thresholds": [{"label": lbl, "min_wind": m} for lbl, m in self.thresholds]}


# Conventional wind-threshold categories, used until a scale file is supplied.
DEFAULT_SCALE = CategoryScale(
    name="stand-in wind scale (tropical storm < 64 kt; categories at 64/83/96/113/137 kt)",
    thresholds=(
        ("tropical storm", 0.0),
        ("category 1", 64.0),
        ("category 2", 83.0),
        ("category 3", 96.0),
        ("category 4", 113.0),
        ("category 5", 137.0),
    ),
)


def _scale_from_rows(name: str, rows: List[Dict[str, object]]) -> CategoryScale:
    try:
        thresholds = tuple((str(r["label"]), float(r["min_wind"])) for r in rows)
    except (KeyError, TypeError, ValueError) as e:
        raise ScaleError(f"scale {name!r}: each row needs label and numeric min_wind ({e})") from e
    return CategoryScale(name=name, thresholds=thresholds)


def load_scale(path: Path) -> CategoryScale:
    """JSON ``{"name", "thresholds": [{"label", "min_wind"}]}`` or CSV ``label,min_wind``."""
    path = Path(path)
    if not path.exists():
        raise ScaleError(f"scale file not found: {path}")
    with open_text(path) as f:
        if path.suffix.lower() == ".json":
            try:
                obj = json.load(f)
            except json.JSONDecodeError as e:
                raise ScaleError(f"scale file {path} is not valid JSON: {e}") from e
            if not isinstance(obj, dict) or not isinstance(obj.get("thresholds"), list):
                raise ScaleError(f"scale file {path} needs a 'thresholds' list")
            return _scale_from_rows(str(obj.get("name", path.stem)), obj["thresholds"])
        rows = list(csv.DictReader(f))
    return _scale_from_rows(path.stem, rows)


def max_wind(readings: Sequence[StormReading]) -> float:
    winds = [r.wind for r in readings if r.wind is not None]
    if not winds:
        raise InsufficientDataError("storm has no wind readings to classify")
    return max(winds)


def classify_storm(readings: Sequence[StormReading], scale: CategoryScale = DEFAULT_SCALE) -> str:
    if not readings:
        raise InsufficientDataError("cannot classify a storm with no readings")
    return scale.category_of(max_wind(readings))


def group_storms(readings: Sequence[StormReading]) -> Dict[str, List[StormReading]]:
    groups: Dict[str, List[StormReading]] = {}
    for r in readings:
        groups.setdefault(r.storm_id, []).append(r)
    return dict(sorted(groups.items()))


@dataclass(frozen=True)
class StormSummary:
    scale_name: str
    n_storms: int
    n_readings: int
    storms_by_category: Dict[str, int]
    readings_by_category: Dict[str, int]
    mean_wind: float
    mode_wind: float
    share_below_45: float
    count_at_or_above_145: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "scale": self.scale_name,
            "n_storms": self.n_storms,
            "n_readings": self.n_readings,
            "storms_by_category": self.storms_by_category,
            "readings_by_category": self.readings_by_category,
            "mean_wind": self.mean_wind,
            "mode_wind": self.mode_wind,
            "share_below_45": self.share_below_45,
            "count_at_or_above_145": self.count_at_or_above_145,
        }


def wind_mode(winds: Sequence[float]) -> float:
    """Most frequent value; ties go to the smaller wind."""
    counts = Counter(winds)
    return min(counts, key=lambda w: (-counts[w], w))


def summarize(readings: Sequence[StormReading], scale: CategoryScale = DEFAULT_SCALE) -> StormSummary:
    winds = [r.wind for r in readings if r.wind is not None]
    if not winds:
        raise InsufficientDataError("storm summary needs at least one reading with wind")
    skipped = len(readings) - len(winds)
    if skipped:
        logger.warning("%d reading(s) without wind left out of the summary", skipped)

    storms = {sid: rs for sid, rs in group_storms(readings).items() if any(r.wind is not None for r in rs)}
    by_storm = Counter(classify_storm(rs, scale) for rs in storms.values())
    by_reading = Counter(scale.category_of(w) for w in winds)
    arr = np.asarray(winds, dtype=float)
    return StormSummary(
        scale_name=scale.name,
        n_storms=len(storms),
        n_readings=len(winds),
        storms_by_category={lbl: by_storm.get(lbl, 0) for lbl in scale.labels},
        readings_by_category={lbl: by_reading.get(lbl, 0) for lbl in scale.labels},
        mean_wind=float(arr.mean()),
        mode_wind=float(wind_mode(winds)),
        share_below_45=float(np.mean(arr < WEAK_WIND)),
        count_at_or_above_145=int(np.sum(arr >= EXTREME_WIND)),
    )


def storm_table(readings: Sequence[StormReading], scale: CategoryScale = DEFAULT_SCALE) -> pd.DataFrame:
    rows = []
    for sid, rs in group_storms(readings).items():
        if not any(r.wind is not None for r in rs):
            continue
        rows.append(
            {
                "storm_id": sid,
                "name": rs[0].storm_name,
                "n_readings": len(rs),
                "max_wind": max_wind(rs),
                "category": classify_storm(rs, scale),
            }
        )
    return pd.DataFrame(rows, columns=["storm_id", "name", "n_readings", "max_wind", "category"])


def histogram(values: Sequence[float], width: float = HISTOGRAM_WIDTH) -> pd.DataFrame:
    """Counts per bin [k*width, (k+1)*width), keyed by lower edge; empty bins omitted."""
    edges = Counter(float(np.floor(v / width) * width) for v in values)
    return pd.DataFrame(
        [{"bin_start": e, "count": edges[e]} for e in sorted(edges)],
        columns=["bin_start", "count"],
    )


def wind_histogram(readings: Sequence[StormReading]) -> pd.DataFrame:
    return histogram([r.wind for r in readings if r.wind is not None])


def pressure_histogram(readings: Sequence[StormReading]) -> pd.DataFrame:
    return histogram([r.pressure for r in readings if r.pressure is not None])
