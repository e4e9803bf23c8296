"""
Day-lag scan: for each dt, join buoy conditions dt days before each storm
reading, fit the implicit wind model, invert it for W and correlate the
selected root with the observed wind.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import timedelta
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from hurricane_nra.errors import InsufficientDataError, NumericsError
from hurricane_nra.implicit import fit_unity, quadratic_in, select_root
from hurricane_nra.ingest import (
    DEFAULT_TOLERANCE,
    VARIABLES,
    BuoyReading,
    StormReading,
    complete_cases,
    join_lagged,
)
from hurricane_nra.outputs import frame_to_csv_text
from hurricane_nra.terms import TermDescriptor, evaluate, parse_term

logger = logging.getLogger(__name__)

DEFAULT_DT_RANGE = range(1, 37)


@dataclass(frozen=True)
class LagEntry:
    dt: int
    n_records: int
    r_squared: Optional[float] = None
    correlation: Optional[float] = None
    n_complex: int = 0
    n_unjoined: int = 0
    n_incomplete: int = 0
    skipped: bool = False
    reason: str = ""


@dataclass
class LagScanResult:
    entries: List[LagEntry] = field(default_factory=list)

    @property
    def best_lag(self) -> Optional[int]:
        best = None
        for e in self.entries:
            if e.skipped:
                continue
            if best is None or e.correlation > best.correlation or (
                e.correlation == best.correlation and e.dt < best.dt
            ):
                best = e
        return best.dt if best is not None else None

    def entry(self, dt: int) -> LagEntry:
        return next(e for e in self.entries if e.dt == dt)


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return None
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.sum(xc * xc) * np.sum(yc * yc))
    if denom == 0.0:
        return None
    return float(np.clip(np.sum(xc * yc) / denom, -1.0, 1.0))


def _resolve_terms(model_terms: Iterable[Union[str, TermDescriptor]]) -> List[TermDescriptor]:
    return [t if isinstance(t, TermDescriptor) else parse_term(t, VARIABLES) for t in model_terms]


def scan_lag(
    storms: Sequence[StormReading],
    buoys: Sequence[BuoyReading],
    terms: Sequence[TermDescriptor],
    dt: int,
    tolerance: timedelta = DEFAULT_TOLERANCE,
    target: str = "W",
) -> LagEntry:
    joined = join_lagged(storms, buoys, dt, tolerance)
    records, drops = complete_cases(joined.records)
    n = len(records)
    common = dict(dt=dt, n_records=n, n_unjoined=joined.dropped, n_incomplete=drops.dropped)
    if n <= len(terms):
        return LagEntry(skipped=True, reason=f"{n} complete records for {len(terms)} terms", **common)

    try:
        model = fit_unity(evaluate(terms, records), VARIABLES)
    except NumericsError as e:
        return LagEntry(skipped=True, reason=str(e), **common)

    observed: List[float] = []
    estimated: List[float] = []
    n_complex = 0
    for r in records:
        values = r.values()
        bounds = quadratic_in(model, target, values)
        if not bounds.has_real_root:
            n_complex += 1
            continue
        observed.append(values[target])
        estimated.append(select_root(bounds, values[target]))
    if n_complex:
        logger.info("dt=%d: %d record(s) with complex roots excluded", dt, n_complex)

    corr = pearson(observed, estimated)
    if corr is None:
        return LagEntry(
            r_squared=model.r_squared, n_complex=n_complex, skipped=True, reason="correlation undefined", **common
        )
    return LagEntry(r_squared=model.r_squared, correlation=corr, n_complex=n_complex, **common)


def scan(
    storms: Sequence[StormReading],
    buoys: Sequence[BuoyReading],
    model_terms: Iterable[Union[str, TermDescriptor]],
    dt_range: Iterable[int] = DEFAULT_DT_RANGE,
    tolerance: timedelta = DEFAULT_TOLERANCE,
    target: str = "W",
) -> LagScanResult:
    dts = list(dt_range)
    if not dts:
        raise InsufficientDataError("dt range is empty")
    if not storms or not buoys:
        raise InsufficientDataError("lag scan needs both storm and buoy readings")
    terms = _resolve_terms(model_terms)

    result = LagScanResult()
    for dt in dts:
        entry = scan_lag(storms, buoys, terms, dt, tolerance, target)
        if entry.skipped:
            logger.warning("dt=%d skipped: %s", dt, entry.reason)
        result.entries.append(entry)

    if result.best_lag is None:
        raise InsufficientDataError(f"every lag in {dts[0]}..{dts[-1]} was skipped")
    best = result.entry(result.best_lag)
    logger.info("best lag dt=%d with correlation %.7f", best.dt, best.correlation)
    return result


def correlation_curve(result: LagScanResult) -> pd.DataFrame:
    """One row per scanned dt, in scan order."""
    return pd.DataFrame(
        [
            {
                "dt": e.dt,
                "n": e.n_records,
                "r_squared": np.nan if e.r_squared is None else e.r_squared,
                "correlation": np.nan if e.correlation is None else e.correlation,
                "n_complex": e.n_complex,
                "skipped": e.skipped,
            }
            for e in result.entries
        ],
        columns=["dt", "n", "r_squared", "correlation", "n_complex", "skipped"],
    )


def correlation_curve_csv(result: LagScanResult) -> str:
    return frame_to_csv_text(correlation_curve(result))
