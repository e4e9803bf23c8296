"""
Ingestion of storm best-track files and buoy standard-meteorological files.

Inputs
------
- Best track: HURDAT2 comma-separated blocks (``AL092011, IRENE, 39,`` header
  followed by observation rows) or the UNISYS archive layout (``Date:`` line,
  storm name line, ``ADV LAT LON TIME WIND PR STAT`` table). Auto-detected.
- Buoy: NDBC standard meteorological text, whitespace separated, with a column
  header row (``#YY MM DD hh mm WDIR WSPD ... PRES ATMP WTMP ...``). Older
  archive years use ``YYYY`` without ``#`` and call pressure ``BAR``.

Outputs
-------
- Canonical CSV: ``timestamp,storm_id,name,lat,lon,W,P`` and
  ``timestamp,station,w,p,a,t``; missing values are empty fields.

Units are kept as found (knots for storm wind, source-native for buoys); the
parse result carries what was read in ``units``.
"""

from __future__ import annotations

import bisect
import csv
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

from hurricane_nra.errors import FormatError
from hurricane_nra.outputs import iso_utc, open_text, parse_iso_utc, to_str

logger = logging.getLogger(__name__)

STORM_VARIABLES = ("W", "P")
BUOY_VARIABLES = ("w", "p", "a", "t")
VARIABLES = STORM_VARIABLES + BUOY_VARIABLES

STORM_COLUMNS = ["timestamp", "storm_id", "name", "lat", "lon", "W", "P"]
BUOY_COLUMNS = ["timestamp", "station", "w", "p", "a", "t"]

DEFAULT_TOLERANCE = timedelta(minutes=90)

PRESSURE_RANGE = (800.0, 1100.0)

# HURDAT2 missing markers
_HURDAT_MISSING_WIND = -99
_HURDAT_MISSING_PRESSURE = -999
_HURDAT_HEADER_RE = re.compile(r"^[A-Z]{2}\d{6}$")

# NDBC column aliases -> our variable names, and the per-column missing sentinels.
_BUOY_ALIASES = {
    "w": ("WSPD", "SPD"),
    "p": ("PRES", "BAR"),
    "a": ("ATMP",),
    "t": ("WTMP",),
}
_BUOY_SENTINELS = {
    "w": {99.0},
    "p": {9999.0},
    "a": {999.0, 99.0},
    "t": {999.0, 99.0},
}
_BUOY_MISSING_TOKENS = {"MM", "N/A"}


@dataclass(frozen=True)
class StormReading:
    timestamp: datetime
    storm_id: str
    storm_name: str
    lat: float
    lon: float
    wind: Optional[float]
    pressure: Optional[float]


@dataclass(frozen=True)
class BuoyReading:
    timestamp: datetime
    station_id: str
    wind: Optional[float] = None
    pressure: Optional[float] = None
    air_temp: Optional[float] = None
    water_temp: Optional[float] = None


@dataclass(frozen=True)
class JoinedRecord:
    storm: StormReading
    buoy: BuoyReading
    lag_days: int

    @property
    def key(self) -> str:
        return f"{self.storm.storm_id}@{iso_utc(self.storm.timestamp)}"

    def values(self) -> Dict[str, Optional[float]]:
        return {
            "W": self.storm.wind,
            "P": self.storm.pressure,
            "w": self.buoy.wind,
            "p": self.buoy.pressure,
            "a": self.buoy.air_temp,
            "t": self.buoy.water_temp,
        }

    def missing(self) -> List[str]:
        return [k for k, v in self.values().items() if v is None]

    @property
    def is_complete(self) -> bool:
        return not self.missing()


@dataclass(frozen=True)
class RowIssue:
    line_no: int
    message: str


@dataclass
class ParseResult:
    readings: list
    issues: List[RowIssue] = field(default_factory=list)
    lints: List[RowIssue] = field(default_factory=list)
    units: Dict[str, str] = field(default_factory=dict)
    source_format: str = ""


@dataclass
class JoinResult:
    dt: int
    records: List[JoinedRecord]
    dropped: int


@dataclass
class DropReport:
    total: int
    kept: int
    missing_by_variable: Dict[str, int]

    @property
    def dropped(self) -> int:
        return self.total - self.kept

    def to_dict(self) -> Dict[str, object]:
        return {
            "total": self.total,
            "kept": self.kept,
            "dropped": self.dropped,
            "missing_by_variable": dict(sorted(self.missing_by_variable.items())),
        }


# ---------------------------------------------------------------------------
# Best track
# ---------------------------------------------------------------------------


def _hemi(value: str, pos: str, neg: str) -> float:
    value = value.strip().upper()
    if value.endswith(pos):
        return float(value[:-1])
    if value.endswith(neg):
        return -float(value[:-1])
    return float(value)


def _check_storm_values(lat: float, lon: float, wind: Optional[float], pressure: Optional[float]) -> Optional[str]:
    if not -90.0 <= lat <= 90.0:
        return f"latitude {lat} out of range"
    if not -180.0 <= lon <= 180.0:
        return f"longitude {lon} out of range"
    if wind is not None and wind < 0:
        return f"negative wind {wind}"
    if pressure is not None and not PRESSURE_RANGE[0] < pressure < PRESSURE_RANGE[1]:
        return f"pressure {pressure} outside {PRESSURE_RANGE}"
    return None


def _wind_lint(wind: Optional[float]) -> bool:
    return wind is not None and wind % 5 != 0


def _parse_hurdat2(lines: Iterable[Tuple[int, str]]) -> ParseResult:
    result = ParseResult(readings=[], source_format="hurdat2", units={"W": "kt", "P": "mb"})
    storm_id = name = None
    expected = seen = 0
    header_line = 0

    def close_block():
        if storm_id is not None and seen != expected:
            result.issues.append(
                RowIssue(header_line, f"storm {storm_id} declares {expected} rows, found {seen}")
            )

    for line_no, line in lines:
        parts = [p.strip() for p in line.rstrip().rstrip(",").split(",")]
        if _HURDAT_HEADER_RE.match(parts[0]):
            close_block()
            if len(parts) < 3:
                raise FormatError(f"unreadable storm header {line.strip()!r}", line_no=line_no)
            try:
                expected = int(parts[2])
            except ValueError:
                raise FormatError(f"unreadable row count in header {line.strip()!r}", line_no=line_no)
            storm_id, name, seen, header_line = parts[0], parts[1], 0, line_no
            continue
        if storm_id is None:
            raise FormatError(f"expected a storm header, got {line.strip()!r}", line_no=line_no)

        seen += 1
        try:
            if len(parts) < 8:
                raise ValueError(f"expected at least 8 fields, got {len(parts)}")
            ts = datetime.strptime(parts[0] + parts[1].zfill(4), "%Y%m%d%H%M").replace(tzinfo=timezone.utc)
            lat = _hemi(parts[4], "N", "S")
            lon = _hemi(parts[5], "E", "W")
            wind_raw = int(parts[6])
            pres_raw = int(parts[7])
        except ValueError as e:
            result.issues.append(RowIssue(line_no, f"malformed observation: {e}"))
            continue
        wind = None if wind_raw == _HURDAT_MISSING_WIND else float(wind_raw)
        pressure = None if pres_raw == _HURDAT_MISSING_PRESSURE else float(pres_raw)
        problem = _check_storm_values(lat, lon, wind, pressure)
        if problem:
            result.issues.append(RowIssue(line_no, problem))
            continue
        if _wind_lint(wind):
            result.lints.append(RowIssue(line_no, f"wind {wind} is not a multiple of 5"))
        result.readings.append(StormReading(ts, storm_id, name, lat, lon, wind, pressure))
    close_block()
    return result


def _parse_unisys(lines: Iterable[Tuple[int, str]]) -> ParseResult:
    result = ParseResult(readings=[], source_format="unisys", units={"W": "kt", "P": "mb"})
    year = None
    name = None
    storm_id = None
    first_month = None
    in_table = False

    for line_no, line in lines:
        stripped = line.strip()
        if stripped.startswith("Date:"):
            try:
                year = int(stripped.split()[-1])
            except ValueError:
                raise FormatError(f"unreadable date header {stripped!r}", line_no=line_no)
            name = storm_id = None
            first_month = None
            in_table = False
            continue
        if year is None:
            raise FormatError(f"expected a 'Date:' header, got {stripped!r}", line_no=line_no)
        if name is None:
            name = stripped.split()[-1].upper()
            storm_id = f"{name}-{year}"
            continue
        if stripped.startswith("ADV"):
            in_table = True
            continue
        if not in_table:
            raise FormatError(f"unreadable storm header {stripped!r}", line_no=line_no)

        tokens = stripped.split()
        try:
            if len(tokens) < 6:
                raise ValueError(f"expected at least 6 fields, got {len(tokens)}")
            lat = float(tokens[1])
            lon = float(tokens[2])
            m = re.match(r"^(\d{2})/(\d{2})/(\d{2})Z$", tokens[3])
            if not m:
                raise ValueError(f"bad time {tokens[3]!r}")
            month, day, hour = (int(g) for g in m.groups())
            if first_month is None:
                first_month = month
            obs_year = year + 1 if month < first_month else year
            ts = datetime(obs_year, month, day, hour, tzinfo=timezone.utc)
            wind = None if tokens[4] in {"-", "-99"} else float(tokens[4])
            pressure = None if tokens[5] in {"-", "-999"} else float(tokens[5])
        except ValueError as e:
            result.issues.append(RowIssue(line_no, f"malformed observation: {e}"))
            continue
        problem = _check_storm_values(lat, lon, wind, pressure)
        if problem:
            result.issues.append(RowIssue(line_no, problem))
            continue
        if _wind_lint(wind):
            result.lints.append(RowIssue(line_no, f"wind {wind} is not a multiple of 5"))
        result.readings.append(StormReading(ts, storm_id, name, lat, lon, wind, pressure))
    return result


def parse_best_track(stream: TextIO) -> ParseResult:
    """Parse best-track text (HURDAT2 or UNISYS) into StormReadings.

    Malformed observation rows are collected in ``issues`` with their line
    numbers; an unreadable header raises FormatError.
    """
    lines = [(i, ln) for i, ln in enumerate(stream, start=1) if ln.strip()]
    if not lines:
        return ParseResult(readings=[], source_format="empty", units={"W": "kt", "P": "mb"})
    if lines[0][1].strip().startswith("Date:"):
        result = _parse_unisys(lines)
    else:
        result = _parse_hurdat2(lines)
    for issue in result.issues:
        logger.warning("best track line %d: %s", issue.line_no, issue.message)
    return result


# ---------------------------------------------------------------------------
# Buoy standard meteorological
# ---------------------------------------------------------------------------


def _resolve_buoy_columns(header: List[str], line_no: int) -> Dict[str, int]:
    idx = {name: i for i, name in enumerate(header)}
    cols: Dict[str, int] = {}
    year_col = next((c for c in ("YY", "YYYY") if c in idx), None)
    if year_col is None:
        raise FormatError("buoy header has no year column", line_no=line_no, column="YY")
    cols["year"] = idx[year_col]
    for key, name in (("month", "MM"), ("day", "DD"), ("hour", "hh")):
        if name not in idx:
            raise FormatError(f"buoy header missing required column {name}", line_no=line_no, column=name)
        cols[key] = idx[name]
    if "mm" in idx:
        cols["minute"] = idx["mm"]
    for var, aliases in _BUOY_ALIASES.items():
        found = next((a for a in aliases if a in idx), None)
        if found is None:
            raise FormatError(
                f"buoy header missing required column {aliases[0]}", line_no=line_no, column=aliases[0]
            )
        cols[var] = idx[found]
    return cols


def _buoy_value(token: str, var: str) -> Optional[float]:
    if token in _BUOY_MISSING_TOKENS:
        return None
    value = float(token)
    if value in _BUOY_SENTINELS[var]:
        return None
    return value


def parse_buoy_stdmet(stream: TextIO, station_id: str = "") -> ParseResult:
    """Parse an NDBC standard meteorological file into BuoyReadings.

    Column order comes from the header row. Sentinels (99.0 wind, 9999.0
    pressure, 999.0 temperatures, ``MM``) become missing values.
    """
    result = ParseResult(readings=[], source_format="ndbc-stdmet")
    header: Optional[List[str]] = None
    cols: Dict[str, int] = {}

    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if tokens[0].startswith("#"):
                tokens = line.lstrip("#").split()
            elif tokens[0] not in {"YY", "YYYY"}:
                raise FormatError("buoy file has no column header", line_no=line_no)
            header = tokens
            cols = _resolve_buoy_columns(header, line_no)
            continue
        if line.startswith("#"):
            # units row
            units = line.lstrip("#").split()
            if len(units) == len(header):
                for var in BUOY_VARIABLES:
                    result.units[var] = units[cols[var]]
            continue
        if len(tokens) < len(header):
            result.issues.append(RowIssue(line_no, f"expected {len(header)} fields, got {len(tokens)}"))
            continue
        try:
            year = int(tokens[cols["year"]])
            if year < 100:
                year += 1900
            minute = int(tokens[cols["minute"]]) if "minute" in cols else 0
            ts = datetime(
                year,
                int(tokens[cols["month"]]),
                int(tokens[cols["day"]]),
                int(tokens[cols["hour"]]),
                minute,
                tzinfo=timezone.utc,
            )
            values = {var: _buoy_value(tokens[cols[var]], var) for var in BUOY_VARIABLES}
        except ValueError as e:
            result.issues.append(RowIssue(line_no, f"malformed observation: {e}"))
            continue
        result.readings.append(
            BuoyReading(ts, station_id, values["w"], values["p"], values["a"], values["t"])
        )

    if header is None:
        raise FormatError("buoy file is empty or has no column header", line_no=1)
    for issue in result.issues:
        logger.warning("buoy line %d: %s", issue.line_no, issue.message)
    return result


# ---------------------------------------------------------------------------
# Joining and complete cases
# ---------------------------------------------------------------------------


def join_lagged(
    storms: Sequence[StormReading],
    buoys: Sequence[BuoyReading],
    dt: int,
    tolerance: timedelta = DEFAULT_TOLERANCE,
) -> JoinResult:
    """Attach to each storm reading the buoy reading nearest to (time - dt days).

    Readings with no buoy reading within ``tolerance`` are dropped and counted.
    Equidistant candidates resolve to the earlier buoy reading.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if tolerance <= timedelta(0):
        raise ValueError("tolerance must be positive")

    ordered = sorted(buoys, key=lambda b: b.timestamp)
    times = [b.timestamp for b in ordered]
    shift = timedelta(days=dt)

    records: List[JoinedRecord] = []
    dropped = 0
    for s in sorted(storms, key=lambda r: (r.timestamp, r.storm_id)):
        target = s.timestamp - shift
        i = bisect.bisect_left(times, target)
        candidates = []
        if i > 0:
            candidates.append(bisect.bisect_left(times, times[i - 1]))
        if i < len(times):
            candidates.append(i)
        best = best_gap = None
        # ties resolve to the earlier reading: it comes first and wins on equality
        for j in candidates:
            gap = abs(times[j] - target)
            if best_gap is None or gap < best_gap:
                best, best_gap = j, gap
        if best is None or best_gap > tolerance:
            dropped += 1
            continue
        records.append(JoinedRecord(s, ordered[best], dt))

    if dropped:
        logger.info("dt=%d: %d storm readings had no buoy reading within %s", dt, dropped, tolerance)
    return JoinResult(dt=dt, records=records, dropped=dropped)


def complete_cases(records: Sequence[JoinedRecord]) -> Tuple[List[JoinedRecord], DropReport]:
    kept: List[JoinedRecord] = []
    missing = Counter()
    for r in records:
        gaps = r.missing()
        if gaps:
            missing.update(gaps)
            continue
        kept.append(r)
    return kept, DropReport(total=len(records), kept=len(kept), missing_by_variable=dict(missing))


# ---------------------------------------------------------------------------
# Canonical CSV
# ---------------------------------------------------------------------------


def _opt_float(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def write_storms_csv(readings: Iterable[StormReading], stream: TextIO) -> int:
    w = csv.DictWriter(stream, fieldnames=STORM_COLUMNS, lineterminator="\n")
    w.writeheader()
    n = 0
    for r in readings:
        w.writerow(
            {
                "timestamp": to_str(r.timestamp),
                "storm_id": r.storm_id,
                "name": r.storm_name,
                "lat": to_str(r.lat),
                "lon": to_str(r.lon),
                "W": to_str(r.wind),
                "P": to_str(r.pressure),
            }
        )
        n += 1
    return n


def read_storms_csv(stream: TextIO) -> List[StormReading]:
    reader = csv.DictReader(stream)
    if reader.fieldnames != STORM_COLUMNS:
        raise FormatError(f"storm CSV columns {reader.fieldnames} != {STORM_COLUMNS}", line_no=1)
    readings = []
    for row in reader:
        try:
            readings.append(
                StormReading(
                    parse_iso_utc(row["timestamp"]),
                    row["storm_id"],
                    row["name"],
                    float(row["lat"]),
                    float(row["lon"]),
                    _opt_float(row["W"]),
                    _opt_float(row["P"]),
                )
            )
        except (TypeError, ValueError) as e:
            raise FormatError(f"bad storm CSV row: {e}", line_no=reader.line_num) from e
    return readings


def write_buoys_csv(readings: Iterable[BuoyReading], stream: TextIO) -> int:
    w = csv.DictWriter(stream, fieldnames=BUOY_COLUMNS, lineterminator="\n")
    w.writeheader()
    n = 0
    for r in readings:
        w.writerow(
            {
                "timestamp": to_str(r.timestamp),
                "station": r.station_id,
                "w": to_str(r.wind),
                "p": to_str(r.pressure),
                "a": to_str(r.air_temp),
                "t": to_str(r.water_temp),
            }
        )
        n += 1
    return n


def read_buoys_csv(stream: TextIO) -> List[BuoyReading]:
    reader = csv.DictReader(stream)
    if reader.fieldnames != BUOY_COLUMNS:
        raise FormatError(f"buoy CSV columns {reader.fieldnames} != {BUOY_COLUMNS}", line_no=1)
    readings = []
    for row in reader:
        try:
            readings.append(
                BuoyReading(
                    parse_iso_utc(row["timestamp"]),
                    row["station"],
                    _opt_float(row["w"]),
                    _opt_float(row["p"]),
                    _opt_float(row["a"]),
                    _opt_float(row["t"]),
                )
            )
        except (TypeError, ValueError) as e:
            raise FormatError(f"bad buoy CSV row: {e}", line_no=reader.line_num) from e
    return readings


def _is_csv(path: Path) -> bool:
    return path.name.endswith(".csv") or path.name.endswith(".csv.gz")


def load_storms(path: Path) -> ParseResult:
    path = Path(path)
    with open_text(path) as f:
        if _is_csv(path):
            return ParseResult(readings=read_storms_csv(f), source_format="csv", units={"W": "kt", "P": "mb"})
        return parse_best_track(f)


def load_buoys(path: Path, station_id: str = "") -> ParseResult:
    path = Path(path)
    with open_text(path) as f:
        if _is_csv(path):
            readings = read_buoys_csv(f)
            if station_id:
                readings = [r for r in readings if r.station_id == station_id]
            return ParseResult(readings=readings, source_format="csv")
        return parse_buoy_stdmet(f, station_id=station_id)


# ---------------------------------------------------------------------------
# Integrity
# ---------------------------------------------------------------------------


def integrity_report(storms: Sequence[StormReading], buoys: Sequence[BuoyReading]) -> Dict[str, object]:
    """Completeness and quality summary of parsed readings."""

    def presence(values: List[Optional[float]]) -> float:
        return 100.0 * sum(v is not None for v in values) / len(values) if values else 0.0

    keys = Counter((s.storm_id, s.timestamp) for s in storms)
    buoy_keys = Counter(b.timestamp for b in buoys)
    return {
        "storms": {
            "readings": len(storms),
            "storms": len({s.storm_id for s in storms}),
            "presence_pct": {
                "W": presence([s.wind for s in storms]),
                "P": presence([s.pressure for s in storms]),
            },
            "duplicate_keys": sum(c - 1 for c in keys.values() if c > 1),
            "winds_not_multiple_of_5": sum(_wind_lint(s.wind) for s in storms),
            "first": min((s.timestamp for s in storms), default=None),
            "last": max((s.timestamp for s in storms), default=None),
        },
        "buoys": {
            "readings": len(buoys),
            "stations": sorted({b.station_id for b in buoys}),
            "presence_pct": {
                "w": presence([b.wind for b in buoys]),
                "p": presence([b.pressure for b in buoys]),
                "a": presence([b.air_temp for b in buoys]),
                "t": presence([b.water_temp for b in buoys]),
            },
            "duplicate_timestamps": sum(c - 1 for c in buoy_keys.values() if c > 1),
            "first": min((b.timestamp for b in buoys), default=None),
            "last": max((b.timestamp for b in buoys), default=None),
        },
    }
