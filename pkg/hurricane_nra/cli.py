#!/usr/bin/env python3
"""
Batch command-line front end.

Usage:
    python -m hurricane_nra ingest   --storms hurdat2.txt --buoys 42001h2005.txt.gz --output-dir out/
    python -m hurricane_nra verify   --storms out/storms.csv --buoys out/buoys.csv
    python -m hurricane_nra stats    --storms out/storms.csv --buoys out/buoys.csv --output-dir out/
    python -m hurricane_nra pca      --storms ... --buoys ... --dt 3 --rotation varimax --output-dir out/
    python -m hurricane_nra fit      --storms ... --buoys ... --preset factor1-wind --output-dir out/
    python -m hurricane_nra predict  --storms ... --buoys ... --model out/model.json --output-dir out/
    python -m hurricane_nra lag-scan --storms ... --buoys ... --dt-range 1-36 --output-dir out/
    python -m hurricane_nra bin-means --storms ... --buoys ... --output-dir out/
    python -m hurricane_nra conic    --storms ... --buoys ... --preset buoy-14term --output-dir out/
    python -m hurricane_nra export-grid --storms ... --buoys ... --preset buoy-14term --x a --y t --output-dir out/

Every subcommand writes only inside --output-dir and finishes with
run_manifest.json (config, input digests, record and drop counts).
Exit codes: 0 ok, 2 unreadable input or bad configuration, 3 model/numerics failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from hurricane_nra import __version__
from hurricane_nra.bins import bin_means, bins_frame, pressure_bin_wind_means, reference_wind, variability_report
from hurricane_nra.classify import (
    DEFAULT_SCALE,
    load_scale,
    pressure_histogram,
    storm_table,
    summarize,
    wind_histogram,
)
from hurricane_nra.conics import (
    data_range,
    default_fixed,
    grid_evaluate,
    grid_sidecar,
    model_id,
    scatter_columns,
    slice_model,
    variable_pairs,
)
from hurricane_nra.errors import InputError, NRAError
from hurricane_nra.factor import (
    ROTATIONS,
    constancy_index,
    eigenvalues_frame,
    extract_factors,
    filter_constant_columns,
    loadings_frame,
    membership_table,
    summary_frame,
)
from hurricane_nra.implicit import (
    PHYSICAL_BAND,
    ImplicitModel,
    fit_unity,
    model_from_json,
    model_to_json,
    quadratic_in,
    select_root,
    select_root_physical,
)
from hurricane_nra.ingest import (
    BUOY_VARIABLES,
    VARIABLES,
    BuoyReading,
    DropReport,
    JoinedRecord,
    ParseResult,
    StormReading,
    complete_cases,
    integrity_report,
    join_lagged,
    load_buoys,
    load_storms,
    write_buoys_csv,
    write_storms_csv,
)
from hurricane_nra.lagscan import DEFAULT_DT_RANGE, correlation_curve, correlation_curve_csv, scan
from hurricane_nra.linalg import correlation_matrix, eigen_symmetric
from hurricane_nra.outputs import iso_utc, manifest_record, write_frame, write_json
from hurricane_nra.terms import TermDescriptor, evaluate, expand_terms, parse_terms

logger = logging.getLogger(__name__)

PRESETS: Dict[str, Tuple[str, ...]] = {
    "factor1-wind": ("W", "P", "W^2", "P^2", "Ww", "Wp", "Wa", "Wt", "WP", "Pp"),
    "buoy-6term": ("p", "a", "t", "p^2", "a^2", "t^2"),
    "buoy-14term": ("w", "p", "a", "t", "w^2", "p^2", "a^2", "t^2", "wp", "wa", "wt", "pa", "pt", "at"),
}

DEFAULT_DT = 3
DEFAULT_STEPS = 51
EPOCH_2000 = datetime(2000, 1, 1, tzinfo=timezone.utc)

COMMANDS = ("ingest", "verify", "stats", "pca", "fit", "predict", "lag-scan", "bin-means", "conic", "export-grid")
NEEDS_BUOYS = {"pca", "fit", "predict", "lag-scan", "bin-means", "conic", "export-grid"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    storms: Optional[Path] = None
    buoys: Optional[Path] = None
    station: str = ""
    dt: int = DEFAULT_DT
    dt_range: Tuple[int, ...] = tuple(DEFAULT_DT_RANGE)
    tolerance_min: float = 90.0
    preset: Optional[str] = None
    terms: Tuple[str, ...] = ()
    rotation: str = "varimax"
    scale: Optional[Path] = None
    output_dir: Path = Path("out")
    model: Optional[Path] = None
    n_factors: Optional[int] = None
    x: Optional[str] = None
    y: Optional[str] = None
    steps: int = DEFAULT_STEPS
    target: str = "W"
    band: Tuple[float, float] = PHYSICAL_BAND

    @property
    def tolerance(self) -> timedelta:
        return timedelta(minutes=self.tolerance_min)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.storms is None:
            raise InputError("--storms is required")
        if self.command in NEEDS_BUOYS and self.buoys is None:
            raise InputError(f"{self.command} needs --buoys")
        for flag, path in (("--storms", self.storms), ("--buoys", self.buoys), ("--scale", self.scale), ("--model", self.model)):
            if path is not None and not Path(path).exists():
                raise InputError(f"{flag} file not found: {path}")
        if self.preset is not None and self.preset not in PRESETS:
            raise InputError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.preset is not None and self.terms:
            raise InputError("give either --preset or --terms, not both")
        if self.dt < 0:
            raise InputError(f"--dt must be >= 0, got {self.dt}")
        if self.tolerance_min <= 0:
            raise InputError("--tolerance-min must be positive")
        if self.target not in VARIABLES:
            raise InputError(f"--target must be one of {list(VARIABLES)}")
        if self.command == "export-grid" and (self.x is None or self.y is None):
            raise InputError("export-grid needs --x and --y")
        if (self.x is None) != (self.y is None):
            raise InputError("--x and --y go together")
        for flag, var in (("--x", self.x), ("--y", self.y)):
            if var is not None and var not in VARIABLES:
                raise InputError(f"{flag} must be one of {list(VARIABLES)}, got {var!r}")
        if self.steps < 2:
            raise InputError(f"--steps must be >= 2, got {self.steps}")
        if not self.band[0] < self.band[1]:
            raise InputError(f"--band-min must be below --band-max, got {self.band}")
        return self

    def to_dict(self) -> Dict[str, object]:
        d = asdict(self)
        return {k: (str(v) if isinstance(v, Path) else v) for k, v in d.items()}


def parse_dt_range(text: str) -> Tuple[int, ...]:
    """``1-36``, ``1:36`` (inclusive) or a comma list ``1,3,5``."""
    try:
        if "," in text:
            values = tuple(int(v) for v in text.split(",") if v.strip())
        else:
            sep = ":" if ":" in text else "-"
            if sep in text:
                lo, hi = (int(v) for v in text.split(sep, 1))
                values = tuple(range(lo, hi + 1))
            else:
                values = (int(text),)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dt range {text!r}; use 1-36, 1:36 or 1,2,3")
    if not values or min(values) < 0:
        raise argparse.ArgumentTypeError(f"dt range {text!r} must be nonempty and nonnegative")
    return values


# ---------------------------------------------------------------------------
# Run context
# ---------------------------------------------------------------------------


@dataclass
class Run:
    config: RunConfig
    storms: List[StormReading] = field(default_factory=list)
    buoys: List[BuoyReading] = field(default_factory=list)
    counts: Dict[str, object] = field(default_factory=dict)
    written: List[str] = field(default_factory=list)

    @property
    def out(self) -> Path:
        return self.config.output_dir

    def emit_frame(self, name: str, df: pd.DataFrame) -> None:
        write_frame(self.out / name, df)
        self.written.append(name)
        print(f"💾 Wrote: {self.out / name} ({len(df):,} rows)")

    def emit_json(self, name: str, obj) -> None:
        write_json(self.out / name, obj)
        self.written.append(name)
        print(f"💾 Wrote: {self.out / name}")

    def emit_text(self, name: str, text: str) -> None:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.written.append(name)
        print(f"💾 Wrote: {path}")

    def load(self) -> None:
        cfg = self.config
        print(f"📖 Loading storms: {cfg.storms}")
        storms = load_storms(cfg.storms)
        self.storms = storms.readings
        self._note_issues("storms", storms)
        if cfg.buoys is not None:
            print(f"📖 Loading buoys: {cfg.buoys}")
            buoys = load_buoys(cfg.buoys, cfg.station)
            self.buoys = buoys.readings
            self._note_issues("buoys", buoys)

    def _note_issues(self, source: str, parsed: ParseResult) -> None:
        for issue in parsed.issues:
            logger.warning("%s line %d: %s", source, issue.line_no, issue.message)
        self.counts[f"{source}_readings"] = len(parsed.readings)
        self.counts[f"{source}_issues"] = len(parsed.issues)
        self.counts[f"{source}_lints"] = len(parsed.lints)
        print(f"   {len(parsed.readings):,} {source} readings ({len(parsed.issues)} issues, {len(parsed.lints)} lints)")

    def joined(self, dt: Optional[int] = None) -> List[JoinedRecord]:
        dt = self.config.dt if dt is None else dt
        result = join_lagged(self.storms, self.buoys, dt, self.config.tolerance)
        records, drops = complete_cases(result.records)
        self.counts["dt"] = dt
        self.counts["joined"] = len(result.records)
        self.counts["unjoined"] = result.dropped
        self.counts["complete_cases"] = drops.to_dict()
        print(f"   dt={dt}: {len(result.records):,} joined, {len(records):,} complete ({_drop_line(drops)})")
        return records

    def terms(self, default: Optional[Sequence[str]] = None) -> List[TermDescriptor]:
        cfg = self.config
        if cfg.terms:
            return parse_terms(cfg.terms, VARIABLES)
        if cfg.preset is not None:
            return parse_terms(PRESETS[cfg.preset], VARIABLES)
        if default is None:
            return expand_terms(VARIABLES)
        return parse_terms(default, VARIABLES)

    def model(self, records: Sequence[JoinedRecord]) -> ImplicitModel:
        if self.config.model is not None:
            print(f"📖 Loading model: {self.config.model}")
            return model_from_json(Path(self.config.model).read_text(encoding="utf-8"))
        return fit_unity(evaluate(self.terms(PRESETS["factor1-wind"]), records), VARIABLES)

    def finish(self) -> Dict[str, object]:
        inputs = {"storms": self.config.storms, "buoys": self.config.buoys, "scale": self.config.scale, "model": self.config.model}
        manifest = manifest_record(self.config.command, self.config.to_dict(), inputs, self.counts)
        manifest["outputs"] = sorted(self.written)
        manifest["version"] = __version__
        write_json(self.out / "run_manifest.json", manifest)
        print(f"💾 Wrote: {self.out / 'run_manifest.json'}")
        return manifest


def _drop_line(drops: DropReport) -> str:
    if not drops.dropped:
        return "no drops"
    parts = ", ".join(f"{k} missing {v}" for k, v in sorted(drops.missing_by_variable.items()))
    return f"{drops.dropped} dropped: {parts}"


def _banner(title: str) -> None:
    print("=" * 70)
    print(title)
    print("=" * 70)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(run: Run) -> None:
    """Parse raw inputs into canonical storms.csv / buoys.csv."""
    storms = load_storms(run.config.storms)
    run.storms = storms.readings
    run._note_issues("storms", storms)
    issues = [("storms", "issue", i) for i in storms.issues] + [("storms", "lint", i) for i in storms.lints]
    with open(_ensure(run.out / "storms.csv"), "w", encoding="utf-8", newline="") as f:
        write_storms_csv(run.storms, f)
    run.written.append("storms.csv")
    print(f"💾 Wrote: {run.out / 'storms.csv'}")

    if run.config.buoys is not None:
        buoys = load_buoys(run.config.buoys, run.config.station)
        run.buoys = buoys.readings
        run._note_issues("buoys", buoys)
        issues += [("buoys", "issue", i) for i in buoys.issues] + [("buoys", "lint", i) for i in buoys.lints]
        with open(_ensure(run.out / "buoys.csv"), "w", encoding="utf-8", newline="") as f:
            write_buoys_csv(run.buoys, f)
        run.written.append("buoys.csv")
        print(f"💾 Wrote: {run.out / 'buoys.csv'}")

    run.emit_frame(
        "ingest_issues.csv",
        pd.DataFrame(
            [{"source": s, "kind": k, "line_no": i.line_no, "message": i.message} for s, k, i in issues],
            columns=["source", "kind", "line_no", "message"],
        ),
    )


def _ensure(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def cmd_verify(run: Run) -> None:
    """Print the completeness and quality report."""
    run.load()
    report = integrity_report(run.storms, run.buoys)
    s, b = report["storms"], report["buoys"]

    _banner("STORM / BUOY DATA INTEGRITY VERIFICATION")
    print()
    print("1. STORM READINGS")
    print("-" * 70)
    print(f"   Readings: {s['readings']:,} across {s['storms']:,} storms")
    print(f"   Span: {_ts(s['first'])} .. {_ts(s['last'])}")
    for var, pct in s["presence_pct"].items():
        print(f"   {var:3s} present: {pct:5.1f}%")
    print(f"   Duplicate (storm, time) keys: {s['duplicate_keys']}")
    print(f"   Winds not a multiple of 5: {s['winds_not_multiple_of_5']}")
    print()
    print("2. BUOY READINGS")
    print("-" * 70)
    print(f"   Readings: {b['readings']:,} from station(s) {', '.join(b['stations']) or '-'}")
    print(f"   Span: {_ts(b['first'])} .. {_ts(b['last'])}")
    for var, pct in b["presence_pct"].items():
        print(f"   {var:3s} present: {pct:5.1f}%")
    print(f"   Duplicate timestamps: {b['duplicate_timestamps']}")
    print()

    ok = s["readings"] > 0 and s["duplicate_keys"] == 0 and b["duplicate_timestamps"] == 0
    print(f"   Status: {'✅ PASS' if ok else '⚠️  CHECK WARNINGS'}")
    run.emit_json("integrity_report.json", report)


def _ts(value: Optional[datetime]) -> str:
    return iso_utc(value) if value is not None else "-"


def cmd_stats(run: Run) -> None:
    """Storm categories, wind statistics and buoy constancy."""
    run.load()
    scale = load_scale(run.config.scale) if run.config.scale is not None else DEFAULT_SCALE
    summary = summarize(run.storms, scale)
    run.counts["storms"] = summary.n_storms

    _banner("STORM SUMMARY")
    print(f"   Scale: {summary.scale_name}")
    print(f"   Storms: {summary.n_storms:,}  Readings: {summary.n_readings:,}")
    print(f"   Mean wind: {summary.mean_wind:.1f} kt  Mode: {summary.mode_wind:g} kt")
    for label, count in summary.storms_by_category.items():
        print(f"   {label:20s}: {count:5,} storms  {summary.readings_by_category[label]:7,} readings")

    run.emit_json("storm_summary.json", {"summary": summary.to_dict(), "scale": scale.to_dict()})
    run.emit_frame("storms_by_category.csv", storm_table(run.storms, scale))
    run.emit_frame("wind_histogram.csv", wind_histogram(run.storms))
    run.emit_frame("pressure_histogram.csv", pressure_histogram(run.storms))

    if run.buoys:
        rows = []
        columns = {"w": "wind", "p": "pressure", "a": "air_temp", "t": "water_temp"}
        for var in BUOY_VARIABLES:
            vals = [getattr(b, columns[var]) for b in run.buoys if getattr(b, columns[var]) is not None]
            if vals and any(v != 0 for v in vals):
                rows.append({"variable": var, "n": len(vals), "constancy": constancy_index(vals)})
        run.emit_frame("buoy_constancy.csv", pd.DataFrame(rows, columns=["variable", "n", "constancy"]))


def cmd_pca(run: Run) -> None:
    """Factor extraction over the term matrix."""
    run.load()
    records = run.joined()
    M = evaluate(run.terms(), records)
    M, flat = filter_constant_columns(M)
    run.counts["constant_terms_dropped"] = flat

    n_factors = run.config.n_factors
    if n_factors is None:
        eig = eigen_symmetric(correlation_matrix(M))
        n_factors = max(1, int(np.sum(eig.values >= 1.0)))
    model = extract_factors(M, n_factors, rotation=run.config.rotation)

    _banner(f"FACTOR EXTRACTION ({model.rotation}, {model.n_factors} factors, {len(M.names)} terms)")
    for j, (ss, prop) in enumerate(zip(model.ss_loadings, model.proportion_variance), start=1):
        print(f"   factor {j}: SS loading {ss:8.3f}  proportion {prop:6.3f}")
    print(f"   Retained (SS >= 1): {model.retained}")

    run.emit_frame("factor_loadings.csv", loadings_frame(model))
    run.emit_frame("factor_summary.csv", summary_frame(model))
    run.emit_frame("factor_membership.csv", membership_table(model))
    run.emit_frame("eigenvalues.csv", eigenvalues_frame(model))


def cmd_fit(run: Run) -> None:
    """Fit the unity model and write model.json."""
    run.load()
    records = run.joined()
    M = evaluate(run.terms(PRESETS["factor1-wind"]), records)
    model = fit_unity(M, VARIABLES)
    run.counts["fit_records"] = model.n_records

    _banner(f"UNITY FIT ({len(model.terms)} terms, n={model.n_records})")
    for name, a in zip(model.term_names, model.alpha):
        print(f"   {name:6s} {a: .10e}")
    print(f"   R^2: {model.r_squared:.7f}")

    run.emit_text("model.json", model_to_json(model))
    run.emit_frame("coefficients.csv", pd.DataFrame({"term": model.term_names, "alpha": model.alpha}))


def cmd_predict(run: Run) -> None:
    """Invert the model for the target and bound it per record."""
    run.load()
    records = run.joined()
    model = run.model(records)
    target = run.config.target
    pressure_means = pressure_bin_wind_means(records)

    rows = []
    n_complex = 0
    for r in records:
        values = r.values()
        bounds = quadratic_in(model, target, values)
        observed = values[target]
        row = {
            "key": r.key,
            "storm_id": r.storm.storm_id,
            "timestamp": iso_utc(r.storm.timestamp),
            "hours_since_2000": (r.storm.timestamp - EPOCH_2000).total_seconds() / 3600.0,
            "lat": r.storm.lat,
            "lon": r.storm.lon,
            "observed": observed,
            "lower": bounds.lower,
            "upper": bounds.upper,
            "status": bounds.status,
            "selected": None,
            "root": "",
            "physical": None,
        }
        if bounds.has_real_root:
            chosen = select_root(bounds, observed)
            row["selected"] = chosen
            row["root"] = "L" if chosen == bounds.lower else "U"
            ref = reference_wind(pressure_means, values["P"]) if target == "W" else None
            row["physical"] = select_root_physical(bounds, run.config.band, ref)
        else:
            n_complex += 1
        rows.append(row)
    run.counts["complex_roots"] = n_complex

    df = pd.DataFrame(rows, columns=list(rows[0]) if rows else ["key"])
    for c in ("observed", "lower", "upper", "selected", "physical", "lat", "lon", "hours_since_2000"):
        if c in df:
            df[c] = df[c].astype(float)
    print(f"   {len(rows):,} records inverted for {target}; {n_complex} with complex roots")
    run.emit_frame("predictions.csv", df)


def cmd_lag_scan(run: Run) -> None:
    """Correlation of observed and estimated wind across day lags."""
    run.load()
    terms = run.terms(PRESETS["factor1-wind"])
    result = scan(run.storms, run.buoys, terms, run.config.dt_range, run.config.tolerance, run.config.target)
    curve = correlation_curve(result)
    run.counts["lags"] = len(result.entries)
    run.counts["skipped_lags"] = int(curve["skipped"].sum())
    run.counts["best_lag"] = result.best_lag

    _banner("LAG SCAN")
    for e in result.entries:
        corr = "skipped" if e.skipped else f"{e.correlation: .7f}"
        print(f"   dt={e.dt:3d}  n={e.n_records:6,}  r={corr}")
    print(f"   ✅ Best lag: dt={result.best_lag} (r={result.entry(result.best_lag).correlation:.7f})")

    run.emit_text("lag_scan.csv", correlation_curve_csv(result))
    run.emit_json("lag_scan.json", {"best_lag": result.best_lag, "terms": [t.name for t in terms], "target": run.config.target})


def cmd_bin_means(run: Run) -> None:
    """Mean buoy conditions per storm wind and their constancy."""
    run.load()
    records = run.joined()
    summaries = bin_means(records)
    run.emit_frame("wind_bins.csv", bins_frame(summaries))
    report = variability_report(summaries)
    _banner("CONSTANCY OF MEAN BUOY CONDITIONS BY STORM WIND")
    for row in report.itertuples(index=False):
        print(f"   {row.variable}: {row.constancy:.7f}")
    run.emit_frame("variability.csv", report)


def cmd_conic(run: Run) -> None:
    """Classify two-variable slices of the model."""
    run.load()
    records = run.joined()
    model = run.model(records)
    cfg = run.config
    pairs = [(cfg.x, cfg.y)] if cfg.x is not None else variable_pairs(model)

    slices = []
    present = model.model_variables()
    for var_x, var_y in pairs:
        others = [v for v in present if v not in (var_x, var_y)]
        conic = slice_model(model, var_x, var_y, default_fixed(records, others))
        slices.append(conic)
        print(f"   ({var_x}, {var_y}): {conic.kind}")
        run.emit_frame(f"scatter_{var_x}_{var_y}.csv", scatter_columns(records, var_x, var_y))

    table = pd.DataFrame(
        [{"var_x": c.var_x, "var_y": c.var_y, **dict(zip("ABCDEF", c.coefficients)), "kind": c.kind} for c in slices],
        columns=["var_x", "var_y", "A", "B", "C", "D", "E", "F", "kind"],
    )
    run.emit_frame("conic_slices.csv", table)
    run.emit_json("conic_slices.json", {"model_id": model_id(model), "slices": [c.to_dict() for c in slices]})


def cmd_export_grid(run: Run) -> None:
    """Evaluate u_hat on a grid for contouring."""
    run.load()
    records = run.joined()
    model = run.model(records)
    cfg = run.config
    others = [v for v in model.model_variables() if v not in (cfg.x, cfg.y)]
    fixed = default_fixed(records, others)
    x_lo, x_hi = data_range(records, cfg.x)
    y_lo, y_hi = data_range(records, cfg.y)
    grid = grid_evaluate(model, cfg.x, (x_lo, x_hi, cfg.steps), cfg.y, (y_lo, y_hi, cfg.steps), fixed)
    stem = f"grid_{cfg.x}_{cfg.y}"
    run.emit_frame(f"{stem}.csv", grid.to_frame())
    run.emit_json(f"{stem}.json", grid_sidecar(grid, model))
    run.emit_frame(f"scatter_{cfg.x}_{cfg.y}.csv", scatter_columns(records, cfg.x, cfg.y))


HANDLERS: Dict[str, Callable[[Run], None]] = {
    "ingest": cmd_ingest,
    "verify": cmd_verify,
    "stats": cmd_stats,
    "pca": cmd_pca,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "lag-scan": cmd_lag_scan,
    "bin-means": cmd_bin_means,
    "conic": cmd_conic,
    "export-grid": cmd_export_grid,
}


def run_config(config: RunConfig) -> Dict[str, object]:
    run = Run(config.validate())
    HANDLERS[config.command](run)
    return run.finish()


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--storms", type=Path, default=None, help="Best-track file (HURDAT2, UNISYS, or canonical storms.csv; .gz ok)")
    common.add_argument("--buoys", type=Path, default=None, help="NDBC stdmet file or canonical buoys.csv (.gz ok)")
    common.add_argument("--station", default="", help="Buoy station id (one station per run)")
    common.add_argument("--dt", type=int, default=DEFAULT_DT, help="Days the buoy reading precedes the storm reading")
    common.add_argument("--dt-range", type=parse_dt_range, default=tuple(DEFAULT_DT_RANGE), help="Lags to scan, e.g. 1-36")
    common.add_argument("--tolerance-min", type=float, default=90.0, help="Join tolerance in minutes")
    common.add_argument("--preset", default=None, choices=sorted(PRESETS), help="Named model term list")
    common.add_argument("--terms", default="", help="Comma-separated term names, e.g. W,W^2,Ww")
    common.add_argument("--rotation", default="varimax", choices=ROTATIONS, help="Factor rotation")
    common.add_argument("--n-factors", type=int, default=None, help="Factors to extract (default: eigenvalues >= 1)")
    common.add_argument("--scale", type=Path, default=None, help="Category scale JSON/CSV (default: stand-in wind scale)")
    common.add_argument("--model", type=Path, default=None, help="Fitted model JSON to reuse instead of refitting")
    common.add_argument("--target", default="W", help="Variable to invert the model for")
    common.add_argument("--band-min", type=float, default=PHYSICAL_BAND[0], help="Lower edge of the physical root band")
    common.add_argument("--band-max", type=float, default=PHYSICAL_BAND[1], help="Upper edge of the physical root band")
    common.add_argument("--x", default=None, help="Conic slice x variable")
    common.add_argument("--y", default=None, help="Conic slice y variable")
    common.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="Grid steps per axis")
    common.add_argument("--output-dir", type=Path, default=Path("out"), help="Directory for every output file")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    ap = argparse.ArgumentParser(prog="hurricane_nra", description="Hurricane/buoy non-response analysis")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=(HANDLERS[name].__doc__ or name).strip().splitlines()[0])
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        storms=args.storms,
        buoys=args.buoys,
        station=args.station,
        dt=args.dt,
        dt_range=tuple(args.dt_range),
        tolerance_min=args.tolerance_min,
        preset=args.preset,
        terms=tuple(t.strip() for t in args.terms.split(",") if t.strip()),
        rotation=args.rotation,
        scale=args.scale,
        output_dir=args.output_dir,
        model=args.model,
        n_factors=args.n_factors,
        x=args.x,
        y=args.y,
        steps=args.steps,
        target=args.target,
        band=(args.band_min, args.band_max),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s: %(message)s")
    try:
        run_config(config_from_args(args))
    except (InputError, FileNotFoundError, UnicodeDecodeError) as e:
        print(f"❌ {getattr(e, 'stage', 'input')}: {e}", file=sys.stderr)
        return 2
    except NRAError as e:
        print(f"❌ {e.stage}: {e}", file=sys.stderr)
        return 3
    print("✅ Done")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
