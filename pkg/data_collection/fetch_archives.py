#!/usr/bin/env python3
"""
Archive download for the hurricane/buoy analysis (public data).

Goal
----
Fetch the raw inputs the analysis reads, exactly as published, and keep a
reproducible log of what was fetched:
- NDBC historical standard-meteorological files, one per station-year
  (``{station}h{year}.txt.gz``)
- one HURDAT2 Atlantic best-track text file

Failures (404 for station-years that were never archived, timeouts, ...) are
recorded in the log, never silently skipped.

Output:
  research/data/raw/{station}h{year}.txt.gz
  research/data/raw/<hurdat2 file name>
  research/data/raw/fetch_log.jsonl   one JSON object per attempted download

Usage:
  python3 data_collection/fetch_archives.py --station 42001 --years 2000-2009
  python3 data_collection/fetch_archives.py --station 42001 --years 2005 --skip-existing
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import requests

FETCH_LOG_SCHEMA_VERSION = "fetch_log_v1"
NDBC_STDMET_URL = "https://www.ndbc.noaa.gov/data/historical/stdmet/{station}h{year}.txt.gz"
DEFAULT_HURDAT2_URL = "https://www.nhc.noaa.gov/data/hurdat/hurdat2-1851-2023-051124.txt"
UA = "hurricane-nra-fetch/0.1 (+research replication; contact via repository)"

RETRY_STATUSES = {408, 425, 429, 500, 502, 503, 504, 522, 523, 524}


@dataclass
class FetchResult:
    ok: bool
    url: str
    path: str
    http_status: Optional[int]
    bytes: int
    sha256: Optional[str]
    attempts: int
    elapsed_ms: Optional[int]
    error: Optional[str]


def backoff_seconds(attempt: int, backoff_base: float, backoff_max: float, jitter: float) -> float:
    s = min(float(backoff_max), float(backoff_base) * (2 ** (attempt - 1)))
    return max(0.0, s) + (random.uniform(0.0, float(jitter)) if jitter else 0.0)


def fetch_to_file(
    session: requests.Session,
    url: str,
    dest: Path,
    *,
    timeout: int,
    max_attempts: int,
    backoff_base: float,
    backoff_max: float,
    jitter: float,
    sleep: Callable[[float], None] = time.sleep,
) -> FetchResult:
    """
    Download ``url`` to ``dest`` with retry/backoff.

    Only transient statuses and connection errors are retried; the file is
    written only for a response below 400.
    """
    max_attempts = max(1, int(max_attempts))
    last_err: Optional[str] = None

    for attempt in range(1, max_attempts + 1):
        try:
            t0 = time.monotonic()
            r = session.get(url, timeout=timeout, allow_redirects=True)
            elapsed_ms = int((time.monotonic() - t0) * 1000)
            status = int(r.status_code)

            if status in RETRY_STATUSES and attempt < max_attempts:
                ra = r.headers.get("retry-after")
                try:
                    wait = float(ra) if ra else backoff_seconds(attempt, backoff_base, backoff_max, jitter)
                except ValueError:
                    wait = backoff_seconds(attempt, backoff_base, backoff_max, jitter)
                sleep(wait)
                continue

            if status >= 400:
                return FetchResult(False, url, str(dest), status, 0, None, attempt, elapsed_ms, f"HTTP {status}")

            body = r.content
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_bytes(body)
            return FetchResult(
                True, url, str(dest), status, len(body), hashlib.sha256(body).hexdigest(), attempt, elapsed_ms, None
            )
        except requests.RequestException as e:
            last_err = str(e)
            if attempt < max_attempts:
                sleep(backoff_seconds(attempt, backoff_base, backoff_max, jitter))
                continue

    return FetchResult(False, url, str(dest), None, 0, None, max_attempts, None, last_err)


def parse_years(text: str) -> List[int]:
    if "-" in text:
        lo, hi = (int(v) for v in text.split("-", 1))
        return list(range(lo, hi + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def planned_downloads(station: str, years: Sequence[int], hurdat_url: str, out_dir: Path) -> List[Tuple[str, Path]]:
    plan = [(NDBC_STDMET_URL.format(station=station.lower(), year=y), out_dir / f"{station.lower()}h{y}.txt.gz") for y in years]
    if hurdat_url:
        plan.append((hurdat_url, out_dir / hurdat_url.rsplit("/", 1)[-1]))
    return plan


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--station", required=True, help="NDBC station id, e.g. 42001")
    ap.add_argument("--years", default="2000-2009", help="Year range (2000-2009) or list (2004,2005)")
    ap.add_argument("--hurdat-url", default=DEFAULT_HURDAT2_URL, help="HURDAT2 file URL ('' to skip)")
    ap.add_argument("--out-dir", default="research/data/raw", help="Download directory")
    ap.add_argument("--timeout", type=int, default=60, help="HTTP request timeout (seconds)")
    ap.add_argument("--retries", type=int, default=3, help="Max attempts per file")
    ap.add_argument("--backoff-base", type=float, default=1.0, help="Backoff base seconds for retries")
    ap.add_argument("--backoff-max", type=float, default=30.0, help="Backoff max seconds for retries")
    ap.add_argument("--jitter", type=float, default=0.2, help="Random jitter added to sleeps/backoff (seconds)")
    ap.add_argument("--sleep", type=float, default=1.0, help="Delay between files (seconds)")
    ap.add_argument("--skip-existing", action="store_true", help="Do not re-download files already present")
    args = ap.parse_args()

    try:
        years = parse_years(args.years)
    except ValueError:
        raise SystemExit(f"Invalid --years: {args.years}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "fetch_log.jsonl"

    session = requests.Session()
    session.headers.update({"User-Agent": UA})

    plan = planned_downloads(args.station, years, args.hurdat_url, out_dir)
    ok = failed = skipped = 0
    print(f"📥 {len(plan)} file(s) -> {out_dir}")
    with open(log_path, "a", encoding="utf-8") as log:
        for i, (url, dest) in enumerate(plan, start=1):
            if args.skip_existing and dest.exists():
                skipped += 1
                print(f"   [{i}/{len(plan)}] ⏭️  {dest.name} (exists)")
                continue
            res = fetch_to_file(
                session,
                url,
                dest,
                timeout=args.timeout,
                max_attempts=args.retries,
                backoff_base=args.backoff_base,
                backoff_max=args.backoff_max,
                jitter=args.jitter,
            )
            rec = {"schema_version": FETCH_LOG_SCHEMA_VERSION, "created_at_utc": utc_now_iso(), **asdict(res)}
            log.write(json.dumps(rec, ensure_ascii=False) + "\n")
            log.flush()
            if res.ok:
                ok += 1
                print(f"   [{i}/{len(plan)}] ✅ {dest.name} ({res.bytes:,} bytes)")
            else:
                failed += 1
                print(f"   [{i}/{len(plan)}] ❌ {dest.name}: {res.error}")
            if i < len(plan) and args.sleep:
                time.sleep(args.sleep + (random.uniform(0.0, args.jitter) if args.jitter else 0.0))

    print(f"✅ Done: {ok} fetched, {failed} failed, {skipped} skipped. Log: {log_path}")


if __name__ == "__main__":
    main()
