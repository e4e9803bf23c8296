import gzip
import io
from datetime import datetime, timedelta, timezone

import pytest

from helpers import make_buoy, make_storm
from hurricane_nra.errors import FormatError
from hurricane_nra.ingest import (
    BuoyReading,
    JoinedRecord,
    StormReading,
    complete_cases,
    integrity_report,
    join_lagged,
    load_buoys,
    load_storms,
    parse_best_track,
    parse_buoy_stdmet,
    read_buoys_csv,
    read_storms_csv,
    write_buoys_csv,
    write_storms_csv,
)

UTC = timezone.utc


def test_hurdat2_sample(fixtures_dir):
    with open(fixtures_dir / "hurdat2_sample.txt", encoding="utf-8") as f:
        res = parse_best_track(f)
    assert res.source_format == "hurdat2"
    assert len(res.readings) == 7
    assert res.issues == []
    assert {r.storm_id for r in res.readings} == {"AL012005", "AL122005"}

    first = res.readings[0]
    assert first.storm_name == "ARLENE"
    assert first.timestamp == datetime(2005, 6, 8, 18, 0, tzinfo=UTC)
    assert (first.lat, first.lon) == (17.5, -84.5)
    assert (first.wind, first.pressure) == (25.0, 1005.0)

    # -999 is missing, not zero
    assert res.readings[2].pressure is None
    assert [i.line_no for i in res.lints] == [4]

    katrina = [r for r in res.readings if r.storm_id == "AL122005"]
    assert len(katrina) == 4
    assert katrina[-1].wind == 150.0


def test_hurdat2_row_count_mismatch_is_reported():
    text = "AL012005, ARLENE, 3,\n20050608, 1800,  , TD, 17.5N,  84.5W,  25, 1005,\n"
    res = parse_best_track(io.StringIO(text))
    assert len(res.readings) == 1
    assert len(res.issues) == 1
    assert res.issues[0].line_no == 1


def test_hurdat2_bad_rows_are_collected_with_line_numbers():
    text = (
        "AL012005, ARLENE, 3,\n"
        "20050608, 1800,  , TD, 17.5N,  84.5W,  65,  987,\n"
        "20050609, 0000,  , TS, 18.2N,  84.6W,  xx, 1003,\n"
        "20050609, 0600,  , TS, 19.0N,  84.8W,  50,  500,\n"
    )
    res = parse_best_track(io.StringIO(text))
    assert [(r.wind, r.pressure) for r in res.readings] == [(65.0, 987.0)]
    assert [i.line_no for i in res.issues] == [3, 4]


def test_best_track_unreadable_header():
    with pytest.raises(FormatError) as e:
        parse_best_track(io.StringIO("this is not a best track file\n"))
    assert e.value.line_no == 1


def test_best_track_empty_input():
    res = parse_best_track(io.StringIO(""))
    assert res.readings == []
    assert res.issues == []


def test_unisys_sample(fixtures_dir):
    with open(fixtures_dir / "unisys_sample.txt", encoding="utf-8") as f:
        res = parse_best_track(f)
    assert res.source_format == "unisys"
    assert len(res.readings) == 4
    assert {r.storm_id for r in res.readings} == {"KATRINA-2005"}
    assert res.readings[0].timestamp == datetime(2005, 8, 23, 18, tzinfo=UTC)
    assert res.readings[0].lon == -75.1
    assert res.readings[2].pressure is None
    assert (res.readings[3].wind, res.readings[3].pressure) == (125.0, 913.0)


def test_unisys_year_rollover():
    text = (
        "Date: 30 DEC 2004\n"
        "Tropical Storm ZETA\n"
        "ADV  LAT    LON      TIME     WIND  PR  STAT\n"
        "  1  24.00  -38.00 12/31/18Z   45  1000 TROPICAL STORM\n"
        "  2  24.50  -39.00 01/01/00Z   40  1002 TROPICAL STORM\n"
    )
    res = parse_best_track(io.StringIO(text))
    assert [r.timestamp.year for r in res.readings] == [2004, 2005]


def test_stdmet_sample_sentinels(fixtures_dir):
    with open(fixtures_dir / "stdmet_sample.txt", encoding="utf-8") as f:
        res = parse_buoy_stdmet(f, station_id="42001")
    assert len(res.readings) == 4
    full = res.readings[0]
    assert full.timestamp == datetime(2005, 8, 25, 0, 50, tzinfo=UTC)
    assert (full.wind, full.pressure, full.air_temp, full.water_temp) == (7.0, 1012.3, 28.4, 29.6)
    assert full.station_id == "42001"

    gaps = res.readings[2]
    assert gaps.wind is None and gaps.pressure is None and gaps.air_temp is None
    assert gaps.water_temp == 29.5

    mm = res.readings[3]
    assert mm.water_temp is None
    assert mm.air_temp == 28.1
    assert res.units["p"] == "hPa"


def test_stdmet_old_header_with_bar(fixtures_dir):
    with open(fixtures_dir / "stdmet_old_header.txt", encoding="utf-8") as f:
        res = parse_buoy_stdmet(f)
    assert len(res.readings) == 2
    assert res.readings[0].pressure == 1013.5
    assert res.readings[0].timestamp == datetime(1999, 8, 30, 0, 0, tzinfo=UTC)


def test_stdmet_two_digit_year():
    text = "YY MM DD hh WD WSPD GST WVHT DPD APD MWD BAR ATMP WTMP DEWP VIS\n" "98 09 01 06 90 4.0 5.0 0.5 6.0 4.0 999 1015.0 27.0 28.0 999.0 99.0\n"
    res = parse_buoy_stdmet(io.StringIO(text))
    assert res.readings[0].timestamp == datetime(1998, 9, 1, 6, tzinfo=UTC)


def test_stdmet_header_only():
    res = parse_buoy_stdmet(io.StringIO("#YY  MM DD hh mm WDIR WSPD GST PRES ATMP WTMP\n"))
    assert res.readings == []


def test_stdmet_missing_column_named():
    with pytest.raises(FormatError) as e:
        parse_buoy_stdmet(io.StringIO("#YY  MM DD hh mm WDIR WSPD GST ATMP WTMP\n"))
    assert e.value.column == "PRES"


def test_stdmet_without_header():
    with pytest.raises(FormatError):
        parse_buoy_stdmet(io.StringIO("2005 08 25 00 50 110 7.0 8.5\n"))
    with pytest.raises(FormatError):
        parse_buoy_stdmet(io.StringIO(""))


def test_join_exact_lag():
    t = datetime(2005, 8, 10, 12, tzinfo=UTC)
    storms = [make_storm(t, 50.0)]
    buoys = [make_buoy(t - timedelta(days=3))]
    res = join_lagged(storms, buoys, 3, timedelta(minutes=90))
    assert len(res.records) == 1 and res.dropped == 0
    assert res.records[0].lag_days == 3


def test_join_outside_tolerance_dropped():
    t = datetime(2005, 8, 10, 12, tzinfo=UTC)
    storms = [make_storm(t, 50.0)]
    buoys = [make_buoy(t - timedelta(days=1, hours=3, minutes=30))]
    res = join_lagged(storms, buoys, 1, timedelta(minutes=90))
    assert res.records == []
    assert res.dropped == 1


def test_join_tie_goes_to_earlier_reading():
    t = datetime(2005, 8, 10, 12, tzinfo=UTC)
    early = make_buoy(t - timedelta(minutes=30), w=1.0)
    late = make_buoy(t + timedelta(minutes=30), w=2.0)
    res = join_lagged([make_storm(t, 50.0)], [late, early], 0, timedelta(minutes=90))
    assert res.records[0].buoy.wind == 1.0


def test_join_self_at_zero_lag():
    times = [datetime(2005, 8, 10, h, tzinfo=UTC) for h in range(0, 24, 6)]
    storms = [make_storm(ts, 50.0) for ts in times]
    buoys = [make_buoy(ts) for ts in times]
    res = join_lagged(storms, buoys, 0, timedelta(minutes=90))
    assert [r.buoy.timestamp for r in res.records] == times


def test_join_output_sorted_by_storm_time():
    t = datetime(2005, 8, 10, tzinfo=UTC)
    storms = [make_storm(t + timedelta(hours=6), 60.0), make_storm(t, 50.0)]
    buoys = [make_buoy(t), make_buoy(t + timedelta(hours=6))]
    res = join_lagged(storms, buoys, 0)
    assert [r.storm.wind for r in res.records] == [50.0, 60.0]


def test_join_rejects_bad_arguments():
    with pytest.raises(ValueError):
        join_lagged([], [], -1)
    with pytest.raises(ValueError):
        join_lagged([], [], 1, timedelta(0))


def test_complete_cases_counts_missing_variables():
    t = datetime(2005, 8, 10, tzinfo=UTC)
    good = JoinedRecord(make_storm(t, 50.0), make_buoy(t), 0)
    no_p = JoinedRecord(make_storm(t, 50.0, pressure=None), make_buoy(t, t=None), 0)
    kept, report = complete_cases([good, no_p])
    assert kept == [good]
    assert report.dropped == 1
    assert report.missing_by_variable == {"P": 1, "t": 1}
    assert all(None not in r.values().values() for r in kept)


def test_canonical_csv_round_trip():
    t = datetime(2005, 8, 10, 6, tzinfo=UTC)
    storms = [
        StormReading(t, "AL122005", "KATRINA", 25.7, -87.7, 145.0, None),
        StormReading(t, "AL122005", "KATRINA", 0.1 + 0.2, -80.0, None, 1001.3),
    ]
    buoys = [BuoyReading(t, "42001", 7.1, None, 28.4, 1.0 / 3.0)]

    buf = io.StringIO()
    write_storms_csv(storms, buf)
    assert buf.getvalue().splitlines()[0] == "timestamp,storm_id,name,lat,lon,W,P"
    assert read_storms_csv(io.StringIO(buf.getvalue())) == storms

    buf = io.StringIO()
    write_buoys_csv(buoys, buf)
    assert buf.getvalue().splitlines()[1] == "2005-08-10T06:00:00Z,42001,7.1,,28.4,0.3333333333333333"
    assert read_buoys_csv(io.StringIO(buf.getvalue())) == buoys


def test_read_csv_rejects_wrong_columns():
    with pytest.raises(FormatError):
        read_storms_csv(io.StringIO("timestamp,W\n"))


def test_read_csv_bad_cell_names_the_line():
    text = "timestamp,station,w,p,a,t\n2005-08-01T00:00:00Z,42001,5.0,1010.0,27.0,28.5\n2005-08-01T01:00:00Z,42001,x,1010.0,27.0,28.5\n"
    with pytest.raises(FormatError) as e:
        read_buoys_csv(io.StringIO(text))
    assert e.value.line_no == 3


def test_load_gzipped_inputs(tmp_path, fixtures_dir):
    gz = tmp_path / "42001h2005.txt.gz"
    with gzip.open(gz, "wt", encoding="utf-8") as f:
        f.write((fixtures_dir / "stdmet_sample.txt").read_text(encoding="utf-8"))
    res = load_buoys(gz, station_id="42001")
    assert len(res.readings) == 4

    storms = load_storms(fixtures_dir / "hurdat2_sample.txt")
    csv_path = tmp_path / "storms.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        write_storms_csv(storms.readings, f)
    assert load_storms(csv_path).readings == storms.readings


def test_integrity_report_flags_duplicates_and_lints(fixtures_dir):
    storms = load_storms(fixtures_dir / "hurdat2_sample.txt").readings
    buoys = load_buoys(fixtures_dir / "stdmet_sample.txt").readings
    report = integrity_report(storms + storms[:1], buoys)
    assert report["storms"]["storms"] == 2
    assert report["storms"]["duplicate_keys"] == 1
    assert report["storms"]["winds_not_multiple_of_5"] == 1
    assert report["buoys"]["presence_pct"]["t"] == 75.0
    assert report["buoys"]["duplicate_timestamps"] == 0
