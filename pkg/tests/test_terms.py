from datetime import datetime, timezone

import numpy as np
import pytest

from helpers import make_buoy, make_storm
from hurricane_nra.errors import ModelError, RecordError
from hurricane_nra.ingest import VARIABLES, JoinedRecord
from hurricane_nra.terms import TermDescriptor, evaluate, expand_terms, parse_term, subset

# Loadings table roster (27 rows), written the way that table names them.
TABLE_ROSTER = [
    "W", "P", "w", "p", "a", "t",
    "W^2", "P^2", "w^2", "p^2", "a^2", "t^2",
    "WP", "wW", "pW", "aW", "tW",
    "wP", "pP", "aP", "tP",
    "wp", "wa", "wt", "pa", "pt", "at",
]


def test_expand_small_sets():
    assert [t.name for t in expand_terms(["x"])] == ["x", "x^2"]
    assert [t.name for t in expand_terms(["x", "y"])] == ["x", "y", "x^2", "y^2", "xy"]


def test_expand_six_variables_gives_27_terms_matching_roster():
    terms = expand_terms(VARIABLES)
    assert len(terms) == 27
    canonical = {parse_term(n, VARIABLES) for n in TABLE_ROSTER}
    assert set(terms) == canonical
    assert len(canonical) == 27


@pytest.mark.parametrize("m", range(1, 9))
def test_term_count_formula(m):
    names = [f"v{i}" for i in range(m)]
    assert len(expand_terms(names)) == m * (m + 3) // 2


def test_expand_rejects_duplicates_and_empty():
    with pytest.raises(ModelError):
        expand_terms(["W", "W"])
    with pytest.raises(ModelError):
        expand_terms([])


def test_parse_term_forms():
    assert parse_term("wW", VARIABLES).name == "Ww"
    assert parse_term("W*P", VARIABLES).name == "WP"
    assert parse_term("W^2", VARIABLES).exponents == {"W": 2}
    assert parse_term("t", VARIABLES).degree == 1
    assert parse_term("x1*x2", ["x1", "x2"]).name == "x1*x2"
    with pytest.raises(ModelError):
        parse_term("Q", VARIABLES)


def test_term_degree_is_bounded():
    with pytest.raises(ModelError):
        TermDescriptor((("W", 3),))


def test_evaluate_monomials():
    records = [{"x": 3.0, "y": 4.0}, {"x": -2.0, "y": 1.0}]
    M = evaluate([parse_term(n, ["x", "y"]) for n in ("xy", "x^2")], records)
    assert M.rows.tolist() == [[12.0, 9.0], [-2.0, 4.0]]


def test_evaluate_w_times_t_on_joined_record():
    t = datetime(2005, 8, 10, tzinfo=timezone.utc)
    rec = JoinedRecord(make_storm(t, 65.0), make_buoy(t, t=28.5), 3)
    M = evaluate([parse_term("tW", VARIABLES)], [rec])
    assert M.rows[0, 0] == 1852.5
    assert M.row_keys == (rec.key,)


def test_evaluate_is_multiplicative():
    rng = np.random.default_rng(0)
    records = [{"x": float(a), "y": float(b)} for a, b in rng.normal(size=(20, 2))]
    M = evaluate(expand_terms(["x", "y"]), records)
    assert np.array_equal(M.column("xy"), M.column("x") * M.column("y"))
    assert np.array_equal(M.column("x^2"), M.column("x") * M.column("x"))


def test_evaluate_names_missing_variable():
    with pytest.raises(RecordError) as e:
        evaluate([parse_term("x", ["x"])], [{"key": "r1", "x": None}])
    assert e.value.record_key == "r1"
    assert e.value.variable == "x"


def test_design_matrix_is_read_only():
    M = evaluate([parse_term("x", ["x"])], [{"x": 1.0}])
    with pytest.raises(ValueError):
        M.rows[0, 0] = 2.0


def test_subset():
    records = [{"W": 1.0, "P": 2.0}, {"W": 3.0, "P": 4.0}]
    M = evaluate(expand_terms(["W", "P"]), records)
    assert np.array_equal(subset(M, M.names).rows, M.rows)
    sub = subset(M, ["W", "P^2"])
    assert sub.rows.tolist() == [[1.0, 4.0], [3.0, 16.0]]
    with pytest.raises(ModelError):
        subset(M, [])
    with pytest.raises(ModelError):
        subset(M, ["nope"])
