import math

import numpy as np
import pytest

from hurricane_nra.errors import ModelError, RankDeficiencyError, RecordError, RootSelectionError
from hurricane_nra.implicit import (
    COMPLEX,
    DOUBLE_ROOT,
    LINEAR,
    TWO_ROOTS,
    ImplicitModel,
    QuadraticBounds,
    evaluate_model,
    fit_unity,
    invert_records,
    model_from_json,
    model_to_json,
    quadratic_in,
    select_root,
    select_root_physical,
    solve_quadratic,
)
from hurricane_nra.terms import evaluate, expand_terms, parse_term, parse_terms

XY = ["x", "y"]


def _model(names, alpha, variables):
    return ImplicitModel(tuple(parse_terms(names, variables)), np.asarray(alpha, dtype=float), 1.0, 0, tuple(variables))


def _circle_records(radius=2.0, n=12):
    angles = np.deg2rad(np.arange(0, 360, 360 / n))
    return [{"x": radius * math.cos(a), "y": radius * math.sin(a)} for a in angles]


def test_fit_single_constant_column():
    M = evaluate([parse_term("x", ["x"])], [{"x": 2.0}] * 3)
    model = fit_unity(M)
    assert model.alpha[0] == pytest.approx(0.5)
    assert model.r_squared == pytest.approx(1.0)
    assert model.n_records == 3


def test_fit_circle():
    M = evaluate(parse_terms(["x^2", "y^2"], XY), _circle_records())
    model = fit_unity(M, XY)
    assert np.allclose(model.alpha, [0.25, 0.25], rtol=1e-12)
    assert model.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_zero_mean_noise_has_r_squared_near_zero():
    x = np.random.default_rng(0).normal(size=100_000)
    M = evaluate([parse_term("x", ["x"])], [{"x": v} for v in x])
    assert abs(fit_unity(M).r_squared) < 0.01


def test_fit_propagates_rank_deficiency():
    records = [{"x": float(v), "y": float(v)} for v in range(1, 6)]
    M = evaluate(parse_terms(["x", "y"], XY), records)
    with pytest.raises(RankDeficiencyError):
        fit_unity(M)


def _assert_roots_recover(model, target, records, truth):
    for rec, true_value in zip(records, truth):
        b = quadratic_in(model, target, rec)
        assert b.has_real_root
        err = min(abs(b.lower - true_value), abs(b.upper - true_value))
        assert err <= 1e-6 * max(abs(true_value), 1.0)


def test_fit_then_invert_ellipse():
    rng = np.random.default_rng(1)
    theta = rng.uniform(0, 2 * np.pi, 500)
    # x^2/9 + y^2/4 + xy/20 = 1 sampled along rays
    names = ["x^2", "y^2", "xy"]
    truth = np.array([1 / 9, 1 / 4, 1 / 20])
    records = []
    for t in theta:
        c, s = math.cos(t), math.sin(t)
        r = 1.0 / math.sqrt(truth[0] * c * c + truth[1] * s * s + truth[2] * c * s)
        records.append({"x": r * c, "y": r * s})
    model = fit_unity(evaluate(parse_terms(names, XY), records), XY)
    assert np.allclose(model.alpha, truth, rtol=1e-6)
    assert model.r_squared >= 1 - 1e-10
    _assert_roots_recover(model, "y", records, [r["y"] for r in records])


def test_fit_then_invert_six_variables():
    variables = ["W", "P", "w", "p", "a", "t"]
    rng = np.random.default_rng(2)
    names = ["W", "W^2", "Ww", "Wt", "P", "p", "a", "t"]
    truth = np.array([2e-3, 1e-5, 1e-4, 2e-5, -3e-4, 2e-4, 1e-3, 4e-3])
    records = []
    for _ in range(500):
        rec = {
            "P": rng.uniform(900, 1010),
            "w": rng.uniform(1, 15),
            "p": rng.uniform(1000, 1020),
            "a": rng.uniform(20, 30),
            "t": rng.uniform(25, 31),
        }
        # solve for W from the planted relation (take the positive root)
        A = truth[1]
        B = truth[0] + truth[2] * rec["w"] + truth[3] * rec["t"]
        C = truth[4] * rec["P"] + truth[5] * rec["p"] + truth[6] * rec["a"] + truth[7] * rec["t"] - 1.0
        rec["W"] = (-B + math.sqrt(B * B - 4 * A * C)) / (2 * A)
        records.append(rec)
    model = fit_unity(evaluate(parse_terms(names, variables), records), variables)
    assert np.allclose(model.alpha, truth, rtol=1e-6)
    assert model.r_squared >= 1 - 1e-10
    _assert_roots_recover(model, "W", records, [r["W"] for r in records])


def test_solve_quadratic_cases():
    b = solve_quadratic(1.0, 0.0, -4.0)
    assert (b.lower, b.upper, b.status) == (-2.0, 2.0, TWO_ROOTS)

    b = solve_quadratic(0.0, 2.0, -4.0)
    assert (b.lower, b.upper, b.status) == (2.0, 2.0, LINEAR)

    b = solve_quadratic(1.0, 0.0, 4.0)
    assert b.status == COMPLEX and b.lower is None and b.upper is None

    b = solve_quadratic(1.0, -4.0, 4.0)
    assert (b.lower, b.status) == (2.0, DOUBLE_ROOT)

    assert solve_quadratic(0.0, 0.0, 1.0).status == COMPLEX


def test_solve_quadratic_roots_satisfy_equation():
    rng = np.random.default_rng(3)
    for _ in range(200):
        A, B, C = rng.normal(size=3) * 10.0 ** rng.uniform(-6, 3, size=3)
        b = solve_quadratic(A, B, C)
        if b.status != TWO_ROOTS:
            continue
        assert b.lower <= b.upper
        for r in (b.lower, b.upper):
            scale = max(abs(A * r * r), abs(B * r), abs(C), 1.0)
            assert abs(A * r * r + B * r + C) <= 1e-6 * scale


def test_quadratic_in_collects_coefficients():
    variables = ["W", "P", "w"]
    model = _model(["W", "P", "W^2", "Ww", "WP", "P^2"], [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], variables)
    b = quadratic_in(model, "W", {"P": 10.0, "w": 0.5})
    assert b.A == 3.0
    assert b.B == 1.0 + 4.0 * 0.5 + 5.0 * 10.0
    assert b.C == 2.0 * 10.0 + 6.0 * 100.0 - 1.0


def test_quadratic_in_errors():
    model = _model(["x^2"], [1.0], XY)
    with pytest.raises(ModelError):
        quadratic_in(model, "y", {"x": 1.0})
    model = _model(["x^2", "xy"], [1.0, 1.0], XY)
    with pytest.raises(RecordError):
        quadratic_in(model, "x", {})


def _bounds(lower, upper, status=TWO_ROOTS):
    return QuadraticBounds(1.0, 0.0, 0.0, lower, upper, status)


@pytest.mark.parametrize(
    "lower,upper,observed,expected",
    [
        (40.0, 120.0, 50.0, 40.0),
        (40.0, 120.0, 80.0, 120.0),
        (40.0, 120.0, 79.9, 40.0),
        (40.0, 120.0, 80.1, 120.0),
        (40.0, 120.0, -100.0, 40.0),
        (40.0, 120.0, 500.0, 120.0),
        (-5.0, 5.0, 0.0, 5.0),
        (-5.0, 5.0, -0.001, -5.0),
    ],
)
def test_select_root_rule(lower, upper, observed, expected):
    assert select_root(_bounds(lower, upper), observed) == expected


def test_select_root_table():
    rng = np.random.default_rng(4)
    for _ in range(50):
        lo, hi = sorted(rng.uniform(-200, 200, size=2))
        obs = rng.uniform(-300, 300)
        expected = lo if abs(lo - obs) < abs(hi - obs) else hi
        chosen = select_root(_bounds(lo, hi), obs)
        assert chosen == expected
        assert chosen in (lo, hi)


def test_select_root_linear_and_complex():
    assert select_root(_bounds(60.0, 60.0, LINEAR), 1000.0) == 60.0
    with pytest.raises(RootSelectionError):
        select_root(_bounds(None, None, COMPLEX), 1.0)


def test_select_root_physical():
    assert select_root_physical(_bounds(-50.0, 80.0)) == 80.0
    assert select_root_physical(_bounds(30.0, 150.0), reference=140.0) == 150.0
    assert select_root_physical(_bounds(30.0, 150.0)) == 30.0
    assert select_root_physical(_bounds(-50.0, 300.0)) is None
    assert select_root_physical(_bounds(None, None, COMPLEX)) is None


def test_evaluate_model():
    circle = _model(["x^2", "y^2"], [0.25, 0.25], XY)
    assert evaluate_model(circle, {"x": 2.0, "y": 0.0}) == 1.0
    assert evaluate_model(circle, {"x": 0.0, "y": 0.0}) == 0.0
    with pytest.raises(RecordError):
        evaluate_model(circle, {"x": 1.0})


def test_evaluate_buoy_six_term_model():
    variables = ["p", "a", "t"]
    alpha = [0.001993, -0.00007051, 0.0003194, -0.000000988, 0.0000004513, 0.000007737]
    model = _model(["p", "a", "t", "p^2", "a^2", "t^2"], alpha, variables)
    p, a, t = 1013.0, 25.0, 28.0
    by_hand = (
        0.001993 * p - 0.00007051 * a + 0.0003194 * t - 0.000000988 * p * p + 0.0000004513 * a * a + 0.000007737 * t * t
    )
    assert evaluate_model(model, {"p": p, "a": a, "t": t}) == pytest.approx(by_hand, rel=1e-12)
    assert by_hand == pytest.approx(1.0, abs=0.05)


def test_evaluate_model_is_linear_in_alpha():
    m1 = _model(["x", "x^2", "xy"], [0.1, -0.2, 0.3], XY)
    m2 = m1.with_alpha([1.5, 0.25, -2.0])
    both = m1.with_alpha(m1.alpha + m2.alpha)
    rec = {"x": 1.7, "y": -0.4}
    assert evaluate_model(both, rec) == pytest.approx(evaluate_model(m1, rec) + evaluate_model(m2, rec), rel=1e-14)


def test_invert_records_preserves_order():
    circle = _model(["x^2", "y^2"], [0.25, 0.25], XY)
    out = invert_records(circle, "y", [{"x": 0.0}, {"x": 2.0}, {"x": 3.0}])
    assert [b.status for b in out] == [TWO_ROOTS, DOUBLE_ROOT, COMPLEX]
    assert out[0].upper == pytest.approx(2.0)


def test_model_json_round_trip_is_exact():
    variables = ["W", "P", "w", "p", "a", "t"]
    terms = expand_terms(variables)
    model = ImplicitModel(tuple(terms), np.random.default_rng(5).normal(size=len(terms)) * 1e-5, 0.98, 1234, tuple(variables))
    back = model_from_json(model_to_json(model))
    assert back.term_names == model.term_names
    assert np.array_equal(back.alpha, model.alpha)
    assert back.r_squared == model.r_squared and back.n_records == 1234
    with pytest.raises(ModelError):
        model_from_json(model_to_json(model).replace('"alpha": [', '"alpha": [1.0, '))
