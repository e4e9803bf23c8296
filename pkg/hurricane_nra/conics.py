"""
Two-variable slices of a fitted quadratic model and their u_hat = 1 level sets.

Fixing every model variable except (x, y) turns the model into
A x^2 + B xy + C y^2 + D x + E y + F = 0, with the unity level moved into F.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from hurricane_nra.errors import ModelError
from hurricane_nra.implicit import ImplicitModel, evaluate_model, model_to_json
from hurricane_nra.ingest import JoinedRecord

logger = logging.getLogger(__name__)

PARABOLA_TOL = 1e-9

ELLIPSE = "ellipse"
PARABOLA = "parabola"
HYPERBOLA = "hyperbola"
DEGENERATE = "degenerate"

GRID_COLUMNS = ["x", "y", "u_hat"]

Coefficients = Tuple[float, float, float, float, float, float]


@dataclass(frozen=True)
class ConicSlice:
    var_x: str
    var_y: str
    fixed: Dict[str, float]
    coefficients: Coefficients
    kind: str

    def form(self, x, y):
        """A x^2 + B xy + C y^2 + D x + E y + F; zero on the level curve."""
        A, B, C, D, E, F = self.coefficients
        return A * x * x + B * x * y + C * y * y + D * x + E * y + F

    def u_hat(self, x, y):
        return self.form(x, y) + 1.0

    def to_dict(self) -> Dict[str, object]:
        return {
            "var_x": self.var_x,
            "var_y": self.var_y,
            "fixed": dict(sorted(self.fixed.items())),
            "coefficients": dict(zip("ABCDEF", (float(c) for c in self.coefficients))),
            "kind": self.kind,
        }


def _check_axes(model: ImplicitModel, var_x: str, var_y: str, fixed: Mapping[str, float]) -> Dict[str, float]:
    if var_x == var_y:
        raise ModelError(f"slice axes must differ, got {var_x!r} twice")
    present = model.model_variables()
    for v in (var_x, var_y):
        if v not in present:
            raise ModelError(f"variable {v!r} does not appear in the model {model.term_names}")
    others = [v for v in present if v not in (var_x, var_y)]
    unfixed = [v for v in others if fixed.get(v) is None]
    if unfixed:
        raise ModelError(f"slice ({var_x}, {var_y}) leaves variable(s) {unfixed} unfixed")
    return {v: float(fixed[v]) for v in others}


def slice_model(model: ImplicitModel, var_x: str, var_y: str, fixed: Optional[Mapping[str, float]] = None) -> ConicSlice:
    """Substitute ``fixed`` values into the model, leaving a conic in (var_x, var_y)."""
    held = _check_axes(model, var_x, var_y, fixed or {})
    coef = {(2, 0): 0.0, (1, 1): 0.0, (0, 2): 0.0, (1, 0): 0.0, (0, 1): 0.0, (0, 0): -1.0}
    for a, t in zip(model.alpha, model.terms):
        cofactor = 1.0
        for v, p in t.powers:
            if v not in (var_x, var_y):
                cofactor *= held[v] ** p
        coef[(t.power_of(var_x), t.power_of(var_y))] += float(a) * cofactor
    coefficients = (coef[(2, 0)], coef[(1, 1)], coef[(0, 2)], coef[(1, 0)], coef[(0, 1)], coef[(0, 0)])
    return ConicSlice(var_x, var_y, held, coefficients, classify(coefficients))


def conic_matrix(coefficients: Sequence[float]) -> np.ndarray:
    A, B, C, D, E, F = (float(c) for c in coefficients)
    return np.array(
        [
            [A, B / 2.0, D / 2.0],
            [B / 2.0, C, E / 2.0],
            [D / 2.0, E / 2.0, F],
        ]
    )


def classify(conic: Union[ConicSlice, Sequence[float]], tol: float = PARABOLA_TOL) -> str:
    """Ellipse / parabola / hyperbola by the sign of B^2 - 4AC, or degenerate.

    Every test is relative to max(|A|, |B|, |C|) and uses only quantities that
    do not move when the conic is translated, so scaling the six coefficients
    or shifting the centre to (1013, 28) never changes the answer. A central
    conic is degenerate when its value at the centre vanishes; a parabolic one
    when its linear part along the null direction of the quadratic part does.
    """
    coefficients = conic.coefficients if isinstance(conic, ConicSlice) else tuple(conic)
    if len(coefficients) != 6:
        raise ModelError(f"a conic has 6 coefficients, got {len(coefficients)}")
    A, B, C, D, E, F = (float(c) for c in coefficients)
    if not any(float(c) != 0.0 for c in coefficients):
        raise ModelError("every conic coefficient is zero (empty form)")
    if A == 0.0 and B == 0.0 and C == 0.0:
        return DEGENERATE

    quad = conic_matrix(coefficients)[:2, :2]
    size = max(abs(A), abs(B), abs(C))
    disc = B * B - 4.0 * A * C
    if abs(disc) < tol * size * size:
        eigvals, eigvecs = np.linalg.eigh(quad)
        null_dir = eigvecs[:, int(np.argmin(np.abs(eigvals)))]
        if abs(D * null_dir[0] + E * null_dir[1]) < tol * size:
            return DEGENERATE
        return PARABOLA

    cx, cy = np.linalg.solve(quad, [-D / 2.0, -E / 2.0])
    centre_value = F + (D * cx + E * cy) / 2.0
    if abs(centre_value) < tol * size:
        return DEGENERATE
    return ELLIPSE if disc < 0 else HYPERBOLA


@dataclass(frozen=True)
class ConicGrid:
    var_x: str
    var_y: str
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # values[i, j] = u_hat(xs[i], ys[j])
    fixed: Dict[str, float] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return pd.DataFrame({"x": X.ravel(), "y": Y.ravel(), "u_hat": self.values.ravel()}, columns=GRID_COLUMNS)


def grid_evaluate(
    model: ImplicitModel,
    var_x: str,
    x_range: Tuple[float, float, int],
    var_y: str,
    y_range: Tuple[float, float, int],
    fixed: Optional[Mapping[str, float]] = None,
) -> ConicGrid:
    """u_hat over a (steps_x by steps_y) lattice, x-major, for external contouring."""
    held = _check_axes(model, var_x, var_y, fixed or {})
    axes = []
    for name, (lo, hi, steps) in ((var_x, x_range), (var_y, y_range)):
        if int(steps) < 2:
            raise ModelError(f"axis {name} needs at least 2 steps, got {steps}")
        if not lo < hi:
            raise ModelError(f"axis {name} range [{lo}, {hi}] is empty")
        axes.append(np.linspace(float(lo), float(hi), int(steps)))
    xs, ys = axes
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    values = evaluate_model(model, {var_x: X, var_y: Y, **held})
    values = np.broadcast_to(np.asarray(values, dtype=float), X.shape).copy()
    return ConicGrid(var_x, var_y, xs, ys, values, held)


def model_id(model: ImplicitModel) -> str:
    return hashlib.sha256(model_to_json(model).encode("utf-8")).hexdigest()[:16]


def grid_sidecar(grid: ConicGrid, model: ImplicitModel) -> Dict[str, object]:
    conic = slice_model(model, grid.var_x, grid.var_y, grid.fixed)
    return {
        "model_id": model_id(model),
        "model_terms": model.term_names,
        "axes": {
            "x": {"variable": grid.var_x, "min": float(grid.xs[0]), "max": float(grid.xs[-1]), "steps": len(grid.xs)},
            "y": {"variable": grid.var_y, "min": float(grid.ys[0]), "max": float(grid.ys[-1]), "steps": len(grid.ys)},
        },
        "fixed": dict(sorted(grid.fixed.items())),
        "coefficients": conic.to_dict()["coefficients"],
        "classification": conic.kind,
    }


def variable_pairs(model: ImplicitModel) -> List[Tuple[str, str]]:
    return list(combinations(model.model_variables(), 2))


def default_fixed(records: Sequence[JoinedRecord], variables: Sequence[str]) -> Dict[str, float]:
    """Dataset means of ``variables`` over complete records."""
    if not records:
        raise ModelError("no records to take default fixed values from")
    frame = pd.DataFrame([r.values() for r in records])
    return {v: float(frame[v].astype(float).mean()) for v in variables}


def data_range(records: Sequence[JoinedRecord], variable: str) -> Tuple[float, float]:
    vals = [r.values()[variable] for r in records if r.values()[variable] is not None]
    if not vals:
        raise ModelError(f"no observed values of {variable!r}")
    lo, hi = float(min(vals)), float(max(vals))
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    return lo, hi


def scatter_columns(records: Sequence[JoinedRecord], var_x: str, var_y: str) -> pd.DataFrame:
    """Observed (x, y) points for overlay, with storm W and P as size and color."""
    rows = []
    for r in records:
        v = r.values()
        rows.append({"key": r.key, "x": v[var_x], "y": v[var_y], "W": v["W"], "P": v["P"]})
    return pd.DataFrame(rows, columns=["key", "x", "y", "W", "P"])
