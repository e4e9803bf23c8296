"""
Non-response (implicit) regression.

A model fits the unity response, 1 = sum_j alpha_j * term_j, with no intercept.
Given a fitted model and values for every variable but one (the target), the
model becomes a quadratic A r^2 + B r + C = 0 in the target; its roots bound
the target from below and above.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from hurricane_nra.errors import ModelError, RecordError, RootSelectionError
from hurricane_nra.linalg import lstsq
from hurricane_nra.terms import DesignMatrix, TermDescriptor, parse_term

logger = logging.getLogger(__name__)

MODEL_SCHEMA_VERSION = "implicit_model_v1"
LINEAR_EPS = 1e-12
PHYSICAL_BAND = (0.0, 200.0)

TWO_ROOTS = "two-roots"
DOUBLE_ROOT = "double-root"
COMPLEX = "complex"
LINEAR = "linear"


@dataclass(frozen=True)
class ImplicitModel:
    terms: Tuple[TermDescriptor, ...]
    alpha: np.ndarray
    r_squared: float
    n_records: int
    variables: Tuple[str, ...] = ()

    @property
    def term_names(self) -> List[str]:
        return [t.name for t in self.terms]

    def model_variables(self) -> List[str]:
        seen: List[str] = []
        order = list(self.variables)
        for t in self.terms:
            for v in t.variables:
                if v not in seen:
                    seen.append(v)
        if order:
            seen.sort(key=lambda v: order.index(v) if v in order else len(order))
        return seen

    def with_alpha(self, alpha: Sequence[float]) -> "ImplicitModel":
        return ImplicitModel(self.terms, np.asarray(alpha, dtype=float), self.r_squared, self.n_records, self.variables)


def fit_unity(M: DesignMatrix, variables: Sequence[str] = ()) -> ImplicitModel:
    """Least-squares fit of the all-ones response; R^2 = 1 - ||1 - X a||^2 / n."""
    n, k = M.shape
    if n == 0 or k == 0:
        raise ModelError("cannot fit an empty design matrix")
    u = np.ones(n)
    sol = lstsq(M.rows, u, names=M.names)
    r2 = 1.0 - sol.residual_ss / n
    if r2 < 0 and np.any(M.rows.mean(axis=0) != 0):
        logger.warning("unity fit has negative R^2 (%.6g) although a column has nonzero mean", r2)
    return ImplicitModel(tuple(M.terms), sol.coefficients, float(r2), n, tuple(variables))


def evaluate_model(model: ImplicitModel, record: Mapping[str, object]):
    """u_hat = sum_j alpha_j * term_j(record); scalars or numpy arrays."""
    total = 0.0
    for a, t in zip(model.alpha, model.terms):
        for v in t.variables:
            if record.get(v) is None:
                raise RecordError(str(record.get("key", "")), v)
        total = total + a * t.evaluate(record)
    return total


@dataclass(frozen=True)
class QuadraticBounds:
    A: float
    B: float
    C: float
    lower: Optional[float]
    upper: Optional[float]
    status: str

    @property
    def has_real_root(self) -> bool:
        return self.status != COMPLEX


def solve_quadratic(A: float, B: float, C: float) -> QuadraticBounds:
    """Roots of A r^2 + B r + C = 0 without cancellation.

    |A| < 1e-12 * max(|B|, 1) is treated as linear (root -C/B in both fields).
    """
    if abs(A) < LINEAR_EPS * max(abs(B), 1.0):
        if B == 0.0:
            return QuadraticBounds(A, B, C, None, None, COMPLEX)
        r = -C / B
        return QuadraticBounds(A, B, C, r, r, LINEAR)
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        return QuadraticBounds(A, B, C, None, None, COMPLEX)
    if disc == 0.0:
        r = -B / (2.0 * A)
        return QuadraticBounds(A, B, C, r, r, DOUBLE_ROOT)
    q = -0.5 * (B + math.copysign(math.sqrt(disc), B))
    r1 = q / A
    r2 = C / q
    return QuadraticBounds(A, B, C, min(r1, r2), max(r1, r2), TWO_ROOTS)


def quadratic_coefficients(model: ImplicitModel, target: str, record: Mapping[str, object]) -> Tuple[float, float, float]:
    if not any(target in t.variables for t in model.terms):
        raise ModelError(f"target variable {target!r} does not appear in the model {model.term_names}")
    A = B = 0.0
    C = -1.0
    for a, t in zip(model.alpha, model.terms):
        power = t.power_of(target)
        cofactor = 1.0
        for v, p in t.powers:
            if v == target:
                continue
            x = record.get(v)
            if x is None:
                raise RecordError(str(record.get("key", "")), v)
            cofactor *= float(x) ** p
        if power == 2:
            A += a * cofactor
        elif power == 1:
            B += a * cofactor
        else:
            C += a * cofactor
    return A, B, C


def quadratic_in(model: ImplicitModel, target: str, record: Mapping[str, object]) -> QuadraticBounds:
    """Collect the model as A r^2 + B r + C (C includes the -1 unity) and solve it."""
    return solve_quadratic(*quadratic_coefficients(model, target, record))


def select_root(bounds: QuadraticBounds, observed: float) -> float:
    """The root nearer the observed value; an exact tie goes to the upper root."""
    if bounds.status == COMPLEX:
        raise RootSelectionError("no real root to select")
    if bounds.status in (LINEAR, DOUBLE_ROOT):
        return bounds.lower
    if abs(bounds.lower - observed) < abs(bounds.upper - observed):
        return bounds.lower
    return bounds.upper


def select_root_physical(
    bounds: QuadraticBounds,
    band: Tuple[float, float] = PHYSICAL_BAND,
    reference: Optional[float] = None,
) -> Optional[float]:
    """Pick a root without an observation: the root inside ``band``; if both are,
    the one nearer ``reference`` (ties and missing reference: lower)."""
    if bounds.status == COMPLEX:
        return None
    inside = [r for r in dict.fromkeys((bounds.lower, bounds.upper)) if band[0] <= r <= band[1]]
    if not inside:
        return None
    if len(inside) == 1 or reference is None:
        return inside[0]
    return min(inside, key=lambda r: abs(r - reference))


def invert_records(model: ImplicitModel, target: str, records: Sequence[Mapping[str, object]]) -> List[QuadraticBounds]:
    return [quadratic_in(model, target, r) for r in records]


def model_to_dict(model: ImplicitModel) -> Dict[str, object]:
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "variables": list(model.variables) or model.model_variables(),
        "terms": model.term_names,
        "alpha": [float(a) for a in model.alpha],
        "r_squared": float(model.r_squared),
        "n_records": int(model.n_records),
    }


def model_to_json(model: ImplicitModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"


def model_from_dict(obj: Mapping[str, object]) -> ImplicitModel:
    variables = list(obj["variables"])
    terms = tuple(parse_term(n, variables) for n in obj["terms"])
    alpha = np.asarray(obj["alpha"], dtype=float)
    if len(alpha) != len(terms):
        raise ModelError(f"model has {len(terms)} terms but {len(alpha)} coefficients")
    return ImplicitModel(terms, alpha, float(obj["r_squared"]), int(obj["n_records"]), tuple(variables))


def model_from_json(text: str) -> ImplicitModel:
    return model_from_dict(json.loads(text))
