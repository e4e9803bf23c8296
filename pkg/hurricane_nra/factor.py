"""Principal-component factor extraction over a design matrix.

Loadings are eigenvectors of the correlation matrix scaled by the square root
of their eigenvalue, optionally varimax-rotated. The correlation matrix (not
the covariance) is used because term columns span many orders of magnitude.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from hurricane_nra.errors import ModelError
from hurricane_nra.linalg import correlation_matrix, eigen_symmetric, varimax
from hurricane_nra.terms import DesignMatrix, subset

logger = logging.getLogger(__name__)

ROTATIONS = ("none", "varimax")
RETENTION_THRESHOLD = 1.0
DISPLAY_THRESHOLD = 0.3


@dataclass(frozen=True)
class FactorModel:
    term_names: Tuple[str, ...]
    loadings: np.ndarray
    ss_loadings: np.ndarray
    proportion_variance: np.ndarray
    cumulative_variance: np.ndarray
    retained: int
    eigenvalues: np.ndarray
    rotation: str

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]


def _variance_table(loadings: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    ss = np.sum(loadings * loadings, axis=0)
    prop = ss / loadings.shape[0]
    return ss, prop, np.cumsum(prop)


def retain_factors(model: Union[FactorModel, Sequence[float]], threshold: float = RETENTION_THRESHOLD) -> int:
    """Number of factors whose SS loading reaches ``threshold``."""
    ss = model.ss_loadings if isinstance(model, FactorModel) else model
    return int(sum(1 for v in ss if v >= threshold))


def filter_constant_columns(matrix: DesignMatrix) -> Tuple[DesignMatrix, List[str]]:
    """Drop zero-variance columns; returns the reduced matrix and what was dropped."""
    flat = [n for j, n in enumerate(matrix.names) if matrix.shape[0] == 0 or np.ptp(matrix.rows[:, j]) == 0.0]
    if flat:
        logger.warning("dropping constant term column(s): %s", ", ".join(flat))
    keep = [n for n in matrix.names if n not in flat]
    if not keep:
        raise ModelError("every term column is constant")
    return (subset(matrix, keep) if flat else matrix), flat


def extract_factors(M: DesignMatrix, n_factors: int, rotation: str = "varimax") -> FactorModel:
    k = M.shape[1]
    if not 1 <= n_factors <= k:
        raise ModelError(f"n_factors must be in [1, {k}], got {n_factors}")
    if rotation not in ROTATIONS:
        raise ModelError(f"rotation must be one of {ROTATIONS}, got {rotation!r}")

    corr = correlation_matrix(M)
    eig = eigen_symmetric(corr)
    loadings = eig.vectors[:, :n_factors] * np.sqrt(np.clip(eig.values[:n_factors], 0.0, None))

    if rotation == "varimax":
        loadings, _ = varimax(loadings)
        for j in range(n_factors):
            i = int(np.argmax(np.abs(loadings[:, j])))
            if loadings[i, j] < 0:
                loadings[:, j] = -loadings[:, j]

    ss = np.sum(loadings * loadings, axis=0)
    order = np.argsort(-ss, kind="mergesort")
    loadings = loadings[:, order]
    ss, prop, cum = _variance_table(loadings)
    model = FactorModel(
        term_names=tuple(M.names),
        loadings=loadings,
        ss_loadings=ss,
        proportion_variance=prop,
        cumulative_variance=cum,
        retained=retain_factors(ss),
        eigenvalues=eig.values,
        rotation=rotation,
    )
    logger.info(
        "extracted %d factor(s) from %d terms (%s); SS loadings %s; retained %d",
        n_factors,
        k,
        rotation,
        np.round(ss, 3).tolist(),
        model.retained,
    )
    return model


def membership_table(model: FactorModel, display_threshold: float = DISPLAY_THRESHOLD) -> pd.DataFrame:
    """Assign each term to its largest-|loading| factor (ties: lower index).

    Columns: term, factor (1-based), loading, then factor1..factorF with cells
    below ``display_threshold`` in absolute value left empty. Rows are ordered
    by factor, then by the model's term order.
    """
    L = model.loadings
    assigned = np.argmax(np.abs(L), axis=1)
    rows = []
    for i, name in enumerate(model.term_names):
        row = {"term": name, "factor": int(assigned[i]) + 1, "loading": float(L[i, assigned[i]])}
        for j in range(model.n_factors):
            row[f"factor{j + 1}"] = float(L[i, j]) if abs(L[i, j]) >= display_threshold else np.nan
        rows.append(row)
    df = pd.DataFrame(rows)
    return df.sort_values(by=["factor"], kind="mergesort").reset_index(drop=True)


def loadings_frame(model: FactorModel) -> pd.DataFrame:
    df = pd.DataFrame(model.loadings, columns=[f"factor{j + 1}" for j in range(model.n_factors)])
    df.insert(0, "term", list(model.term_names))
    return df


def summary_frame(model: FactorModel) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "factor": np.arange(1, model.n_factors + 1),
            "ss_loading": model.ss_loadings,
            "proportion": model.proportion_variance,
            "cumulative": model.cumulative_variance,
        }
    )


def eigenvalues_frame(model: FactorModel) -> pd.DataFrame:
    return pd.DataFrame({"component": np.arange(1, len(model.eigenvalues) + 1), "eigenvalue": model.eigenvalues})


def constancy_index(x: Sequence[float]) -> float:
    """Uncentered R^2 of the one-term fit 1 = a*x: (sum x)^2 / (n * sum x^2).

    1 for a constant vector, 3/4 for values uniform on [0, b].
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ModelError("constancy index needs at least one value")
    sq = float(np.sum(x * x))
    if sq == 0.0:
        raise ModelError("constancy index is undefined for an all-zero vector")
    s = float(np.sum(x))
    return s * s / (x.size * sq)
