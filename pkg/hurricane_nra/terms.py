"""Quadratic term sets over named variables and their design matrices."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from hurricane_nra.errors import ModelError, RecordError
from hurricane_nra.ingest import JoinedRecord


@dataclass(frozen=True)
class TermDescriptor:
    """A monomial of total degree 1 or 2; ``powers`` follows declared variable order."""

    powers: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        degree = sum(p for _, p in self.powers)
        if degree not in (1, 2) or any(p <= 0 for _, p in self.powers):
            raise ModelError(f"term {self.powers} must have total degree 1 or 2")

    @property
    def exponents(self) -> Dict[str, int]:
        return dict(self.powers)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.powers)

    @property
    def degree(self) -> int:
        return sum(p for _, p in self.powers)

    def power_of(self, variable: str) -> int:
        return self.exponents.get(variable, 0)

    @property
    def name(self) -> str:
        if len(self.powers) == 1:
            var, p = self.powers[0]
            return var if p == 1 else f"{var}^{p}"
        (x, _), (y, _) = self.powers
        sep = "" if len(x) == 1 and len(y) == 1 else "*"
        return f"{x}{sep}{y}"

    def __str__(self) -> str:
        return self.name

    def evaluate(self, values: Mapping[str, object]):
        """Monomial value; works on scalars and numpy arrays alike."""
        out = None
        for var, p in self.powers:
            v = values[var]
            for _ in range(p):
                out = v if out is None else out * v
        return out


def expand_terms(variables: Sequence[str]) -> List[TermDescriptor]:
    """Linear terms, then squares, then pairwise interactions: m(m+3)/2 terms."""
    variables = list(variables)
    if not variables:
        raise ModelError("at least one variable is required")
    if len(set(variables)) != len(variables):
        raise ModelError(f"duplicate variable names in {variables}")
    linear = [TermDescriptor(((v, 1),)) for v in variables]
    squares = [TermDescriptor(((v, 2),)) for v in variables]
    pairs = [
        TermDescriptor(((variables[i], 1), (variables[j], 1)))
        for i in range(len(variables))
        for j in range(i + 1, len(variables))
    ]
    return linear + squares + pairs


def parse_term(name: str, variables: Sequence[str]) -> TermDescriptor:
    """Parse ``W``, ``W^2``, ``W*P``, ``WP`` or ``wW`` into a canonical descriptor."""
    variables = list(variables)
    order = {v: i for i, v in enumerate(variables)}
    text = name.strip().replace("·", "*").replace("²", "^2")

    m = re.fullmatch(r"(.+)\^(\d+)", text)
    if m:
        factors = [m.group(1)] * int(m.group(2))
    elif "*" in text:
        factors = [f.strip() for f in text.split("*")]
    elif text in order:
        factors = [text]
    else:
        # concatenated single-character names, e.g. "wW"
        factors = list(text)
    unknown = [f for f in factors if f not in order]
    if unknown:
        raise ModelError(f"term {name!r} uses unknown variable(s) {unknown}; known: {variables}")

    powers: Dict[str, int] = {}
    for f in factors:
        powers[f] = powers.get(f, 0) + 1
    return TermDescriptor(tuple(sorted(powers.items(), key=lambda kv: order[kv[0]])))


def parse_terms(names: Iterable[str], variables: Sequence[str]) -> List[TermDescriptor]:
    return [parse_term(n, variables) for n in names]


@dataclass(frozen=True)
class DesignMatrix:
    terms: Tuple[TermDescriptor, ...]
    rows: np.ndarray
    row_keys: Tuple[str, ...]

    def __post_init__(self):
        if self.rows.shape != (len(self.row_keys), len(self.terms)):
            raise ModelError(f"matrix shape {self.rows.shape} does not match {len(self.row_keys)} x {len(self.terms)}")
        if not np.all(np.isfinite(self.rows)):
            raise ModelError("design matrix contains non-finite values")
        self.rows.setflags(write=False)

    @property
    def names(self) -> List[str]:
        return [t.name for t in self.terms]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows.shape

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.names.index(name)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.names, index=list(self.row_keys))


Record = Union[JoinedRecord, Mapping[str, Optional[float]]]


def _record_values(record: Record) -> Tuple[str, Mapping[str, Optional[float]]]:
    if isinstance(record, JoinedRecord):
        return record.key, record.values()
    return str(record.get("key", "")), record


def evaluate(terms: Sequence[TermDescriptor], records: Sequence[Record]) -> DesignMatrix:
    """Evaluate each term at each record, exactly (no centering or scaling)."""
    terms = tuple(terms)
    needed = sorted({v for t in terms for v in t.variables})
    keys: List[str] = []
    columns: Dict[str, List[float]] = {v: [] for v in needed}
    for i, record in enumerate(records):
        key, values = _record_values(record)
        keys.append(key or str(i))
        for v in needed:
            x = values.get(v)
            if x is None:
                raise RecordError(keys[-1], v)
            columns[v].append(float(x))
    arrays = {v: np.asarray(columns[v], dtype=float) for v in needed}
    rows = np.empty((len(keys), len(terms)), dtype=float)
    for j, t in enumerate(terms):
        rows[:, j] = t.evaluate(arrays)
    return DesignMatrix(terms, rows, tuple(keys))


def subset(matrix: DesignMatrix, names: Sequence[str]) -> DesignMatrix:
    if not names:
        raise ModelError("a model needs at least one term")
    have = matrix.names
    missing = [n for n in names if n not in have]
    if missing:
        raise ModelError(f"unknown term(s) {missing}; available: {have}")
    idx = [have.index(n) for n in names]
    return DesignMatrix(tuple(matrix.terms[i] for i in idx), matrix.rows[:, idx].copy(), matrix.row_keys)
