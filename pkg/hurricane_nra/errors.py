"""Exception types shared by the analysis modules.

The CLI maps these onto exit codes: input problems exit 2, numerics and model
problems exit 3.
"""

from __future__ import annotations

from typing import Optional, Sequence


class NRAError(Exception):
    """Base class for every error raised by hurricane_nra."""

    stage = "analysis"


class InputError(NRAError):
    stage = "input"


class FormatError(InputError):
    """A source file cannot be read in its declared format."""

    def __init__(self, message: str, *, line_no: Optional[int] = None, column: Optional[str] = None):
        self.line_no = line_no
        self.column = column
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{message}")


class ScaleError(InputError):
    stage = "scale"


class NumericsError(NRAError):
    stage = "numerics"


class RankDeficiencyError(NumericsError):
    def __init__(self, message: str, dependent: Sequence[str] = ()):
        self.dependent = tuple(dependent)
        super().__init__(message)


class ConvergenceError(NumericsError):
    def __init__(self, message: str, off_norm: float):
        self.off_norm = float(off_norm)
        super().__init__(f"{message} (off-diagonal norm {off_norm:.3e})")


class ModelError(NumericsError):
    stage = "model"


class RecordError(ModelError):
    """A record lacks a value the model needs."""

    def __init__(self, record_key: str, variable: str):
        self.record_key = record_key
        self.variable = variable
        super().__init__(f"record {record_key!r} has no value for variable {variable!r}")


class RootSelectionError(ModelError):
    pass


class InsufficientDataError(ModelError):
    pass
