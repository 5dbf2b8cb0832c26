"""CSV ingestion and emission for multivariate time-series tables.

Cells must be numeric or missing (empty string or a nan literal); missing
cells are imputed per column by linear interpolation between the nearest
finite neighbours, with leading and trailing gaps taking the nearest finite
value.  Floats are written with 17 significant digits so a save/load
round-trip reproduces the matrix bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import CsvParseError, DegenerateInputError

_MISSING = {"", "nan", "na", "null"}


@dataclass(frozen=True)
class Dataset:
    """A rectangular real-valued table with per-column names."""

    columns: tuple[str, ...]
    values: np.ndarray
    source: str | None = None
    imputed_cells: int = 0

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(str(c) for c in self.columns))
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-d, got shape {values.shape}")
        if values.shape[1] != len(self.columns):
            raise ValueError(
                f"{len(self.columns)} column names for {values.shape[1]} data columns"
            )
        if not np.isfinite(values).all():
            raise ValueError("values must be finite after ingestion")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]


def _parse_cell(text: str, file_row: int, column: int) -> float:
    stripped = text.strip()
    if stripped.lower() in _MISSING:
        return np.nan
    try:
        value = float(stripped)
    except ValueError:
        raise CsvParseError(
            f"row {file_row}, column {column}: cannot parse {text!r} as a number",
            row=file_row,
            column=column,
        ) from None
    if np.isnan(value):
        return np.nan
    if not np.isfinite(value):
        raise CsvParseError(
            f"row {file_row}, column {column}: non-finite value {text!r}",
            row=file_row,
            column=column,
        )
    return value


def _impute_column(column: np.ndarray) -> int:
    """In-place linear interpolation over nan runs; returns cells filled."""
    missing = np.isnan(column)
    if not missing.any():
        return 0
    if missing.all():
        raise DegenerateInputError("column has no finite values to interpolate from")
    idx = np.arange(len(column))
    column[missing] = np.interp(idx[missing], idx[~missing], column[~missing])
    return int(missing.sum())


def load_csv(path, header: bool = True) -> Dataset:
    """Read a numeric CSV into a Dataset, imputing missing cells.

    With header=False columns are named V0..Vk-1.  Row numbers in errors
    count file lines from 1, header included.
    """
    path = str(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows = list(reader)
    rows = [r for r in rows if r]  # tolerate trailing blank lines
    if not rows:
        raise CsvParseError(f"{path}: empty file")

    if header:
        columns = tuple(c.strip() for c in rows[0])
        body = rows[1:]
        first_file_row = 2
    else:
        columns = tuple(f"V{i}" for i in range(len(rows[0])))
        body = rows
        first_file_row = 1
    if not body:
        raise CsvParseError(f"{path}: no data rows")

    width = len(columns)
    values = np.empty((len(body), width))
    for r, row in enumerate(body):
        file_row = first_file_row + r
        if len(row) != width:
            raise CsvParseError(
                f"row {file_row}: expected {width} cells, got {len(row)}",
                row=file_row,
            )
        for c, cell in enumerate(row):
            values[r, c] = _parse_cell(cell, file_row, c + 1)

    imputed = 0
    for c in range(width):
        try:
            imputed += _impute_column(values[:, c])
        except DegenerateInputError:
            raise DegenerateInputError(
                f"{path}: column {columns[c]!r} has no numeric values"
            ) from None
    return Dataset(columns, values, source=path, imputed_cells=imputed)


def save_csv(path, columns, values) -> None:
    """Write a header row plus the matrix at 17 significant digits."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"values must be 2-d, got shape {values.shape}")
    if len(columns) != values.shape[1]:
        raise ValueError(
            f"{len(columns)} column names for {values.shape[1]} data columns"
        )
    with open(str(path), "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(columns))
        for row in values:
            writer.writerow([f"{v:.17g}" for v in row])
