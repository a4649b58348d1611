"""SSBR compound records: built-in reference data, CSV I/O, validation,
and reversible min-max normalization.

The canonical CSV schema is a fixed nine-column header (target first, then
the eight feature columns) with plain decimal numbers, UTF-8, and LF line
endings on output.  CRLF input is accepted.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import CsvParseError, EmptyDatasetError, SchemaError

TARGET_COLUMN = "akron_abrasion"

FEATURE_COLUMNS = (
    "shore_a_hardness",
    "modulus_100",
    "modulus_300",
    "modulus_ratio",
    "tensile_strength",
    "elongation_at_break",
    "tear_strength",
    "permanent_set",
)

CSV_COLUMNS = (TARGET_COLUMN,) + FEATURE_COLUMNS

BUILTIN_SOURCE = "builtin"

# Largest physically plausible Akron volume loss; anything above is a
# recording error, not a measurement.
MAX_ABRASION = 10.0

# Printed ratio columns are given to one decimal, so recomputed ratios may
# legitimately differ by up to half a unit in the last place plus the
# rounding of the operands; 0.1 absorbs that slack.
RATIO_TOLERANCE = 0.1


@dataclass(frozen=True)
class Sample:
    """One SSBR compound record: the abrasion target plus eight properties."""

    akron_abrasion: float  # volume loss, cm^3 per 1.61 km (target)
    shore_a_hardness: float  # Shore A units
    modulus_100: float  # MPa at 100% strain
    modulus_300: float  # MPa at 300% strain
    modulus_ratio: float  # modulus_300 / modulus_100, as recorded
    tensile_strength: float  # MPa
    elongation_at_break: float  # %
    tear_strength: float  # kN/m
    permanent_set: float  # %

    def value(self, column: str) -> float:
        return getattr(self, column)

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))


# Reference measurements for 23 SSBR compounds, embedded verbatim in
# (akron_abrasion, shore_a_hardness, modulus_100, modulus_300, modulus_ratio,
#  tensile_strength, elongation_at_break, tear_strength, permanent_set) order.
# Compound 21's recorded ratio (4.5) disagrees with 6.7/1.8; it is kept as
# recorded and flagged by validate().
_BUILTIN_ROWS = (
    (0.18, 62, 2.1, 11.5, 5.5, 18.1, 417, 38.3, 12),
    (0.21, 62, 2.1, 10.7, 5.1, 17.5, 427, 41.8, 12),
    (0.22, 70, 2.0, 10.8, 5.4, 15.5, 456, 47.2, 12),
    (0.29, 64, 2.6, 11.2, 4.3, 16.7, 405, 40.3, 12),
    (0.31, 64, 2.4, 10.1, 4.2, 15.7, 414, 41.9, 12),
    (0.13, 67, 1.5, 7.6, 5.1, 24.3, 698, 53.6, 20),
    (0.13, 63, 1.4, 8.3, 5.9, 25.3, 680, 57.0, 20),
    (0.09, 70, 1.7, 8.9, 5.2, 22.0, 628, 42.3, 20),
    (0.08, 63, 1.5, 9.3, 6.2, 20.4, 568, 42.0, 16),
    (0.10, 71, 2.5, 12.3, 4.9, 21.5, 475, 40.6, 20),
    (0.17, 69, 2.3, 10.6, 4.6, 17.2, 470, 46.5, 12),
    (0.07, 65, 2.4, 11.7, 4.9, 27.6, 502, 53.0, 16),
    (0.16, 70, 2.5, 12.1, 4.8, 20.1, 421, 49.1, 12),
    (0.34, 60, 1.4, 5.9, 4.2, 16.6, 557, 41.7, 16),
    (0.18, 60, 1.8, 12.0, 6.7, 18.8, 405, 36.5, 8),
    (0.20, 60, 1.9, 12.7, 6.7, 20.1, 357, 34.0, 12),
    (0.23, 60, 1.9, 12.9, 6.8, 19.4, 397, 34.3, 16),
    (0.26, 62, 2.1, 12.6, 6.0, 16.0, 336, 33.3, 12),
    (0.35, 62, 1.5, 9.2, 6.1, 16.9, 475, 32.2, 20),
    (0.29, 67, 1.9, 10.1, 5.3, 19.6, 328, 44.8, 16),
    (0.34, 64, 1.8, 6.7, 4.5, 19.9, 577, 35.0, 10),
    (0.19, 61, 2.4, 12.1, 5.0, 18.7, 427, 45.1, 16),
    (0.21, 63, 2.7, 12.5, 4.6, 19.2, 436, 49.0, 16),
)


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of samples with a provenance tag."""

    samples: tuple[Sample, ...]
    source: str

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, index: int) -> Sample:
        return self.samples[index]

    def select(self, indices: Sequence[int]) -> "Dataset":
        """Return a new dataset containing the given rows, in the given order."""
        return Dataset(samples=tuple(self.samples[i] for i in indices), source=self.source)

    def column(self, name: str) -> np.ndarray:
        return np.array([s.value(name) for s in self.samples], dtype=float)

    def targets(self) -> np.ndarray:
        return self.column(TARGET_COLUMN)

    def feature_matrix(self, columns: Sequence[str] = FEATURE_COLUMNS) -> np.ndarray:
        return np.array([[s.value(c) for c in columns] for s in self.samples], dtype=float)


def builtin_dataset() -> Dataset:
    """Return the built-in 23-compound reference dataset."""
    samples = tuple(Sample(*(float(v) for v in row)) for row in _BUILTIN_ROWS)
    return Dataset(samples=samples, source=BUILTIN_SOURCE)


def _format_number(x: float) -> str:
    # repr() round-trips float64 exactly, keeping save/load/save byte-stable.
    return repr(x)


def save_csv(d: Dataset, path: str | Path) -> None:
    """Write a dataset in the canonical CSV schema (LF line endings)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for s in d.samples:
            writer.writerow(_format_number(v) for v in s.as_row())


def _check_header(header: Sequence[str], expected: Sequence[str]) -> None:
    if list(header) == list(expected):
        return
    missing = [c for c in expected if c not in header]
    extra = [c for c in header if c not in expected]
    parts = []
    if missing:
        parts.append(f"missing column(s): {', '.join(missing)}")
    if extra:
        parts.append(f"unexpected column(s): {', '.join(extra)}")
    if not parts:
        parts.append(f"columns out of order: expected {', '.join(expected)}")
    raise SchemaError("; ".join(parts))


def _read_numeric_rows(path: str | Path, expected: Sequence[str]) -> list[tuple[float, ...]]:
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file has no header row") from None
        _check_header(header, expected)
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue  # tolerate a trailing blank line
            if len(row) != len(expected):
                raise CsvParseError(f"{path}: row {lineno} has {len(row)} cells, expected {len(expected)}")
            values = []
            for name, cell in zip(expected, row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CsvParseError(f"{path}: row {lineno}, column {name!r}: not a number: {cell!r}") from None
            rows.append(tuple(values))
    return rows


def load_csv(path: str | Path) -> Dataset:
    """Load a dataset from a canonical-schema CSV file.

    Raises SchemaError for missing/extra/misordered columns, CsvParseError
    for non-numeric cells, and EmptyDatasetError for a header-only file.
    """
    rows = _read_numeric_rows(path, CSV_COLUMNS)
    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")
    return Dataset(samples=tuple(Sample(*r) for r in rows), source=str(path))


def read_prediction_inputs(path: str | Path) -> tuple[list[dict[str, float]], bool]:
    """Read a prediction-input CSV: canonical schema with or without the target.

    Returns (rows, has_target) where each row maps column name to value.
    """
    with open(path, encoding="utf-8-sig", newline="") as fh:
        try:
            header = next(csv.reader(fh))
        except StopIteration:
            raise SchemaError(f"{path}: file has no header row") from None
    has_target = TARGET_COLUMN in header
    expected = CSV_COLUMNS if has_target else FEATURE_COLUMNS
    rows = _read_numeric_rows(path, expected)
    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")
    return [dict(zip(expected, r)) for r in rows], has_target


@dataclass(frozen=True)
class Finding:
    """One validation finding, tied to a 1-based sample number."""

    sample: int
    message: str


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Finding, ...]
    warnings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(d: Dataset) -> ValidationReport:
    """Check every sample against the record invariants.

    Fatal defects (non-finite, non-positive, or out-of-range values) become
    errors; a recorded modulus ratio that disagrees with modulus_300 /
    modulus_100 by more than RATIO_TOLERANCE becomes a warning.  Sample
    numbers in the report are 1-based.
    """
    errors: list[Finding] = []
    warnings: list[Finding] = []
    for number, s in enumerate(d.samples, start=1):
        row_ok = True
        for name in CSV_COLUMNS:
            v = s.value(name)
            if not math.isfinite(v):
                errors.append(Finding(number, f"{name} is not finite: {v!r}"))
                row_ok = False
            elif v <= 0:
                errors.append(Finding(number, f"{name} must be strictly positive, got {_format_number(v)}"))
                row_ok = False
        if math.isfinite(s.akron_abrasion) and s.akron_abrasion >= MAX_ABRASION:
            errors.append(
                Finding(number, f"akron_abrasion {_format_number(s.akron_abrasion)} exceeds sanity bound {MAX_ABRASION}")
            )
            row_ok = False
        if row_ok:
            computed = s.modulus_300 / s.modulus_100
            if abs(s.modulus_ratio - computed) > RATIO_TOLERANCE:
                warnings.append(
                    Finding(
                        number,
                        f"modulus_ratio {_format_number(s.modulus_ratio)} inconsistent with "
                        f"modulus_300/modulus_100 = {computed:.2f}",
                    )
                )
    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))


@dataclass(frozen=True)
class ColumnRange:
    """Min/max of one column; degenerate when the column is constant."""

    lo: float
    hi: float

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def scale(self, x: float) -> float:
        if self.degenerate:
            return 0.0
        return (x - self.lo) / (self.hi - self.lo)

    def unscale(self, t: float) -> float:
        if self.degenerate:
            return self.lo
        # Convex form keeps unscale(1.0) == hi exactly for every range.
        return self.lo * (1.0 - t) + self.hi * t


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-column min/max for reversible [0, 1] scaling.

    Fitted on a training split only; out-of-range values scale to points
    outside [0, 1] and are passed through unclipped.  Degenerate (constant)
    columns scale to 0.0 by convention.
    """

    feature_columns: tuple[str, ...]
    feature_ranges: tuple[ColumnRange, ...]
    target_range: ColumnRange

    @property
    def n_features(self) -> int:
        return len(self.feature_columns)

    @property
    def degenerate_columns(self) -> tuple[str, ...]:
        cols = [c for c, r in zip(self.feature_columns, self.feature_ranges) if r.degenerate]
        if self.target_range.degenerate:
            cols.append(TARGET_COLUMN)
        return tuple(cols)

    def normalize(self, record: Sample | Mapping[str, float]) -> np.ndarray:
        """Scale a record's feature columns into normalized space."""
        return np.array(
            [r.scale(_lookup(record, c)) for c, r in zip(self.feature_columns, self.feature_ranges)],
            dtype=float,
        )

    def normalize_target(self, y: float) -> float:
        return self.target_range.scale(y)

    def denormalize_target(self, t: float) -> float:
        return self.target_range.unscale(t)


def _lookup(record: Sample | Mapping[str, float], column: str) -> float:
    if isinstance(record, Sample):
        return record.value(column)
    return float(record[column])


def fit_normalizer(d: Dataset, columns: Iterable[str] | None = None) -> NormalizationSpec:
    """Fit per-column min/max over a dataset (pass the training split only).

    `columns` selects the feature columns, defaulting to all eight; the
    target range is always fitted.  Constant columns are recorded as
    degenerate rather than rejected.
    """
    if len(d) == 0:
        raise EmptyDatasetError("cannot fit a normalizer on an empty dataset")
    cols = tuple(columns) if columns is not None else FEATURE_COLUMNS
    for c in cols:
        if c == TARGET_COLUMN or c not in FEATURE_COLUMNS:
            raise ValueError(f"unknown feature column: {c!r}")
    if not cols:
        raise ValueError("need at least one feature column")
    ranges = []
    for c in cols:
        values = d.column(c)
        ranges.append(ColumnRange(float(values.min()), float(values.max())))
    targets = d.targets()
    target_range = ColumnRange(float(targets.min()), float(targets.max()))
    return NormalizationSpec(feature_columns=cols, feature_ranges=tuple(ranges), target_range=target_range)
