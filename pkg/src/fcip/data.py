"""Dataset ingestion, descriptive statistics, and deterministic splitting.

Field canal improvement project records carry four cost drivers (command
area in hectares, pipeline length in meters, irrigation valve count, and
construction year) plus the observed total cost in Egyptian pounds.  The
canonical on-disk format is UTF-8 CSV with a dot decimal point.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

DRIVER_NAMES = ("area_ha", "length_m", "valves", "year")
STANDARD_HEADER = ("id", "area_ha", "length_m", "valves", "year", "cost_le")
EXTENDED_VARIABLES = tuple(f"p{i}" for i in range(1, 18))

DATA_ENV_VAR = "FCIP_DATA"


class ParseError(ValueError):
    """Raised for malformed dataset documents, naming row and field."""


@dataclass(frozen=True)
class ProjectCase:
    """One improvement-project record: four drivers and the observed cost."""

    id: str
    area_ha: float
    length_m: float
    valves: int
    year: int
    cost_le: float

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("id must be non-empty")
        if not self.area_ha > 0:
            raise ValueError(f"case {self.id}: area_ha must be positive")
        if not self.length_m > 0:
            raise ValueError(f"case {self.id}: length_m must be positive")
        if self.valves < 1:
            raise ValueError(f"case {self.id}: valves must be at least 1")
        if not 1990 <= self.year <= 2100:
            raise ValueError(f"case {self.id}: year must lie in [1990, 2100]")
        if not self.cost_le > 0:
            raise ValueError(f"case {self.id}: cost_le must be positive")

    @property
    def drivers(self) -> tuple[float, float, float, float]:
        return (self.area_ha, self.length_m, float(self.valves), float(self.year))


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of project cases with a role tag."""

    cases: tuple[ProjectCase, ...]
    role: str = "combined"

    def __post_init__(self) -> None:
        if not self.cases:
            raise ValueError("dataset must contain at least one case")
        if self.role not in ("training", "validation", "combined"):
            raise ValueError(f"unknown dataset role {self.role!r}")
        seen: set[str] = set()
        for case in self.cases:
            if case.id in seen:
                raise ValueError(f"duplicate case id {case.id!r}")
            seen.add(case.id)

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    def driver_matrix(self) -> np.ndarray:
        """Cases-by-drivers matrix in dataset order."""
        return np.array([c.drivers for c in self.cases], dtype=float)

    def costs(self) -> np.ndarray:
        return np.array([c.cost_le for c in self.cases], dtype=float)


@dataclass(frozen=True)
class PipeSegment:
    diameter_mm: float
    length_m: float

    def __post_init__(self) -> None:
        if not self.diameter_mm > 0:
            raise ValueError("diameter_mm must be positive")
        if not self.length_m > 0:
            raise ValueError("length_m must be positive")


@dataclass(frozen=True)
class VariableStats:
    minimum: float
    maximum: float
    mean: float
    sd: float


@dataclass(frozen=True)
class DescriptiveStats:
    """Per-variable min, max, mean, and sample standard deviation."""

    variables: dict[str, VariableStats]

    def __getitem__(self, name: str) -> VariableStats:
        return self.variables[name]


@dataclass(frozen=True)
class Table:
    """Named numeric matrix with a response column, for driver screening."""

    names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.X.shape != (len(self.ids), len(self.names)):
            raise ValueError("matrix shape does not match names and ids")
        if self.y.shape != (len(self.ids),):
            raise ValueError("response length does not match ids")

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]


def _parse_number(raw: str, row: int, field: str, kind: str = "real") -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"row {row}, field {field}: not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}, field {field}: not finite: {raw!r}")
    if kind == "integer" and value != int(value):
        raise ParseError(f"row {row}, field {field}: not an integer: {raw!r}")
    return value


def parse_dataset(text: str, role: str = "combined") -> Dataset:
    """Parse a standard-schema CSV document into a Dataset.

    The header must be exactly ``id,area_ha,length_m,valves,year,cost_le``.
    Malformed rows, duplicate ids, and violated field invariants raise
    :class:`ParseError` naming the offending row and field.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r]
    if not rows:
        raise ParseError("empty document")
    header = tuple(h.strip() for h in rows[0])
    if header != STANDARD_HEADER:
        raise ParseError(f"bad header: expected {','.join(STANDARD_HEADER)}")
    if len(rows) == 1:
        raise ParseError("empty dataset")
    cases = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(STANDARD_HEADER):
            raise ParseError(f"row {i}: expected {len(STANDARD_HEADER)} fields, got {len(row)}")
        rid = row[0].strip()
        try:
            case = ProjectCase(
                id=rid,
                area_ha=_parse_number(row[1], i, "area_ha"),
                length_m=_parse_number(row[2], i, "length_m"),
                valves=int(_parse_number(row[3], i, "valves", "integer")),
                year=int(_parse_number(row[4], i, "year", "integer")),
                cost_le=_parse_number(row[5], i, "cost_le"),
            )
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"row {i}: {exc}") from None
        cases.append(case)
    try:
        return Dataset(tuple(cases), role)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def serialize_dataset(dataset: Dataset) -> str:
    """Render a Dataset back to canonical CSV. Inverse of parse_dataset."""

    def fmt(value: float) -> str:
        return str(int(value)) if float(value).is_integer() else repr(float(value))

    lines = [",".join(STANDARD_HEADER)]
    for c in dataset:
        lines.append(
            f"{c.id},{fmt(c.area_ha)},{fmt(c.length_m)},{c.valves},{c.year},{fmt(c.cost_le)}"
        )
    return "\n".join(lines) + "\n"


def parse_extended(text: str) -> Table:
    """Parse the extended screening schema ``id,p1,...,p17,cost_le``.

    Any subset of the p-columns may be present (in order).  A column with
    one or more empty cells counts as absent and is dropped from the
    returned table.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r]
    if not rows:
        raise ParseError("empty document")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "id" or header[-1] != "cost_le":
        raise ParseError("bad header: expected id,p...,cost_le")
    middle = header[1:-1]
    allowed = iter(EXTENDED_VARIABLES)
    for name in middle:
        for candidate in allowed:
            if candidate == name:
                break
        else:
            raise ParseError(f"bad header: unknown or out-of-order column {name!r}")
    if len(rows) == 1:
        raise ParseError("empty dataset")
    ids = []
    values: list[list[float | None]] = []
    response = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"row {i}: expected {len(header)} fields, got {len(row)}")
        ids.append(row[0].strip())
        cells: list[float | None] = []
        for name, raw in zip(middle, row[1:-1]):
            raw = raw.strip()
            cells.append(None if raw == "" else _parse_number(raw, i, name))
        values.append(cells)
        response.append(_parse_number(row[-1], i, "cost_le"))
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate case id")
    keep = [
        j for j in range(len(middle)) if all(row[j] is not None for row in values)
    ]
    names = tuple(middle[j] for j in keep)
    X = np.array([[row[j] for j in keep] for row in values], dtype=float)
    if X.size == 0:
        X = X.reshape(len(ids), 0)
    return Table(names=names, X=X, y=np.array(response, dtype=float), ids=tuple(ids))


def table_from_dataset(dataset: Dataset) -> Table:
    """View a standard dataset as a screening table (drivers vs cost)."""
    return Table(
        names=DRIVER_NAMES,
        X=dataset.driver_matrix(),
        y=dataset.costs(),
        ids=tuple(c.id for c in dataset),
    )


def equivalent_diameter(segments: Sequence[PipeSegment]) -> float:
    """Length-weighted mean diameter over a pipeline's segments."""
    if not segments:
        raise ValueError("at least one segment required")
    total = sum(s.length_m for s in segments)
    return sum(s.diameter_mm * s.length_m for s in segments) / total


def split(dataset: Dataset, boundary: int) -> tuple[Dataset, Dataset]:
    """Positional split: first ``boundary`` cases train, the rest validate."""
    if not 0 < boundary < len(dataset):
        raise ValueError(f"boundary {boundary} out of range for {len(dataset)} cases")
    return (
        Dataset(dataset.cases[:boundary], "training"),
        Dataset(dataset.cases[boundary:], "validation"),
    )


def describe(dataset: Dataset) -> DescriptiveStats:
    """Per-variable min/max/mean/sd over the dataset, drivers plus cost."""
    columns = {
        "area_ha": [c.area_ha for c in dataset],
        "length_m": [c.length_m for c in dataset],
        "valves": [float(c.valves) for c in dataset],
        "year": [float(c.year) for c in dataset],
        "cost_le": [c.cost_le for c in dataset],
    }
    stats = {}
    for name, vals in columns.items():
        arr = np.asarray(vals)
        sd = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        stats[name] = VariableStats(
            minimum=float(arr.min()),
            maximum=float(arr.max()),
            mean=float(arr.mean()),
            sd=sd,
        )
    return DescriptiveStats(stats)


def driver_bounds(dataset: Dataset) -> dict[str, tuple[float, float]]:
    """Training min/max per driver, used for clamping and partitions."""
    X = dataset.driver_matrix()
    return {
        name: (float(X[:, j].min()), float(X[:, j].max()))
        for j, name in enumerate(DRIVER_NAMES)
    }


def bundled_data_dir() -> str:
    """Directory holding the packaged CSV fixtures, honoring FCIP_DATA."""
    override = os.environ.get(DATA_ENV_VAR)
    if override:
        return override
    return str(resources.files("fcip").joinpath("data"))


def load_csv(path: str, role: str) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_dataset(fh.read(), role)


def load_training(directory: str | None = None) -> Dataset:
    directory = directory or bundled_data_dir()
    return load_csv(os.path.join(directory, "train.csv"), "training")


def load_validation(directory: str | None = None) -> Dataset:
    directory = directory or bundled_data_dir()
    return load_csv(os.path.join(directory, "valid.csv"), "validation")
