"""Immutable columnar tables with typed features.

Every column is stored as a float64 vector in "metric space": an injective,
order-preserving (for ordered kinds) mapping of the raw values to real
numbers.  NaN marks a missing value.  Categorical labels are mapped to
0, 1, 2, ... in first-appearance order; binary columns always map to {0, 1}.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

# Integer columns with more distinct values than this are treated as
# continuous (they no longer make a meaningful bar chart).
DISCRETE_DISTINCT_THRESHOLD = 100


class FeatureKind(str, Enum):
    BINARY = "binary"
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"


_KIND_ALIASES = {k.value: k for k in FeatureKind}


class UnknownFeatureError(KeyError):
    pass


class MalformedCsvError(ValueError):
    pass


@dataclass(frozen=True)
class Column:
    """One typed column: metric-space values plus the raw-value mapping.

    ``labels`` is None for ordered numeric columns (metric == raw value);
    for binary/categorical columns it lists the raw values in metric order,
    i.e. ``labels[int(metric)]`` recovers the raw value.
    """

    name: str
    kind: FeatureKind
    values: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def metric_map(self) -> dict[str, float] | None:
        if self.labels is None:
            return None
        return {lab: float(i) for i, lab in enumerate(self.labels)}

    def raw_value(self, metric: float) -> str:
        """Format a single metric value back to its raw CSV representation."""
        if math.isnan(metric):
            return ""
        if self.labels is not None:
            return self.labels[int(metric)]
        if metric == int(metric):
            return str(int(metric))
        return repr(metric)


@dataclass(frozen=True)
class Table:
    """An immutable sample dataset.  Safe to share across threads."""

    name: str
    columns: tuple[Column, ...]
    n: int = field(init=False, default=0)

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names: %r" % names)
        lengths = {len(c.values) for c in self.columns}
        if len(lengths) > 1:
            raise ValueError("ragged columns: lengths %r" % sorted(lengths))
        object.__setattr__(self, "n", lengths.pop() if lengths else 0)
        object.__setattr__(self, "_by_name", {c.name: c for c in self.columns})

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, feature: str) -> Column:
        try:
            return self._by_name[feature]
        except KeyError:
            raise UnknownFeatureError(feature) from None

    def metric(self, feature: str) -> np.ndarray:
        return self.column(feature).values

    def kind(self, feature: str) -> FeatureKind:
        return self.column(feature).kind

    def select(self, features: list[str] | tuple[str, ...]) -> "Table":
        """A new table keeping only the given columns (shares the data)."""
        return Table(self.name, tuple(self.column(f) for f in features))

    def schema_summary(self) -> dict[str, str]:
        return {c.name: c.kind.value for c in self.columns}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.feature_names)
        for i in range(self.n):
            writer.writerow([c.raw_value(float(c.values[i])) for c in self.columns])
        return buf.getvalue()


def _try_float(s: str) -> float | None:
    try:
        return float(s)
    except ValueError:
        return None


def infer_feature_kinds(raw_columns: list[list[str]]) -> list[FeatureKind]:
    """Deterministically classify each raw column into one of the four kinds."""
    kinds = []
    for col in raw_columns:
        present = [v for v in col if v != ""]
        numeric = [_try_float(v) for v in present]
        if any(x is None for x in numeric) or not present:
            kinds.append(FeatureKind.CATEGORICAL)
            continue
        distinct = set(numeric)
        if len(distinct) <= 2:
            kinds.append(FeatureKind.BINARY)
        elif all(x == int(x) for x in numeric) and len(distinct) <= DISCRETE_DISTINCT_THRESHOLD:
            kinds.append(FeatureKind.DISCRETE)
        else:
            kinds.append(FeatureKind.CONTINUOUS)
    return kinds


def _build_column(name: str, raw: list[str], kind: FeatureKind) -> Column:
    n = len(raw)
    values = np.full(n, np.nan)
    if kind in (FeatureKind.DISCRETE, FeatureKind.CONTINUOUS):
        for i, v in enumerate(raw):
            if v != "":
                x = _try_float(v)
                if x is None:
                    raise MalformedCsvError(
                        f"column {name!r}: non-numeric value {v!r} for kind {kind.value}"
                    )
                values[i] = x
        return Column(name, kind, values)
    if kind is FeatureKind.BINARY:
        distinct = sorted({_try_float(v) for v in raw if v != ""}, key=lambda x: (x is None, x))
        if len(distinct) > 2 or any(d is None for d in distinct):
            raise MalformedCsvError(f"column {name!r}: not binary: {distinct!r}")
        if set(distinct) <= {0.0, 1.0}:
            for i, v in enumerate(raw):
                if v != "":
                    values[i] = float(v)
            return Column(name, kind, values)
        # two arbitrary numeric levels, remapped order-preservingly to {0, 1}
        mapping = {d: float(i) for i, d in enumerate(distinct)}
        labels = tuple(str(int(d)) if d == int(d) else repr(d) for d in distinct)
        for i, v in enumerate(raw):
            if v != "":
                values[i] = mapping[float(v)]
        return Column(name, kind, values, labels=labels)
    # categorical: first-appearance order
    mapping: dict[str, float] = {}
    labels: list[str] = []
    for i, v in enumerate(raw):
        if v == "":
            continue
        if v not in mapping:
            mapping[v] = float(len(labels))
            labels.append(v)
        values[i] = mapping[v]
    return Column(name, FeatureKind.CATEGORICAL, values, labels=tuple(labels))


def load_table(source, schema: dict[str, str] | None = None, name: str = "table") -> Table:
    """Load a table from CSV (path, text, bytes, or file object).

    ``schema`` optionally overrides inferred kinds per column, using the
    names "binary" | "discrete" | "continuous" | "categorical".
    """
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = Path(source).read_text(encoding="utf-8") if "\n" not in source and source.endswith(".csv") else source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise MalformedCsvError("empty file")
    header, data_rows = rows[0], rows[1:]
    if len(set(header)) != len(header) or any(h == "" for h in header):
        raise MalformedCsvError(f"bad header: {header!r}")
    for i, r in enumerate(data_rows):
        if len(r) != len(header):
            raise MalformedCsvError(f"ragged row {i + 2}: {len(r)} fields, expected {len(header)}")
    raw_columns = [[r[j] for r in data_rows] for j in range(len(header))]
    kinds = infer_feature_kinds(raw_columns)
    if schema:
        for col, kind_name in schema.items():
            if col not in header:
                raise UnknownFeatureError(col)
            if kind_name not in _KIND_ALIASES:
                raise ValueError(f"unknown kind {kind_name!r}")
            kinds[header.index(col)] = _KIND_ALIASES[kind_name]
    columns = tuple(_build_column(h, raw, k) for h, raw, k in zip(header, raw_columns, kinds))
    return Table(name, columns)


def load_schema_file(path) -> dict[str, str]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def column_stats(table: Table, feature: str):
    """(distinct count, min, max, null count) for one column, exact."""
    col = table.column(feature)
    vals = col.values
    nulls = int(np.isnan(vals).sum())
    present = vals[~np.isnan(vals)]
    if present.size == 0:
        return 0, None, None, nulls
    return int(np.unique(present).size), float(present.min()), float(present.max()), nulls


def from_arrays(name: str, columns: dict[str, tuple[FeatureKind, np.ndarray]]) -> Table:
    """Build a table directly from metric-space arrays (used by generators)."""
    cols = tuple(
        Column(cname, kind, np.asarray(vals, dtype=float).copy())
        for cname, (kind, vals) in columns.items()
    )
    return Table(name, cols)
