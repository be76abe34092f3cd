"""Filter predicates, visualizations, and empirical pmf estimation.

A predicate is a conjunction (AND) of per-feature connections, each
connection an OR of clauses on a single feature.  Clause values live in
the feature's metric space; a value of +inf makes the clause a no-op
sentinel that is always true.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .tables import FeatureKind, Table, UnknownFeatureError

INF = float("inf")
OPERATORS = ("<=", ">=", "=", "!=", "<", ">")


class EmptySupportError(ValueError):
    """The predicate selects no rows (Tarone-excludable visualization)."""


class MisalignedSupportError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Clause:
    feature: str
    op: str
    value: float

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise ValueError(f"unknown operator {self.op!r}")
        if math.isnan(self.value) or self.value == -INF:
            raise ValueError(f"bad clause value {self.value!r}")

    @property
    def is_sentinel(self) -> bool:
        return self.value == INF

    def mask(self, x: np.ndarray) -> np.ndarray:
        if self.is_sentinel:
            return np.ones(len(x), dtype=bool)
        if self.op == "<=":
            return x <= self.value
        if self.op == ">=":
            return x >= self.value
        if self.op == "<":
            return x < self.value
        if self.op == ">":
            return x > self.value
        if self.op == "=":
            return x == self.value
        return (x != self.value) & ~np.isnan(x)


@dataclass(frozen=True)
class Connection:
    """OR-combination of clauses on one feature."""

    feature: str
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if not self.clauses:
            raise ValueError("empty connection")
        if any(c.feature != self.feature for c in self.clauses):
            raise ValueError("connection mixes features")

    @property
    def is_sentinel(self) -> bool:
        return all(c.is_sentinel for c in self.clauses)

    def mask(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(len(x), dtype=bool)
        for c in self.clauses:
            out |= c.mask(x)
        return out


@dataclass(frozen=True)
class Predicate:
    """Conjunction of connections; an empty conjunction is TRUE."""

    connections: tuple[Connection, ...] = ()

    def __post_init__(self):
        feats = [c.feature for c in self.connections]
        if len(set(feats)) != len(feats):
            raise ValueError(f"repeated features in predicate: {feats}")

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(c.feature for c in self.connections)

    def active_features(self) -> tuple[str, ...]:
        return tuple(c.feature for c in self.connections if not c.is_sentinel)

    def n_active_clauses(self) -> int:
        return sum(
            1 for c in self.connections for cl in c.clauses if not cl.is_sentinel
        )

    def mask(self, table: Table) -> np.ndarray:
        """Boolean row mask; rows with nulls in any active feature drop out."""
        out = np.ones(table.n, dtype=bool)
        for conn in self.connections:
            if conn.is_sentinel:
                continue
            x = table.metric(conn.feature)
            out &= conn.mask(x) & ~np.isnan(x)
        return out

    def to_json(self) -> dict:
        """Canonical JSON form: features and clauses in sorted order."""
        return {
            "and": [
                {
                    "feature": conn.feature,
                    "or": [
                        {"op": c.op, "value": "inf" if c.is_sentinel else c.value}
                        for c in sorted(conn.clauses)
                    ],
                }
                for conn in sorted(self.connections, key=lambda c: c.feature)
            ]
        }

    def canonical(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, doc: dict) -> "Predicate":
        conns = []
        for entry in doc.get("and", []):
            feat = entry["feature"]
            clauses = tuple(
                Clause(feat, c["op"], INF if c["value"] == "inf" else float(c["value"]))
                for c in entry["or"]
            )
            conns.append(Connection(feat, clauses))
        return cls(tuple(conns))


TRUE = Predicate()


def evaluate_predicate(pred: Predicate, table: Table) -> np.ndarray:
    """Indices of the rows selected by the predicate."""
    for f in pred.features:
        table.column(f)  # raises UnknownFeatureError
    return np.flatnonzero(pred.mask(table))


def selectivity(pred: Predicate, table: Table) -> float:
    if table.n == 0:
        raise ValueError("selectivity undefined on an empty table")
    return float(pred.mask(table).sum()) / table.n


@dataclass(frozen=True)
class Visualization:
    """(predicate, group-by feature, COUNT) - a bar chart over the sample."""

    predicate: Predicate
    group_by: str
    bucket_count: int = 10
    aggregate: str = "COUNT"

    def __post_init__(self):
        if self.group_by in self.predicate.features:
            raise ValueError(f"group-by feature {self.group_by!r} used in predicate")
        if self.bucket_count < 2:
            raise ValueError("bucket_count must be >= 2")
        if self.aggregate != "COUNT":
            raise ValueError("only COUNT is supported")


@dataclass(frozen=True)
class Pmf:
    """Empirical pmf over an aligned support domain.

    The domain always comes from the *unfiltered* table so that pmfs of
    two visualizations with the same group-by are directly comparable.
    """

    support_values: tuple[float, ...]
    probs: tuple[float, ...]
    support: int
    counts: tuple[float, ...]

    def __post_init__(self):
        if self.support < 1:
            raise ValueError("pmf needs support >= 1")
        total = sum(self.probs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")

    @property
    def k(self) -> int:
        return len(self.support_values)

    def to_json(self) -> dict:
        return {
            "support_values": list(self.support_values),
            "probs": list(self.probs),
            "support": self.support,
        }


def groupby_domain(table: Table, feature: str, bucket_count: int = 10):
    """The aligned x-axis domain of a group-by feature.

    Discrete kinds use the observed values of the full table; continuous
    features get ``bucket_count`` equal-width buckets over [min, max] and
    the domain values are the bucket midpoints.  Returns (values, edges)
    where ``edges`` is None for discrete kinds.
    """
    col = table.column(feature)
    vals = col.values[~np.isnan(col.values)]
    if vals.size == 0:
        raise EmptySupportError(f"group-by feature {feature!r} has no values")
    if col.kind is not FeatureKind.CONTINUOUS:
        return tuple(float(v) for v in np.unique(vals)), None
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        return (lo,), None
    edges = np.linspace(lo, hi, bucket_count + 1)
    mids = (edges[:-1] + edges[1:]) / 2.0
    return tuple(float(m) for m in mids), edges


def groupby_codes(table: Table, feature: str, bucket_count: int = 10):
    """Per-row bucket index into the aligned domain (-1 for nulls)."""
    values, edges = groupby_domain(table, feature, bucket_count)
    x = table.metric(feature)
    codes = np.full(table.n, -1, dtype=np.int64)
    ok = ~np.isnan(x)
    if edges is None:
        lookup = {v: i for i, v in enumerate(values)}
        idx = np.searchsorted(np.array(values), x[ok])
        idx = np.clip(idx, 0, len(values) - 1)
        codes[ok] = idx
        # values not in the domain cannot occur: the domain is all observed values
        del lookup
    else:
        idx = np.searchsorted(edges, x[ok], side="right") - 1
        idx = np.clip(idx, 0, len(values) - 1)
        codes[ok] = idx
    return values, codes


def estimate_pmf(vis: Visualization, table: Table) -> Pmf:
    """Empirical conditional pmf of the group-by feature under the filter."""
    values, codes = groupby_codes(table, vis.group_by, vis.bucket_count)
    mask = vis.predicate.mask(table) & (codes >= 0)
    m = int(mask.sum())
    if m == 0:
        raise EmptySupportError(f"zero support for predicate {vis.predicate.canonical()}")
    counts = np.bincount(codes[mask], minlength=len(values)).astype(float)
    probs = counts / m
    # exact renormalization guard against float drift
    probs = probs / probs.sum()
    return Pmf(values, tuple(float(p) for p in probs), m, tuple(float(c) for c in counts))
