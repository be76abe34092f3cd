"""Uniform-convergence machinery: interval reduction, query-class
complexity bounds, epsilon-approximation uncertainties, pruning thresholds,
and Chernoff-Hoeffding comparison bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .queries import INF, Clause, Connection


# ---------------------------------------------------------------------------
# interval reduction


@dataclass(frozen=True, order=True)
class Interval:
    """A real interval with per-endpoint open/closed tags."""

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        if self.lo == self.hi and (self.lo_open or self.hi_open):
            raise ValueError("degenerate open interval")

    @property
    def bounded(self) -> bool:
        return self.lo > -INF and self.hi < INF

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and self.lo_open:
            return False
        if x == self.hi and self.hi_open:
            return False
        return True


@dataclass(frozen=True)
class IntervalSet:
    """Reduced (minimal) union of disjoint, non-adjacent intervals.

    ``tautology`` marks a connection whose union covers all reals.
    """

    intervals: tuple[Interval, ...] = ()
    tautology: bool = False

    def contains(self, x: float) -> bool:
        return self.tautology or any(iv.contains(x) for iv in self.intervals)

    @property
    def alpha_beta(self) -> tuple[int, int]:
        """(closed, open) interval counts for the VC lemma.

        Bounded intervals count toward alpha regardless of endpoint style
        (conservative); rays count toward beta.  A tautology contributes
        nothing: it cannot distinguish any points.
        """
        if self.tautology:
            return 0, 0
        alpha = sum(1 for iv in self.intervals if iv.bounded)
        beta = len(self.intervals) - alpha
        return alpha, beta


def _clause_intervals(clause: Clause) -> list[Interval]:
    if clause.is_sentinel:
        return [Interval(-INF, INF)]
    v = clause.value
    if clause.op == "<=":
        return [Interval(-INF, v)]
    if clause.op == "<":
        return [Interval(-INF, v, hi_open=True)]
    if clause.op == ">=":
        return [Interval(v, INF)]
    if clause.op == ">":
        return [Interval(v, INF, lo_open=True)]
    if clause.op == "=":
        return [Interval(v, v)]
    return [Interval(-INF, v, hi_open=True), Interval(v, INF, lo_open=True)]


def _mergeable(a: Interval, b: Interval) -> bool:
    """True when a ∪ b is one interval, given a.lo <= b.lo."""
    if b.lo < a.hi:
        return True
    if b.lo > a.hi:
        return False
    # touching endpoints: x=a.hi must be covered by at least one side
    return not (a.hi_open and b.lo_open)


def reduce_intervals(connection: Connection) -> IntervalSet:
    """Minimal membership-equivalent interval union for one connection."""
    pieces: list[Interval] = []
    for clause in connection.clauses:
        pieces.extend(_clause_intervals(clause))
    pieces.sort(key=lambda iv: (iv.lo, iv.lo_open, -iv.hi, iv.hi_open))
    merged: list[Interval] = []
    for iv in pieces:
        if merged and _mergeable(merged[-1], iv):
            last = merged[-1]
            if iv.hi > last.hi or (iv.hi == last.hi and not iv.hi_open):
                merged[-1] = Interval(last.lo, iv.hi, last.lo_open, iv.hi_open)
        else:
            merged.append(iv)
    if len(merged) == 1 and merged[0].lo == -INF and merged[0].hi == INF:
        return IntervalSet((), tautology=True)
    return IntervalSet(tuple(merged))


# ---------------------------------------------------------------------------
# query-class complexity


@dataclass(frozen=True)
class FeatureComplexity:
    name: str
    alpha: int
    beta: int

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha/beta must be non-negative")


@dataclass(frozen=True)
class QueryClassSpec:
    features: tuple[FeatureComplexity, ...]

    def __post_init__(self):
        if not self.features:
            raise ValueError("empty query class spec")

    def to_json(self) -> dict:
        return {
            "features": [
                {"name": f.name, "alpha": f.alpha, "beta": f.beta}
                for f in self.features
            ]
        }

    @classmethod
    def from_json(cls, doc: dict) -> "QueryClassSpec":
        return cls(
            tuple(
                FeatureComplexity(f["name"], int(f["alpha"]), int(f["beta"]))
                for f in doc["features"]
            )
        )


def vc_dimension_bound(spec: QueryClassSpec) -> int:
    """Upper bound sum(2*alpha_i + beta_i) over the reduced connections."""
    d = sum(2 * f.alpha + f.beta for f in spec.features)
    if d == 0:
        raise ValueError("query class has no non-trivial constraints")
    return d


def spec_from_connections(connections) -> QueryClassSpec:
    feats = []
    for conn in connections:
        a, b = reduce_intervals(conn).alpha_beta
        feats.append(FeatureComplexity(conn.feature, a, b))
    return QueryClassSpec(tuple(feats))


# ---------------------------------------------------------------------------
# epsilon-approximation bounds


@dataclass(frozen=True)
class BoundConfig:
    delta: float
    d: int
    c: float = 0.5
    log_base: float = 2.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0,1)")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.d < 1:
            raise ValueError("VC dimension must be >= 1")
        if self.log_base <= 1:
            raise ValueError("log base must exceed 1")


def _delta_term(delta: float, log_base: float) -> float:
    return math.log(1.0 / delta, log_base)


@dataclass(frozen=True)
class EpsilonBar:
    """Uncertainty radius sqrt(c*(d + log delta^-1)/m), inputs recorded."""

    value: float
    d: int
    delta: float
    m: int
    c: float
    log_base: float

    @property
    def clamped(self) -> float:
        """Reporting value: an uncertainty radius above 1 is just 1."""
        return min(1.0, self.value)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "clamped": self.clamped,
            "d": self.d,
            "delta": self.delta,
            "m": self.m,
            "c": self.c,
            "log_base": self.log_base,
        }


def epsilon_bar(d: int, delta: float, m: int, c: float = 0.5, log_base: float = 2.0) -> EpsilonBar:
    BoundConfig(delta, d, c, log_base)
    if m < 1:
        raise ValueError("support m must be >= 1")
    value = math.sqrt(c * (d + _delta_term(delta, log_base)) / m)
    return EpsilonBar(value, d, delta, m, c, log_base)


def min_selectivity_threshold(
    d: int, delta: float, n: int, c: float = 0.5, log_base: float = 2.0
) -> float:
    """Selectivity below which no visualization can ever be safe (eps >= 1)."""
    BoundConfig(delta, d, c, log_base)
    if n < 1:
        raise ValueError("n must be >= 1")
    return c * (d + _delta_term(delta, log_base)) / n


def max_vc_for_requirements(
    theta: float, gamma1: float, gamma2: float, n: int, delta: float, log_base: float = 2.0
) -> int:
    """Largest VC dimension that still detects a distance theta at the
    given selectivities: floor(theta^2 * min(gamma) * n - log delta^-1)."""
    if not 0 < theta <= 1:
        raise ValueError("theta must be in (0,1]")
    for g in (gamma1, gamma2):
        if not 0 < g <= 1:
            raise ValueError("selectivities must be in (0,1]")
    d_max = math.floor(theta * theta * min(gamma1, gamma2) * n - _delta_term(delta, log_base))
    if d_max < 1:
        raise ValueError(
            f"requirements unsatisfiable: max usable VC dimension is {d_max}"
        )
    return d_max


def chernoff_tail(m: int, eps: float, two_sided: bool = False) -> float:
    """exp(-2*m*eps^2); optional factor 2 for the two-sided version."""
    if m < 1:
        raise ValueError("m must be >= 1")
    p = math.exp(-2.0 * m * eps * eps)
    return min(1.0, (2.0 if two_sided else 1.0) * p)


def chernoff_epsilon(m: int, delta: float, k: int = 1) -> float:
    """Invert the K-bar union bound K*exp(-2*m*eps^2) = delta."""
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0,1)")
    return math.sqrt(math.log(k / delta) / (2.0 * m))


# ---------------------------------------------------------------------------
# exact shattering oracle for small instances


MAX_ORACLE_POINTS = 12


@dataclass(frozen=True)
class IntervalSlots:
    """Enumerable query template for one feature: ``closed`` arbitrary
    bounded intervals plus one-directional rays ("le" lower, "ge" upper)."""

    closed: int = 0
    rays: tuple[str, ...] = ()

    def __post_init__(self):
        if self.closed < 0 or any(r not in ("le", "ge") for r in self.rays):
            raise ValueError("bad slots")

    @property
    def alpha_beta(self) -> tuple[int, int]:
        return self.closed, len(self.rays)


def slots_spec(slots_by_feature: dict[str, IntervalSlots]) -> QueryClassSpec:
    return QueryClassSpec(
        tuple(
            FeatureComplexity(name, *slots.alpha_beta)
            for name, slots in slots_by_feature.items()
        )
    )


def _runs(sel: tuple[bool, ...]) -> list[tuple[int, int]]:
    runs, start = [], None
    for i, v in enumerate(sel):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(sel) - 1))
    return runs


def _feature_masks(coords: np.ndarray, slots: IntervalSlots) -> list[int]:
    """All point bitmasks selectable on one feature by the slot template."""
    order = np.unique(coords)
    k = len(order)
    rank = {v: i for i, v in enumerate(order)}
    point_rank = [rank[c] for c in coords]
    has_le = "le" in slots.rays
    has_ge = "ge" in slots.rays
    masks = set()
    for sel in itertools.product((False, True), repeat=k):
        runs = _runs(sel)
        need = len(runs)
        covered = set()
        if runs and has_le and runs[0][0] == 0:
            covered.add(runs[0])
        if runs and has_ge and runs[-1][1] == k - 1 and runs[-1] not in covered:
            covered.add(runs[-1])
        if need - len(covered) > slots.closed:
            continue
        mask = 0
        for p, r in enumerate(point_rank):
            if sel[r]:
                mask |= 1 << p
        masks.add(mask)
    return sorted(masks)


def shattering_oracle(points, slots_by_feature: dict[str, IntervalSlots] | IntervalSlots) -> int:
    """Exact maximum size of a shattered point subset, by exhaustive
    enumeration of the query template's achievable projections."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1 and pts.shape[1] > 1 and isinstance(slots_by_feature, IntervalSlots):
        pts = pts.T
    npts, nfeat = pts.shape
    if npts > MAX_ORACLE_POINTS:
        raise ValueError(f"instance too large: {npts} points > {MAX_ORACLE_POINTS}")
    if isinstance(slots_by_feature, IntervalSlots):
        if nfeat != 1:
            raise ValueError("single slot template given for multi-feature points")
        slot_list = [slots_by_feature]
    else:
        if len(slots_by_feature) != nfeat:
            raise ValueError("slot count does not match feature count")
        slot_list = list(slots_by_feature.values())

    proj = np.array(_feature_masks(pts[:, 0], slot_list[0]), dtype=np.int64)
    for j in range(1, nfeat):
        other = np.array(_feature_masks(pts[:, j], slot_list[j]), dtype=np.int64)
        proj = np.unique(np.bitwise_and.outer(proj, other).ravel())

    best = 0
    max_size = npts
    while max_size > 0 and 2 ** max_size > len(proj):
        max_size -= 1
    for size in range(max_size, 0, -1):
        for combo in itertools.combinations(range(npts), size):
            amask = 0
            for p in combo:
                amask |= 1 << p
            traces = np.unique(proj & amask)
            if len(traces) == 2**size:
                return size
    return best
