"""Safe visualization recommendations.

Enumerates the declared candidate space with selectivity pruning, scores
candidates by Chebyshev distance against the reference pmf, and keeps only
those whose distance exceeds the combined estimation uncertainty
(family-wise error controlled at level delta), ranked by interest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import stattests
from .bounds import (
    FeatureComplexity,
    QueryClassSpec,
    epsilon_bar,
    min_selectivity_threshold,
    vc_dimension_bound,
)
from .queries import (
    INF,
    Clause,
    Connection,
    EmptySupportError,
    MisalignedSupportError,
    Pmf,
    Predicate,
    Visualization,
    estimate_pmf,
    groupby_codes,
)
from .tables import FeatureKind, Table


def chebyshev_distance(p: Pmf, q: Pmf) -> float:
    """Max per-bar absolute difference between two aligned pmfs."""
    if p.support_values != q.support_values:
        raise MisalignedSupportError("pmf supports are not aligned")
    return max(abs(a - b) for a, b in zip(p.probs, q.probs))


@dataclass(frozen=True)
class ExplorationConfig:
    delta: float = 0.05
    c: float = 0.5
    log_base: float = 2.0
    eps_v: float | None = None
    vc_dimension: int | None = None  # explicit d; derived from the class if None
    max_features: int | None = None
    operators: tuple[str, ...] = ("<=",)
    one_sample: bool = False
    ordering: bool = True
    bucket_count: int = 10
    correlation_eps: float | None = None
    id_ratio: float = 5.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0,1)")
        if self.eps_v is not None and not 0 <= self.eps_v <= 1:
            raise ValueError("eps_v must be in [0,1]")

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "c": self.c,
            "log_base": self.log_base,
            "eps_v": self.eps_v,
            "vc_dimension": self.vc_dimension,
            "max_features": self.max_features,
            "operators": list(self.operators),
            "one_sample": self.one_sample,
            "ordering": self.ordering,
            "bucket_count": self.bucket_count,
            "correlation_eps": self.correlation_eps,
            "id_ratio": self.id_ratio,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ExplorationConfig":
        doc = dict(doc)
        if "operators" in doc:
            doc["operators"] = tuple(doc["operators"])
        return cls(**doc)


# worst-case per-clause contribution to the reduced (alpha, beta) pair
_OP_COMPLEXITY = {"<=": (0, 1), ">=": (0, 1), "<": (0, 1), ">": (0, 1), "=": (1, 0), "!=": (0, 2)}


def query_class_spec(
    features: list[str] | tuple[str, ...], config: ExplorationConfig
) -> QueryClassSpec:
    """Conservative (alpha, beta) per predicate feature for the declared
    operator set, one clause slot per operator per feature."""
    alpha = sum(_OP_COMPLEXITY[op][0] for op in config.operators)
    beta = sum(_OP_COMPLEXITY[op][1] for op in config.operators)
    return QueryClassSpec(tuple(FeatureComplexity(f, alpha, beta) for f in features))


def effective_vc_dimension(table: Table, group_by: str, config: ExplorationConfig) -> int:
    if config.vc_dimension is not None:
        return config.vc_dimension
    feats = [f for f in table.feature_names if f != group_by]
    return vc_dimension_bound(query_class_spec(feats, config))


# ---------------------------------------------------------------------------
# preprocessing


@dataclass(frozen=True)
class DroppedFeature:
    feature: str
    reason: str
    statistic: float

    def to_json(self) -> dict:
        return {"feature": self.feature, "reason": self.reason, "statistic": self.statistic}


@dataclass(frozen=True)
class PreprocessReport:
    dropped: tuple[DroppedFeature, ...]
    kept: tuple[str, ...]
    tarone_excluded: int = 0
    equivalence_merges: int = 0

    def to_json(self) -> dict:
        return {
            "dropped": [d.to_json() for d in self.dropped],
            "kept": list(self.kept),
            "tarone_excluded": self.tarone_excluded,
            "equivalence_merges": self.equivalence_merges,
        }


def preprocess(table: Table, config: ExplorationConfig) -> tuple[Table, PreprocessReport]:
    """Drop constant, identifier-like, and (optionally) duplicated-signal
    columns.  Runs before any recommendation so the error control stays valid.
    """
    dropped: list[DroppedFeature] = []
    kept: list[str] = []
    for col in table.columns:
        vals = col.values[~np.isnan(col.values)]
        distinct = int(np.unique(vals).size)
        if distinct <= 1:
            dropped.append(DroppedFeature(col.name, "constant", float(distinct)))
            continue
        ratio = table.n / distinct
        if ratio < config.id_ratio:
            dropped.append(DroppedFeature(col.name, "identifier-ratio", float(ratio)))
            continue
        kept.append(col.name)
    if config.correlation_eps is not None:
        survivors: list[str] = []
        for name in kept:
            x = table.metric(name)
            redundant = False
            for prev in survivors:
                y = table.metric(prev)
                ok = ~np.isnan(x) & ~np.isnan(y)
                if ok.sum() < 2 or np.std(x[ok]) == 0 or np.std(y[ok]) == 0:
                    continue
                rho = float(np.corrcoef(x[ok], y[ok])[0, 1])
                if 1.0 - rho * rho < config.correlation_eps:
                    dropped.append(DroppedFeature(name, "correlated", rho))
                    redundant = True
                    break
            if not redundant:
                survivors.append(name)
        kept = survivors
    return table.select(kept), PreprocessReport(tuple(dropped), tuple(kept))


# ---------------------------------------------------------------------------
# candidate enumeration


@dataclass
class EnumerationReport:
    raw_predicates: int = 0
    tarone_excluded: int = 0
    equivalence_merges: int = 0
    pruned_branches: int = 0


@dataclass(frozen=True)
class Candidate:
    predicate: Predicate
    support: int
    selectivity: float


def _clause_options(table: Table, feature: str, config: ExplorationConfig):
    vals = table.metric(feature)
    distinct = np.unique(vals[~np.isnan(vals)])
    options: list[tuple[Clause, ...] | None] = [None]  # None = sentinel / inactive
    for op in config.operators:
        for v in distinct:
            options.append((Clause(feature, op, float(v)),))
    return options


def _ordered_features(table: Table, group_by: str, config: ExplorationConfig) -> list[str]:
    feats = [f for f in table.feature_names if f != group_by]
    if config.ordering:
        def distinct_count(f):
            v = table.metric(f)
            return int(np.unique(v[~np.isnan(v)]).size)
        feats.sort(key=lambda f: (distinct_count(f), f))
    return feats


def enumerate_candidates(
    table: Table, reference: Visualization, config: ExplorationConfig
) -> tuple[list[Candidate], EnumerationReport]:
    """Tree exploration of the predicate space with selectivity pruning,
    Tarone exclusion of empty candidates, and equivalence-class dedup."""
    table.column(reference.group_by)
    d = effective_vc_dimension(table, reference.group_by, config)
    gamma_min = min_selectivity_threshold(d, config.delta, table.n, config.c, config.log_base)
    feats = _ordered_features(table, reference.group_by, config)
    options = {f: _clause_options(table, f, config) for f in feats}
    report = EnumerationReport()
    raw = 1
    for f in feats:
        raw *= len(options[f])
    report.raw_predicates = raw
    by_mask: dict[bytes, list[Predicate]] = {}

    def emit(mask: np.ndarray, conns: list[Connection]):
        pred = Predicate(tuple(conns))
        m = int(mask.sum())
        if m == 0:
            report.tarone_excluded += 1
            return
        by_mask.setdefault(np.packbits(mask).tobytes(), []).append(pred)

    def walk(i: int, mask: np.ndarray, conns: list[Connection], n_active: int):
        if i == len(feats):
            emit(mask, conns)
            return
        f = feats[i]
        for opt in options[f]:
            if opt is None:
                walk(i + 1, mask, conns, n_active)
                continue
            if config.max_features is not None and n_active >= config.max_features:
                continue
            x = table.metric(f)
            sub = mask & opt[0].mask(x) & ~np.isnan(x)
            gamma = sub.sum() / table.n
            if 0 < gamma <= gamma_min:
                # refining cannot recover selectivity: cut the branch
                report.pruned_branches += 1
                continue
            walk(i + 1, sub, conns + [Connection(f, opt)], n_active + 1)

    walk(0, np.ones(table.n, dtype=bool), [], 0)

    candidates = []
    for mask_key, preds in by_mask.items():
        report.equivalence_merges += len(preds) - 1
        rep = min(preds, key=lambda p: (p.n_active_clauses(), p.canonical()))
        mask = np.unpackbits(np.frombuffer(mask_key, dtype=np.uint8), count=table.n).astype(bool)
        m = int(mask.sum())
        candidates.append(Candidate(rep, m, m / table.n))
    candidates.sort(key=lambda c: c.predicate.canonical())
    return candidates, report


# ---------------------------------------------------------------------------
# scoring


@dataclass(frozen=True)
class Recommendation:
    visualization: Visualization
    distance: float
    epsilon_ref: float
    epsilon_cand: float
    interest: float
    safe: bool
    support: int
    selectivity: float
    pmf: Pmf

    @property
    def uncertainty(self) -> float:
        return self.epsilon_ref + self.epsilon_cand

    def to_json(self) -> dict:
        return {
            "predicate": self.visualization.predicate.to_json(),
            "group_by": self.visualization.group_by,
            "distance": self.distance,
            "epsilon_ref": self.epsilon_ref,
            "epsilon_cand": self.epsilon_cand,
            "uncertainty": self.uncertainty,
            "interest": self.interest,
            "safe": self.safe,
            "support": self.support,
            "selectivity": self.selectivity,
            "pmf": self.pmf.to_json(),
        }


def _sorted_recs(recs: list[Recommendation]) -> list[Recommendation]:
    return sorted(
        recs, key=lambda r: (-r.interest, r.visualization.predicate.canonical())
    )


class _FastCube:
    """Vectorized scorer for the pure-<= discrete search space.

    Builds one contingency cube (group-by x feature values) and cumulative
    sums along the feature axes, so every threshold combination's group-by
    counts come from a single lookup.  Equivalent to the generic path: a
    threshold at a feature's maximum observed value is the sentinel's
    equivalence-class twin and is represented by the sentinel.
    """

    MAX_CELLS = 1 << 24

    @staticmethod
    def applicable(table: Table, reference: Visualization, config: ExplorationConfig) -> bool:
        if config.operators != ("<=",) or config.max_features is not None:
            return False
        cells = 1
        for f in table.feature_names:
            col = table.column(f)
            if np.isnan(col.values).any():
                return False
            if f == reference.group_by:
                continue
            if col.kind not in (FeatureKind.BINARY, FeatureKind.DISCRETE):
                return False
            k = int(np.unique(col.values).size)
            if k > 64:
                return False
            cells *= k
        values, _ = groupby_codes(table, reference.group_by, reference.bucket_count)
        return cells * len(values) <= _FastCube.MAX_CELLS

    def __init__(self, table: Table, reference: Visualization, config: ExplorationConfig):
        self.table = table
        self.config = config
        self.group_by = reference.group_by
        self.feats = _ordered_features(table, reference.group_by, config)
        self.values, gcodes = groupby_codes(table, reference.group_by, reference.bucket_count)
        self.levels = {f: np.unique(table.metric(f)) for f in self.feats}
        shape = [len(self.values)] + [len(self.levels[f]) for f in self.feats]
        idx = gcodes.astype(np.int64)
        for f in self.feats:
            codes = np.searchsorted(self.levels[f], table.metric(f))
            idx = idx * len(self.levels[f]) + codes
        cube = np.bincount(idx, minlength=int(np.prod(shape))).reshape(shape).astype(np.int64)
        for axis in range(1, len(shape)):
            cube = cube.cumsum(axis=axis)
        self.cube = cube

    def candidates(self) -> tuple[list[tuple[Predicate, np.ndarray]], EnumerationReport]:
        report = EnumerationReport()
        out: list[tuple[Predicate, np.ndarray]] = []
        k_gb = len(self.values)
        n = self.table.n
        d = effective_vc_dimension(self.table, self.group_by, self.config)
        gamma_min = min_selectivity_threshold(
            d, self.config.delta, n, self.config.c, self.config.log_base
        )
        # threshold index per feature: 0..k-2 are real thresholds, k-1 means
        # sentinel (every row passes; the k-1'th real threshold is its twin)
        sizes = [len(self.levels[f]) for f in self.feats]
        report.raw_predicates = int(np.prod([s + 1 for s in sizes]))
        report.equivalence_merges = report.raw_predicates - int(np.prod(sizes))

        def walk(fi: int, index: tuple, conns: list[Connection]):
            nonlocal out
            if fi == len(self.feats):
                counts = self.cube[(slice(None),) + index]
                m = int(counts.sum())
                if m == 0:
                    report.tarone_excluded += 1
                    return
                out.append((Predicate(tuple(conns)), counts.astype(float)))
                return
            f = self.feats[fi]
            levels = self.levels[f]
            for t in range(len(levels)):
                sub_index = index + (t,)
                # partial support: sum over group-by and the not-yet-fixed axes
                partial = self.cube[(slice(None),) + sub_index]
                for _ in range(len(self.feats) - fi - 1):
                    partial = partial[..., -1]
                gamma = float(partial.sum()) / n
                if t < len(levels) - 1:
                    if 0 < gamma <= gamma_min:
                        report.pruned_branches += 1
                        continue
                    walk(fi + 1, sub_index, conns + [Connection(f, (Clause(f, "<=", float(levels[t])),))])
                else:
                    # sentinel representative (threshold at max == no constraint)
                    walk(fi + 1, sub_index, conns)

        walk(0, (), [])
        return out, report


def _score(
    reference: Visualization,
    ref_pmf: Pmf,
    cand_pred: Predicate,
    cand_pmf: Pmf,
    d: int,
    n: int,
    config: ExplorationConfig,
) -> Recommendation:
    eps_ref = (
        0.0
        if config.one_sample
        else epsilon_bar(d, config.delta, ref_pmf.support, config.c, config.log_base).value
    )
    eps_cand = epsilon_bar(d, config.delta, cand_pmf.support, config.c, config.log_base).value
    dist = chebyshev_distance(ref_pmf, cand_pmf)
    interest = dist - (eps_ref + eps_cand)
    threshold = max(eps_ref + eps_cand, config.eps_v or 0.0)
    return Recommendation(
        visualization=Visualization(cand_pred, reference.group_by, reference.bucket_count),
        distance=dist,
        epsilon_ref=eps_ref,
        epsilon_cand=eps_cand,
        interest=interest,
        safe=dist > threshold,
        support=cand_pmf.support,
        selectivity=cand_pmf.support / n,
        pmf=cand_pmf,
    )


@dataclass(frozen=True)
class ScoredSpace:
    reference_pmf: Pmf
    recommendations: tuple[Recommendation, ...]  # every candidate, scored
    report: EnumerationReport
    d: int
    gamma_min: float

    @property
    def safe(self) -> tuple[Recommendation, ...]:
        return tuple(r for r in self.recommendations if r.safe)

    @property
    def n_candidates(self) -> int:
        return len(self.recommendations)


def score_candidates(
    reference: Visualization, table: Table, config: ExplorationConfig
) -> ScoredSpace:
    """Score every enumerated candidate against the reference."""
    ref_pmf = estimate_pmf(reference, table)
    d = effective_vc_dimension(table, reference.group_by, config)
    gamma_min = min_selectivity_threshold(d, config.delta, table.n, config.c, config.log_base)
    recs: list[Recommendation] = []
    if _FastCube.applicable(table, reference, config):
        cube = _FastCube(table, reference, config)
        pairs, report = cube.candidates()
        for pred, counts in pairs:
            m = int(counts.sum())
            probs = counts / m
            pmf = Pmf(cube.values, tuple(float(p) for p in probs / probs.sum()), m,
                      tuple(float(c) for c in counts))
            recs.append(_score(reference, ref_pmf, pred, pmf, d, table.n, config))
    else:
        candidates, report = enumerate_candidates(table, reference, config)
        for cand in candidates:
            pmf = estimate_pmf(
                Visualization(cand.predicate, reference.group_by, reference.bucket_count), table
            )
            recs.append(_score(reference, ref_pmf, cand.predicate, pmf, d, table.n, config))
    return ScoredSpace(ref_pmf, tuple(_sorted_recs(recs)), report, d, gamma_min)


def vizrec(
    reference: Visualization, table: Table, config: ExplorationConfig
) -> list[Recommendation]:
    """The safe-recommendation procedure: only candidates whose Chebyshev
    distance exceeds the combined uncertainty (and eps_v, when set) are
    returned, sorted by decreasing interest."""
    return list(score_candidates(reference, table, config).safe)


# ---------------------------------------------------------------------------
# classical-testing baseline


@dataclass(frozen=True)
class BaselineRecommendation:
    visualization: Visualization
    result: stattests.TestResult
    support: int

    def to_json(self) -> dict:
        return {
            "predicate": self.visualization.predicate.to_json(),
            "group_by": self.visualization.group_by,
            "support": self.support,
            **self.result.to_json(),
        }


def baseline_chi2_recommend(
    reference: Visualization, table: Table, config: ExplorationConfig, alpha: float
) -> list[BaselineRecommendation]:
    """Bonferroni-corrected goodness-of-fit baseline over the same candidate
    space (M = candidate count after Tarone exclusion and dedup)."""
    space = score_candidates(reference, table, config)
    m_hyp = space.n_candidates
    alpha_prime = stattests.bonferroni(alpha, m_hyp) if m_hyp else alpha
    out = []
    for rec in space.recommendations:
        try:
            result = stattests.chi_squared_gof(
                space.reference_pmf.probs, rec.pmf.counts, alpha_prime
            )
        except ValueError:
            continue  # zero-probability reference bin with observed mass
        if result.reject:
            out.append(BaselineRecommendation(rec.visualization, result, rec.support))
    out.sort(key=lambda b: (b.result.p_value, b.visualization.predicate.canonical()))
    return out


# ---------------------------------------------------------------------------
# shared serialization (CLI and service must emit identical bytes)


def recommendation_payload(
    reference: Visualization, table: Table, config: ExplorationConfig
) -> dict:
    space = score_candidates(reference, table, config)
    return {
        "reference": {
            "predicate": reference.predicate.to_json(),
            "group_by": reference.group_by,
            "pmf": space.reference_pmf.to_json(),
        },
        "config": config.to_json(),
        "d": space.d,
        "gamma_min": space.gamma_min,
        "n_candidates": space.n_candidates,
        "tarone_excluded": space.report.tarone_excluded,
        "equivalence_merges": space.report.equivalence_merges,
        "recommendations": [r.to_json() for r in space.safe],
    }


def payload_bytes(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, indent=2).encode("utf-8")
