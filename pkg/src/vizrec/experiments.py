"""Deterministic, seeded synthetic experiments emitting machine-readable
curves (JSON + CSV).

All randomness comes from numpy's PCG64 generator seeded explicitly, so a
re-run with the same parameters is byte-identical.  Output files are named
``<experiment>_seed<seed>.json`` / ``.csv`` under the output directory.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import stattests
from .bounds import chernoff_epsilon, epsilon_bar, min_selectivity_threshold
from .queries import Predicate, Visualization
from .recommend import ExplorationConfig, preprocess, recommendation_payload, score_candidates
from .tables import FeatureKind, Table, from_arrays


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    parameters: dict
    columns: tuple[str, ...]
    series: tuple[tuple, ...]
    summary: dict

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "parameters": self.parameters,
            "columns": list(self.columns),
            "series": [list(row) for row in self.series],
            "summary": self.summary,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.series)
        return buf.getvalue()

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir) / self.name
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{self.name}_seed{self.parameters.get('seed', 0)}"
        jpath = out / f"{stem}.json"
        cpath = out / f"{stem}.csv"
        jpath.write_text(json.dumps(self.to_json(), sort_keys=True, indent=2), encoding="utf-8")
        cpath.write_text(self.to_csv(), encoding="utf-8")
        return jpath, cpath


def gen_uniform_dataset(n: int = 100_000, seed: int = 0) -> Table:
    """Null dataset: group-by X0 uniform on {1..4}, features X1-X3 uniform
    on {1..9}; no structure, so nothing should ever be recommended."""
    rng = np.random.default_rng(seed)
    cols = {"X0": (FeatureKind.DISCRETE, rng.integers(1, 5, size=n))}
    for i in (1, 2, 3):
        cols[f"X{i}"] = (FeatureKind.DISCRETE, rng.integers(1, 10, size=n))
    return from_arrays(f"uniform_{n}_{seed}", cols)


def planted_dataset(n: int = 10_000, seed: int = 0) -> Table:
    """Dataset with one planted signal: a binary flag deterministically
    flips the group-by value, so the flag<=0 slice differs from the full
    table by Chebyshev distance exactly 0.5 at 50% selectivity."""
    rng = np.random.default_rng(seed)
    flag = np.zeros(n)
    flag[n // 2 :] = 1.0
    rng.shuffle(flag)
    x0 = 1.0 + flag
    noise = rng.integers(1, 6, size=n).astype(float)
    return from_arrays(
        f"planted_{n}_{seed}",
        {
            "X0": (FeatureKind.DISCRETE, x0),
            "flag": (FeatureKind.BINARY, flag),
            "X2": (FeatureKind.DISCRETE, noise),
        },
    )


def _epsilon_curve(d, delta, n, c, log_base, points=64):
    gammas = np.linspace(1.0 / points, 1.0, points)
    return [
        (float(g), epsilon_bar(d, delta, max(1, int(round(g * n))), c, log_base).clamped)
        for g in gammas
    ]


def run_random_data_experiment(
    n: int = 100_000,
    seed: int = 0,
    d: int = 4,
    delta: float = 0.05,
    c: float = 0.5,
    log_base: float = 2.0,
) -> ExperimentResult:
    """Score the full simple-predicate space on the null dataset: per
    candidate (selectivity, distance, interest) plus the threshold curve."""
    table = gen_uniform_dataset(n, seed)
    config = ExplorationConfig(delta=delta, c=c, log_base=log_base, vc_dimension=d)
    reference = Visualization(Predicate(), "X0", bucket_count=10)
    space = score_candidates(reference, table, config)
    rows = [
        ("candidate", r.selectivity, r.distance, r.interest,
         r.epsilon_ref + r.epsilon_cand, int(r.safe))
        for r in space.recommendations
    ]
    for g, e in _epsilon_curve(d, delta, n, c, log_base):
        rows.append(("threshold", g, e, "", "", ""))
    return ExperimentResult(
        name="random-data",
        parameters={"n": n, "seed": seed, "d": d, "delta": delta, "c": c,
                    "log_base": log_base, "prng": "numpy PCG64"},
        columns=("kind", "selectivity", "distance", "interest", "uncertainty", "safe"),
        series=tuple(rows),
        summary={
            "n_candidates": space.n_candidates,
            "n_recommended": len(space.safe),
            "eps_min": epsilon_bar(d, delta, n, c, log_base).value,
            "gamma_min": space.gamma_min,
        },
    )


def load_chi2_vs_vc_fixture() -> dict:
    with resources.files("vizrec.fixtures").joinpath("chi2_vs_vc.json").open() as f:
        return json.load(f)


def run_chi2_vs_vc_example(
    m: int = 1200,
    n: int = 10_000,
    d: int = 10,
    delta: float = 0.05,
    alpha: float = 0.05,
    c: float = 0.5,
    log_base: float = 2.0,
    fixture: dict | None = None,
    seed: int = 0,  # deterministic; recorded for uniform file naming
) -> ExperimentResult:
    """Classical test vs the uniform-convergence verdict on the committed
    close-pair fixture: the test rejects, the distance criterion does not."""
    fx = fixture or load_chi2_vs_vc_fixture()
    p = fx["reference_pmf"]
    q = fx["candidate_pmf"]
    counts = [qk * m for qk in q]
    result = stattests.chi_squared_gof(p, counts, alpha)
    max_m_reject = math.floor(alpha / result.p_value)
    gap = max(abs(a - b) for a, b in zip(p, q))
    eps_ref = epsilon_bar(d, delta, n, c, log_base).value
    eps_cand = epsilon_bar(d, delta, m, c, log_base).value
    required = eps_ref + eps_cand
    rows = [(k, pk, qk) for k, (pk, qk) in enumerate(zip(p, q))]
    return ExperimentResult(
        name="chi2-vs-vc",
        parameters={"m": m, "n": n, "d": d, "delta": delta, "alpha": alpha,
                    "c": c, "log_base": log_base, "seed": seed},
        columns=("bin", "reference_p", "candidate_p"),
        series=tuple(rows),
        summary={
            "chi2_statistic": result.statistic,
            "chi2_p_value": result.p_value,
            "max_bonferroni_m_rejecting": max_m_reject,
            "max_gap": gap,
            "epsilon_required": required,
            "vc_safe": gap > required,
        },
    )


def run_min_samples_curve(
    k_max: int = 100,
    distances: tuple[float, ...] = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0),
    alpha: float = 5e-8,
    seed: int = 0,  # deterministic; recorded for uniform file naming
) -> ExperimentResult:
    """Surface (K, chi-squared distance) -> minimum rejecting support."""
    rows = []
    for k in range(2, k_max + 1):
        for dx in distances:
            rows.append((k, dx, stattests.min_samples_chi2(dx, k, alpha)))
    return ExperimentResult(
        name="min-samples-chi2",
        parameters={"k_max": k_max, "distances": list(distances), "alpha": alpha, "seed": seed},
        columns=("k", "d_chi2", "n_min"),
        series=tuple(rows),
        summary={"alpha": alpha},
    )


def _binomial_pmf(trials: int, prob: float) -> np.ndarray:
    ks = np.arange(trials + 1)
    return np.array(
        [math.comb(trials, int(k)) * prob**k * (1 - prob) ** (trials - k) for k in ks]
    )


def run_chernoff_vs_vc(
    n_max: int = 100_000,
    seed: int = 0,
    d: int = 5,
    delta: float = 0.05,
    k_list: tuple[int, ...] = (1, 10, 100, 1000),
    c: float = 0.5,
    log_base: float = 2.0,
) -> ExperimentResult:
    """Observed pmf-estimation error for Bin(10, 0.3) draws vs the
    single-bar Chernoff bounds (K simultaneous bars) and the
    uniform-convergence bound at dimensions 1 and d."""
    rng = np.random.default_rng(seed)
    truth = _binomial_pmf(10, 0.3)
    draws = rng.binomial(10, 0.3, size=n_max)
    onehot = np.zeros((11, n_max))
    onehot[draws, np.arange(n_max)] = 1.0
    cum = onehot.cumsum(axis=1)
    ms = np.unique(np.geomspace(10, n_max, num=40).astype(int))
    rows = []
    for m in ms:
        phat = cum[:, m - 1] / m
        observed = float(np.abs(phat - truth).max())
        row = [int(m), observed,
               epsilon_bar(1, delta, int(m), c, log_base).clamped,
               epsilon_bar(d, delta, int(m), c, log_base).clamped]
        for k in k_list:
            row.append(min(1.0, chernoff_epsilon(int(m), delta, k)))
        rows.append(tuple(row))
    columns = ["m", "observed_error", "vc_d1", f"vc_d{d}"] + [f"chernoff_k{k}" for k in k_list]
    return ExperimentResult(
        name="chernoff-vs-vc",
        parameters={"n_max": n_max, "seed": seed, "d": d, "delta": delta,
                    "k_list": list(k_list), "c": c, "log_base": log_base,
                    "prng": "numpy PCG64"},
        columns=tuple(columns),
        series=tuple(rows),
        summary={"trials": 10, "prob": 0.3},
    )


def restriction_dataset(n: int = 2000, seed: int = 0) -> Table:
    """Planted shift padded with junk columns (a constant and a running
    identifier).  Deterministic: rows are interleaved by systematic sampling
    so every identifier prefix stays stratified and the junk columns cannot
    manufacture discoveries -- they only inflate the class dimension.  The
    planted distance (0.103) sits between the safety thresholds of the
    reduced and the unreduced class at the default size."""
    if n % 2000:
        raise ValueError("n must be a multiple of 2000")
    scale = n // 2000
    cells = [(0, 1, 500 * scale), (0, 2, 500 * scale),
             (1, 1, 294 * scale), (1, 2, 706 * scale)]
    keys, flags, x0s, x2s = [], [], [], []
    for flag_v, x0_v, count in cells:
        keys.append((np.arange(count) + 0.5) / count)
        flags.append(np.full(count, flag_v))
        x0s.append(np.full(count, x0_v))
        x2s.append(np.arange(count) % 5 + 1)
    order = np.argsort(np.concatenate(keys), kind="stable")
    cols = {
        "flag": (FeatureKind.BINARY, np.concatenate(flags)[order]),
        "X0": (FeatureKind.DISCRETE, np.concatenate(x0s)[order]),
        "X2": (FeatureKind.DISCRETE, np.concatenate(x2s)[order]),
        "const": (FeatureKind.BINARY, np.zeros(n)),
        "row_id": (FeatureKind.CONTINUOUS, np.arange(n, dtype=float)),
    }
    return from_arrays(f"restriction_{n}_{seed}", cols)


def run_search_space_restriction(
    table: Table | None = None,
    seed: int = 0,
    delta: float = 0.05,
    c: float = 0.5,
    log_base: float = 2.0,
) -> ExperimentResult:
    """Recommendation counts and threshold curves before vs after dropping
    constant/identifier columns (the derived class dimension shrinks)."""
    table = table if table is not None else restriction_dataset(seed=seed)
    config = ExplorationConfig(delta=delta, c=c, log_base=log_base)
    reference = Visualization(Predicate(), "X0", bucket_count=10)
    reduced, report = preprocess(table, config)
    if "X0" not in reduced.feature_names:
        raise ValueError("group-by feature dropped by preprocessing")
    before = score_candidates(reference, table, config)
    after = score_candidates(reference, reduced, config)
    rows = []
    for g, e in _epsilon_curve(before.d, delta, table.n, c, log_base):
        rows.append(("before", g, e))
    for g, e in _epsilon_curve(after.d, delta, reduced.n, c, log_base):
        rows.append(("after", g, e))
    return ExperimentResult(
        name="search-space-restriction",
        parameters={"seed": seed, "delta": delta, "c": c, "log_base": log_base,
                    "n": table.n, "prng": "numpy PCG64"},
        columns=("stage", "selectivity", "epsilon"),
        series=tuple(rows),
        summary={
            "d_before": before.d,
            "d_after": after.d,
            "recommended_before": len(before.safe),
            "recommended_after": len(after.safe),
            "dropped": [d_.to_json() for d_ in report.dropped],
        },
    )


EXPERIMENTS = {
    "random-data": run_random_data_experiment,
    "chi2-vs-vc": run_chi2_vs_vc_example,
    "min-samples-chi2": run_min_samples_curve,
    "chernoff-vs-vc": run_chernoff_vs_vc,
    "search-space-restriction": run_search_space_restriction,
}
