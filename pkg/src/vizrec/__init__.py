"""Safe bar-chart recommendation: uniform-convergence safety criterion,
classical-test baselines, candidate enumeration, experiments, CLI, service."""

from .bounds import (
    BoundConfig,
    EpsilonBar,
    FeatureComplexity,
    IntervalSlots,
    QueryClassSpec,
    chernoff_epsilon,
    chernoff_tail,
    epsilon_bar,
    max_vc_for_requirements,
    min_selectivity_threshold,
    reduce_intervals,
    shattering_oracle,
    vc_dimension_bound,
)
from .queries import (
    Clause,
    Connection,
    EmptySupportError,
    MisalignedSupportError,
    Pmf,
    Predicate,
    Visualization,
    estimate_pmf,
    evaluate_predicate,
    selectivity,
)
from .recommend import (
    BaselineRecommendation,
    ExplorationConfig,
    Recommendation,
    ScoredSpace,
    baseline_chi2_recommend,
    chebyshev_distance,
    effective_vc_dimension,
    preprocess,
    recommendation_payload,
    score_candidates,
    vizrec,
)
from .stattests import (
    TestResult,
    bonferroni,
    chi_squared_gof,
    min_samples_chi2,
    modified_chi2_test,
    noncentral_chi2_cdf,
)
from .tables import (
    Column,
    FeatureKind,
    MalformedCsvError,
    Table,
    UnknownFeatureError,
    load_table,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
