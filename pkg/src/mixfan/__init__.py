"""Bayesian network classifiers over a hidden mixture variable.

Three model families (naive Bayes, finite mixture, and mixture-augmented
naive Bayes) with soft/hard assignment fitting, penalized-likelihood
selection of the hidden cardinality, and a cross-validated evaluation
protocol with significance tests.
"""

from .cpds import (
    DiscreteStats,
    GaussianCPD,
    GaussianStats,
    MultinomialCPD,
    SuffStats,
    count_stats,
    map_gaussian,
    map_multinomial,
)
from .data import (
    Dataset,
    FoldPlan,
    Schema,
    VariableDecl,
    load_csv,
    load_schema,
    save_csv,
    save_schema,
    stratified_folds,
)
from .discretize import (
    DiscretizationMap,
    apply_discretization,
    discretize_all,
    discretize_supervised,
    load_map,
    save_map,
)
from .em import (
    EmConfig,
    EmMode,
    FitReport,
    cem_stats,
    expected_stats,
    fit_em,
    params_from_stats,
    stats_from_responsibilities,
)
from .errors import FitError, MixfanError, ParseError, SelectionError, UndefinedStatistic
from .hypotests import TestResult, mcnemar, paired_t, signed_rank, spearman_rho
from .metrics import EvalReport, LabeledScore, accuracy, conditional_entropy, roc_auc
from .models import Classifier, ModelKind, Prediction, Structure
from .protocol import (
    ComparisonReport,
    ExperimentCell,
    compare_on_datasets,
    cross_validate,
    evaluate_holdout,
    experiment_correlation,
    gs_experiment,
)
from .selection import (
    ScoreKind,
    ScoreReport,
    SearchResult,
    param_count,
    score,
    select_components,
    structural_difference,
)

__version__ = "0.1.0"

__all__ = [
    "Classifier",
    "ComparisonReport",
    "Dataset",
    "DiscretizationMap",
    "DiscreteStats",
    "EmConfig",
    "EmMode",
    "EvalReport",
    "ExperimentCell",
    "FitError",
    "FitReport",
    "FoldPlan",
    "GaussianCPD",
    "GaussianStats",
    "LabeledScore",
    "MixfanError",
    "ModelKind",
    "MultinomialCPD",
    "ParseError",
    "Prediction",
    "Schema",
    "ScoreKind",
    "ScoreReport",
    "SearchResult",
    "SelectionError",
    "Structure",
    "SuffStats",
    "TestResult",
    "UndefinedStatistic",
    "VariableDecl",
    "accuracy",
    "apply_discretization",
    "cem_stats",
    "compare_on_datasets",
    "conditional_entropy",
    "count_stats",
    "cross_validate",
    "discretize_all",
    "discretize_supervised",
    "evaluate_holdout",
    "expected_stats",
    "experiment_correlation",
    "fit_em",
    "gs_experiment",
    "load_csv",
    "load_map",
    "load_schema",
    "map_gaussian",
    "map_multinomial",
    "mcnemar",
    "paired_t",
    "param_count",
    "params_from_stats",
    "roc_auc",
    "save_csv",
    "save_map",
    "save_schema",
    "score",
    "select_components",
    "signed_rank",
    "spearman_rho",
    "stats_from_responsibilities",
    "stratified_folds",
    "structural_difference",
]
