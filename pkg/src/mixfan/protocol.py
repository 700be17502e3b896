"""Evaluation protocols: stratified CV, gold-standard sampling experiments,
and across-dataset model comparison.

Every protocol derives all of its randomness from one master seed, so reruns
with identical inputs reproduce identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, stratified_folds
from .discretize import apply_discretization, discretize_all
from .em import EmConfig
from .errors import UndefinedStatistic
from .hypotests import TestResult, mcnemar, paired_t, signed_rank, spearman_rho
from .metrics import EvalReport, FoldSummary, LabeledScore, accuracy, conditional_entropy, roc_auc
from .models import Classifier, ModelKind
from .selection import ScoreKind, select_components, structural_difference
from .util import derive_seed

MIN_CORRELATION_ROWS = 5


def _pooled_report(
    scores: list[LabeledScore], per_fold: tuple[FoldSummary, ...] = ()
) -> EvalReport:
    try:
        auc = roc_auc(scores) if len(scores[0].posterior) == 2 else None
    except UndefinedStatistic:
        auc = None
    return EvalReport(
        accuracy=accuracy(scores),
        ce=conditional_entropy(scores),
        auc=auc,
        n=len(scores),
        per_fold=per_fold,
        scores=tuple(scores),
    )


def labeled_scores(model: Classifier, test: Dataset) -> list[LabeledScore]:
    """Predict every test case; requires observed class values."""
    y = test.class_column()
    if np.any(np.isnan(y)):
        raise ValueError("evaluation requires observed class values")
    post, pred, _ = model.predict_dataset(test)
    return [
        LabeledScore(true_class=int(y[i]), posterior=post[i], predicted=int(pred[i]))
        for i in range(test.n)
    ]


def evaluate_holdout(model: Classifier, test: Dataset) -> EvalReport:
    """Score a fitted model on held-out labeled data."""
    return _pooled_report(labeled_scores(model, test))


def cross_validate(
    ds: Dataset,
    kind: ModelKind,
    score_kind: ScoreKind,
    k: int,
    seed: int,
    cfg: EmConfig | None = None,
    r_max: int | None = None,
    discretize: bool = False,
) -> EvalReport:
    """Stratified k-fold evaluation with all fitting done inside each fold.

    Component selection, and discretization when requested, see only the
    training portion of each fold; cut points fitted there are applied to the
    held-out portion.  Accuracy, conditional entropy, and (for binary
    classes) AUC are pooled over all held-out predictions; a per-fold
    breakdown is retained.  ``EvalReport.scores`` is in original case order.
    """
    cfg = cfg if cfg is not None else EmConfig()
    plan = stratified_folds(ds, k, seed)
    all_scores: list[LabeledScore | None] = [None] * ds.n
    folds: list[FoldSummary] = []
    for f in range(k):
        train_idx = plan.train_indices(f)
        test_idx = plan.fold_indices(f)
        train = ds.subset(train_idx)
        test = ds.subset(test_idx)
        if discretize:
            dmap = discretize_all(train)
            train = apply_discretization(train, dmap)
            test = apply_discretization(test, dmap)
        cfg_f = replace(cfg, seed=derive_seed(seed, f))
        sr = select_components(train, kind, score_kind, r_max=r_max, cfg=cfg_f)
        fold_scores = labeled_scores(sr.model, test)
        for i, s in zip(test_idx, fold_scores):
            all_scores[i] = s
        folds.append(
            FoldSummary(
                fold=f,
                n=test.n,
                accuracy=accuracy(fold_scores),
                ce=conditional_entropy(fold_scores),
                selected_r_h=sr.selected_r_h,
            )
        )
    assert all(s is not None for s in all_scores)
    return _pooled_report(list(all_scores), tuple(folds))


# ----------------------------------------------------------- gold-standard runs


@dataclass(frozen=True)
class ExperimentCell:
    """One (train size, replication) outcome of a gold-standard experiment."""

    train_size: int
    replication: int
    seed: int
    status: str
    true_r_h: int
    selected_r_h: int | None
    structural_diff: int | None
    accuracy: float | None
    auc: float | None
    ce: float | None


def gs_experiment(
    gs_model: Classifier,
    train_sizes: list[int] = (200, 1000, 5000),
    replications: int = 10,
    score_kind: ScoreKind = ScoreKind.ICL,
    seed: int = 0,
    test_size: int = 2000,
    r_max: int | None = None,
    cfg: EmConfig | None = None,
) -> tuple[ExperimentCell, ...]:
    """Sample train/test pairs from a known model, select-and-fit, and score.

    For every train size, ``replications`` independent pairs are drawn; the
    test size stays fixed across train sizes.  Fit or selection failures are
    recorded in the cell's status rather than aborting the experiment.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    cfg = cfg if cfg is not None else EmConfig()
    cells: list[ExperimentCell] = []
    for si, size in enumerate(train_sizes):
        for rep in range(replications):
            cell_seed = derive_seed(seed, si, rep)
            train = gs_model.sample(size, derive_seed(cell_seed, 1))
            test = gs_model.sample(test_size, derive_seed(cell_seed, 2))
            try:
                sr = select_components(
                    train,
                    gs_model.kind,
                    score_kind,
                    r_max=r_max,
                    cfg=replace(cfg, seed=derive_seed(cell_seed, 3)),
                )
                report = evaluate_holdout(sr.model, test)
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                cells.append(
                    ExperimentCell(
                        train_size=size,
                        replication=rep,
                        seed=cell_seed,
                        status=f"error: {exc}",
                        true_r_h=gs_model.r_h,
                        selected_r_h=None,
                        structural_diff=None,
                        accuracy=None,
                        auc=None,
                        ce=None,
                    )
                )
                continue
            cells.append(
                ExperimentCell(
                    train_size=size,
                    replication=rep,
                    seed=cell_seed,
                    status="ok",
                    true_r_h=gs_model.r_h,
                    selected_r_h=sr.selected_r_h,
                    structural_diff=structural_difference(sr.selected_r_h, gs_model.r_h),
                    accuracy=report.accuracy,
                    auc=report.auc,
                    ce=report.ce,
                )
            )
    return tuple(cells)


def experiment_correlation(cells: tuple[ExperimentCell, ...]) -> TestResult | None:
    """Rank correlation of |structural difference| against accuracy.

    Returns None (correlation skipped) when fewer than five cells succeeded
    or either column is constant.
    """
    ok = [c for c in cells if c.status == "ok"]
    if len(ok) < MIN_CORRELATION_ROWS:
        return None
    try:
        return spearman_rho([abs(c.structural_diff) for c in ok], [c.accuracy for c in ok])
    except UndefinedStatistic:
        return None


# ----------------------------------------------------- across-dataset comparison


@dataclass(frozen=True)
class DbComparisonRow:
    """One dataset's paired CV outcome for two model configurations."""

    name: str
    n: int
    acc_a: float
    acc_b: float
    ce_a: float
    ce_b: float
    mcnemar_z: float
    mcnemar_p: float


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[DbComparisonRow, ...]
    accuracy_magnitude: TestResult
    accuracy_significance: TestResult
    ce_comparison: TestResult


def compare_on_datasets(
    named_datasets: list[tuple[str, Dataset]],
    kind_a: ModelKind,
    kind_b: ModelKind,
    score_kind: ScoreKind,
    k: int,
    seed: int,
    cfg: EmConfig | None = None,
    r_max: int | None = None,
    discretize: bool = False,
) -> ComparisonReport:
    """Paired CV of two model kinds across several datasets.

    Both models see identical folds per dataset, so per-case correctness
    pairs feed an exact per-dataset test whose signed z-statistics, together
    with the per-dataset accuracy differences, drive the two across-dataset
    signed-rank tests (difference magnitude and difference significance).
    Calibration is compared by a paired t-test on conditional entropies.
    """
    rows: list[DbComparisonRow] = []
    for name, ds in named_datasets:
        rep_a = cross_validate(ds, kind_a, score_kind, k, seed, cfg=cfg, r_max=r_max, discretize=discretize)
        rep_b = cross_validate(ds, kind_b, score_kind, k, seed, cfg=cfg, r_max=r_max, discretize=discretize)
        pairs = [
            (sa.predicted == sa.true_class, sb.predicted == sb.true_class)
            for sa, sb in zip(rep_a.scores, rep_b.scores)
        ]
        mc = mcnemar(pairs)
        rows.append(
            DbComparisonRow(
                name=name,
                n=ds.n,
                acc_a=rep_a.accuracy,
                acc_b=rep_b.accuracy,
                ce_a=rep_a.ce,
                ce_b=rep_b.ce,
                mcnemar_z=mc.statistic,
                mcnemar_p=mc.p_value,
            )
        )
    return ComparisonReport(
        rows=tuple(rows),
        accuracy_magnitude=signed_rank([r.acc_a - r.acc_b for r in rows]),
        accuracy_significance=signed_rank([r.mcnemar_z for r in rows]),
        ce_comparison=paired_t([r.ce_a - r.ce_b for r in rows]),
    )
