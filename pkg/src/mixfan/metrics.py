"""Per-prediction summary statistics: accuracy, conditional entropy, ROC area."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedStatistic
from .util import average_ranks


@dataclass(frozen=True, eq=False)
class LabeledScore:
    """One prediction against its known class."""

    true_class: int
    posterior: np.ndarray
    predicted: int


@dataclass(frozen=True)
class FoldSummary:
    fold: int
    n: int
    accuracy: float
    ce: float
    selected_r_h: int


@dataclass(frozen=True)
class EvalReport:
    """Pooled evaluation outcome; ``auc`` only for binary class variables."""

    accuracy: float
    ce: float
    auc: float | None
    n: int
    per_fold: tuple[FoldSummary, ...] = ()
    scores: tuple[LabeledScore, ...] = ()


def accuracy(scores: list[LabeledScore]) -> float:
    """Fraction of cases whose predicted class equals the true class."""
    if not scores:
        raise ValueError("accuracy of an empty score list is undefined")
    return sum(s.predicted == s.true_class for s in scores) / len(scores)


def conditional_entropy(scores: list[LabeledScore]) -> float:
    """Mean negative log posterior of the true class, in nats.

    Estimates how far the predicted distribution sits from the generating
    one; minimized when they coincide.
    """
    if not scores:
        raise ValueError("conditional entropy of an empty score list is undefined")
    total = 0.0
    for i, s in enumerate(scores):
        p = s.posterior[s.true_class]
        if p <= 0.0:
            raise ValueError(f"case {i}: zero posterior at the true class (smoothing bug?)")
        total -= math.log(p)
    return total / len(scores)


def roc_auc(scores: list[LabeledScore], positive: int = 1) -> float:
    """Area under the ROC curve for a binary class variable.

    Computed as the normalized rank sum of the positive-class posteriors:
    the probability that a random positive outscores a random negative,
    ties counting one half.
    """
    if not scores:
        raise ValueError("auc of an empty score list is undefined")
    r_c = len(scores[0].posterior)
    if r_c != 2:
        raise ValueError("auc is defined for binary class variables only")
    if positive not in (0, 1):
        raise ValueError("positive class index must be 0 or 1")
    s = np.array([sc.posterior[positive] for sc in scores])
    is_pos = np.array([sc.true_class == positive for sc in scores])
    n_pos = int(is_pos.sum())
    n_neg = len(scores) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedStatistic("auc needs at least one case of each class")
    ranks = average_ranks(s)
    rank_sum = ranks[is_pos].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))
