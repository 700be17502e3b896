"""Figure rendering for the CLI report paths.

Every function writes one PNG next to the delimited output and returns the
path.  The Agg backend is forced so rendering works in batch environments.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import EvalReport
from .protocol import ComparisonReport, ExperimentCell
from .selection import SearchResult

DPI = 150


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def render_score_curve(sr: SearchResult, path: str | Path) -> Path:
    """Score value against candidate component count, winner marked."""
    ok = [c for c in sr.candidates if c.report is not None]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot([c.r_h for c in ok], [c.report.value for c in ok], "o-", lw=1.2)
    sel = next(c for c in ok if c.r_h == sr.selected_r_h)
    ax.plot([sel.r_h], [sel.report.value], "r*", ms=14, label=f"selected r_h={sel.r_h}")
    ax.set_xlabel("components (r_h)")
    ax.set_ylabel(f"{sr.score_kind.value} score")
    ax.grid(alpha=0.3)
    ax.legend()
    return _finish(fig, path)


def render_fold_metrics(rep: EvalReport, path: str | Path) -> Path:
    """Per-fold accuracy and conditional entropy bars with pooled lines."""
    folds = rep.per_fold
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
    xs = [f.fold for f in folds]
    axes[0].bar(xs, [f.accuracy for f in folds], color="#4878d0")
    axes[0].axhline(rep.accuracy, color="k", ls="--", lw=1, label=f"pooled {rep.accuracy:.3f}")
    axes[0].set_xlabel("fold")
    axes[0].set_ylabel("accuracy")
    axes[0].legend()
    axes[1].bar(xs, [f.ce for f in folds], color="#ee854a")
    axes[1].axhline(rep.ce, color="k", ls="--", lw=1, label=f"pooled {rep.ce:.3f}")
    axes[1].set_xlabel("fold")
    axes[1].set_ylabel("conditional entropy (nats)")
    axes[1].legend()
    return _finish(fig, path)


def render_roc(scores, positive: int, path: str | Path) -> Path:
    """ROC curve traced by sweeping the positive-class posterior threshold."""
    s = np.array([sc.posterior[positive] for sc in scores])
    pos = np.array([sc.true_class == positive for sc in scores])
    order = np.argsort(-s, kind="mergesort")
    tp = np.concatenate([[0], np.cumsum(pos[order])])
    fp = np.concatenate([[0], np.cumsum(~pos[order])])
    tpr = tp / max(tp[-1], 1)
    fpr = fp / max(fp[-1], 1)
    fig, ax = plt.subplots(figsize=(4.2, 4))
    ax.plot(fpr, tpr, lw=1.4)
    ax.plot([0, 1], [0, 1], "k--", lw=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def render_experiment(cells: tuple[ExperimentCell, ...], path: str | Path) -> Path:
    """Accuracy against |structural difference|, one marker per train size."""
    ok = [c for c in cells if c.status == "ok"]
    fig, ax = plt.subplots(figsize=(5, 3.8))
    rng = np.random.default_rng(0)  # fixed jitter so reruns render identically
    for size in sorted({c.train_size for c in ok}):
        sub = [c for c in ok if c.train_size == size]
        x = np.array([abs(c.structural_diff) for c in sub]) + rng.uniform(-0.08, 0.08, len(sub))
        ax.plot(x, [c.accuracy for c in sub], "o", ms=5, alpha=0.7, label=f"n={size}")
    ax.set_xlabel("|structural difference|")
    ax.set_ylabel("test accuracy")
    ax.grid(alpha=0.3)
    ax.legend()
    return _finish(fig, path)


def render_accuracy_scatter(rep: ComparisonReport, label_a: str, label_b: str, path: str | Path) -> Path:
    """Dataset-wise accuracy of model a against model b with the diagonal."""
    fig, ax = plt.subplots(figsize=(4.4, 4.2))
    a = [r.acc_a for r in rep.rows]
    b = [r.acc_b for r in rep.rows]
    lo = min(a + b) - 0.03
    hi = max(a + b) + 0.03
    ax.plot([lo, hi], [lo, hi], "k--", lw=0.8)
    ax.plot(b, a, "o", ms=6, alpha=0.8)
    ax.set_xlabel(f"{label_b} accuracy")
    ax.set_ylabel(f"{label_a} accuracy")
    ax.set_xlim(lo, hi)
    ax.set_ylim(lo, hi)
    ax.grid(alpha=0.3)
    return _finish(fig, path)
