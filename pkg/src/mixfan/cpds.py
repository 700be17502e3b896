"""Conditional distributions, sufficient statistics, and MAP estimators.

A conditional distribution table is indexed by the flattened parent
configuration j (0..q-1).  Multinomial children carry a Dirichlet
hyperparameter table alongside the probabilities; Gaussian children carry a
per-configuration mean and variance.

The point estimators are

    theta[j, k] = (alpha[j, k] + N[j, k]) / (alpha[j].sum() + N[j].sum())

for multinomial children, and for Gaussian children the weighted mean
together with

    var[j] = (w - 1) / (w * (w - 3)) * sum_l r_l * (x_l - mean[j])**2

where ``w`` is the (possibly fractional) weight of configuration j and
``r_l`` the per-case responsibility.  The variance factor requires w > 3;
smaller cells fall back to the variable's pooled mean and variance, and
every variance is floored at 1e-6 times the variable's pooled sample
variance to keep single-point components from collapsing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

VARIANCE_FLOOR_FRACTION = 1e-6
ABSOLUTE_VARIANCE_FLOOR = 1e-12  # backstop when the pooled variance is itself zero
GAUSSIAN_MIN_WEIGHT = 3.0  # variance factor (w-1)/(w(w-3)) needs w > 3

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MultinomialCPD:
    """Conditional probability table theta (q, r) with Dirichlet table alpha."""

    theta: np.ndarray
    alpha: np.ndarray

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        if theta.ndim != 2 or theta.shape != alpha.shape:
            raise ValueError("theta and alpha must be matching (q, r) tables")
        if np.any(alpha <= 0):
            raise ValueError("alpha entries must be positive")
        if np.any(theta <= 0):
            raise ValueError("theta entries must be positive (alpha > 0 guarantees this)")
        if np.max(np.abs(theta.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError("theta rows must sum to 1")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "alpha", alpha)
        theta.setflags(write=False)
        alpha.setflags(write=False)

    @property
    def q(self) -> int:
        return self.theta.shape[0]

    @property
    def r(self) -> int:
        return self.theta.shape[1]

    @property
    def log_theta(self) -> np.ndarray:
        return np.log(self.theta)


@dataclass(frozen=True, eq=False)
class GaussianCPD:
    """Per-configuration mean and variance for a continuous child."""

    mean: np.ndarray
    var: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        var = np.asarray(self.var, dtype=float)
        if mean.ndim != 1 or mean.shape != var.shape:
            raise ValueError("mean and var must be matching (q,) vectors")
        if np.any(~np.isfinite(mean)) or np.any(~np.isfinite(var)):
            raise ValueError("mean and var must be finite")
        if np.any(var <= 0):
            raise ValueError("variances must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "var", var)
        mean.setflags(write=False)
        var.setflags(write=False)

    @property
    def q(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True, eq=False)
class DiscreteStats:
    """Counts N[j, k] for a discrete child; fractional under soft assignment."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=float)
        if counts.ndim != 2:
            raise ValueError("counts must be (q, r)")
        if np.any(counts < -1e-9):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def total(self) -> float:
        return float(self.counts.sum())


@dataclass(frozen=True, eq=False)
class GaussianStats:
    """Per-configuration weight, weighted sum, and weighted sum of squares."""

    weight: np.ndarray
    wsum: np.ndarray
    wsumsq: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weight, dtype=float)
        s = np.asarray(self.wsum, dtype=float)
        ss = np.asarray(self.wsumsq, dtype=float)
        if not (w.shape == s.shape == ss.shape) or w.ndim != 1:
            raise ValueError("weight/wsum/wsumsq must be matching (q,) vectors")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "wsum", s)
        object.__setattr__(self, "wsumsq", ss)

    @property
    def total(self) -> float:
        return float(self.weight.sum())


ChildStats = DiscreteStats | GaussianStats


@dataclass(frozen=True, eq=False)
class SuffStats:
    """Sufficient statistics for every local distribution of one model.

    ``mixing`` is None for models without a hidden variable; ``features``
    follows the schema's feature order.
    """

    class_stats: DiscreteStats
    mixing: DiscreteStats | None
    features: tuple[ChildStats, ...]
    n_cases: float

    def all_children(self) -> list[ChildStats]:
        out: list[ChildStats] = [self.class_stats]
        if self.mixing is not None:
            out.append(self.mixing)
        out.extend(self.features)
        return out


def _config_index(ds: Dataset, parents: list[int]) -> tuple[np.ndarray, int]:
    """Mixed-radix flattening of observed parent columns, first parent slowest."""
    n = ds.n
    idx = np.zeros(n, dtype=np.int64)
    q = 1
    for p in parents:
        decl = ds.schema.variables[p]
        if not decl.is_discrete:
            raise ValueError(f"parent {decl.name!r} must be discrete")
        col = ds.column(p)
        if np.any(np.isnan(col)):
            raise ValueError(
                f"parent {decl.name!r} has missing values; use expected_stats for soft counts"
            )
        idx = idx * decl.arity + col.astype(np.int64)
        q *= decl.arity
    return idx, q


def count_stats(ds: Dataset, child: int, parents: list[int]) -> ChildStats:
    """Hard-count sufficient statistics of one fully observed child.

    Discrete children yield ``DiscreteStats``; continuous children accumulate
    weight, sum, and sum of squares per parent configuration.
    """
    decl = ds.schema.variables[child]
    col = ds.column(child)
    if np.any(np.isnan(col)):
        raise ValueError(
            f"child {decl.name!r} has missing values; use expected_stats for soft counts"
        )
    j, q = _config_index(ds, parents)
    if decl.is_discrete:
        x = col.astype(np.int64)
        flat = np.bincount(j * decl.arity + x, minlength=q * decl.arity)
        return DiscreteStats(flat.reshape(q, decl.arity).astype(float))
    weight = np.bincount(j, minlength=q).astype(float)
    wsum = np.bincount(j, weights=col, minlength=q)
    wsumsq = np.bincount(j, weights=col * col, minlength=q)
    return GaussianStats(weight, wsum, wsumsq)


def map_multinomial(stats: DiscreteStats, alpha: np.ndarray | float = 1.0) -> MultinomialCPD:
    """Smoothed point estimate (alpha + N) / (alpha_row_sum + N_row_sum).

    Defined for empty configurations too: with no data the estimate is the
    normalized hyperparameter row.
    """
    counts = stats.counts
    if np.isscalar(alpha):
        alpha = np.full_like(counts, float(alpha))
    else:
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != counts.shape:
            raise ValueError("alpha table shape must match the counts")
    if np.any(alpha <= 0):
        raise ValueError("alpha entries must be positive")
    numer = alpha + counts
    theta = numer / numer.sum(axis=1, keepdims=True)
    return MultinomialCPD(theta=theta, alpha=alpha)


def map_gaussian(stats: GaussianStats) -> tuple[GaussianCPD, tuple[str, ...]]:
    """Per-configuration mean/variance estimate with pooled fallbacks.

    Returns the CPD plus notes naming each configuration that fell back to
    the pooled estimate (weight <= 3, where the variance factor is undefined
    or non-positive).
    """
    w = stats.weight
    total_w = stats.total
    total_s = float(stats.wsum.sum())
    total_ss = float(stats.wsumsq.sum())

    # Pooled moments over all configurations (= plain data moments, since
    # per-case responsibilities sum to one).
    if total_w <= 0:
        raise ValueError("cannot estimate a Gaussian child from zero total weight")
    pooled_mean = total_s / total_w
    pooled_centered = max(total_ss - total_w * pooled_mean**2, 0.0)
    if total_w > GAUSSIAN_MIN_WEIGHT:
        pooled_var = (total_w - 1.0) / (total_w * (total_w - GAUSSIAN_MIN_WEIGHT)) * pooled_centered
    elif total_w > 1:
        pooled_var = pooled_centered / (total_w - 1.0)
    else:
        pooled_var = 0.0
    sample_var = pooled_centered / (total_w - 1.0) if total_w > 1 else 0.0
    floor = max(VARIANCE_FLOOR_FRACTION * sample_var, ABSOLUTE_VARIANCE_FLOOR)
    pooled_var = max(pooled_var, floor)

    q = len(w)
    mean = np.full(q, pooled_mean)
    var = np.full(q, pooled_var)
    notes = []
    ok = w > GAUSSIAN_MIN_WEIGHT
    if np.any(ok):
        mw = w[ok]
        m = stats.wsum[ok] / mw
        centered = np.maximum(stats.wsumsq[ok] - mw * m**2, 0.0)
        v = (mw - 1.0) / (mw * (mw - GAUSSIAN_MIN_WEIGHT)) * centered
        mean[ok] = m
        var[ok] = np.maximum(v, floor)
    for j in np.flatnonzero(~ok):
        notes.append(f"config {j}: weight <= 3, pooled fallback")
    return GaussianCPD(mean=mean, var=var), tuple(notes)
