"""Soft and hard assignment fitting of the hidden mixture variable.

Fitting alternates a responsibility step (posterior over the hidden variable
per case, or its argmax in hard mode) with the closed-form point estimators
of :mod:`mixfan.cpds`.  Every restart starts from random parameters at data
scale; observed parent-free distributions start at their closed-form
estimate.  The trace records the observed-data log-likelihood per iteration
and is non-decreasing in soft mode.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .cpds import (
    ABSOLUTE_VARIANCE_FLOOR,
    DiscreteStats,
    GaussianCPD,
    GaussianStats,
    MultinomialCPD,
    SuffStats,
    map_gaussian,
    map_multinomial,
)
from .data import Dataset
from .errors import FitError
from .models import Classifier, ModelKind, Structure
from .util import derive_seed

EMPTY_COMPONENT_WEIGHT = 1e-8


class EmMode(enum.Enum):
    EM = "em"  # fractional assignments
    CEM = "cem"  # hard argmax assignments


@dataclass(frozen=True)
class EmConfig:
    """Knobs of one fit: stopping rule, restarts, seed, assignment mode."""

    max_iterations: int = 500
    tolerance: float = 1e-6
    restarts: int = 5
    seed: int = 0
    mode: EmMode = EmMode.EM
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class FitReport:
    """Outcome of one fit: best restart's trace and bookkeeping."""

    loglik_trace: tuple[float, ...]
    converged: bool
    iterations: int
    best_restart: int
    seed: int
    mode: EmMode
    notes: tuple[str, ...] = ()

    @property
    def final_loglik(self) -> float:
        return self.loglik_trace[-1]


def _require_complete(ds: Dataset) -> np.ndarray:
    """Training data must be fully observed; returns the int class column."""
    if ds.n < 1:
        raise ValueError("cannot fit on an empty dataset")
    if np.any(np.isnan(ds.values)):
        r, c = np.argwhere(np.isnan(ds.values))[0]
        name = ds.schema.variables[c].name
        raise ValueError(f"case {r}: missing value in {name!r}; training data must be complete")
    return ds.class_column().astype(int)


def stats_from_responsibilities(ds: Dataset, structure: Structure, resp: np.ndarray) -> SuffStats:
    """Sufficient statistics for every local distribution at given responsibilities.

    ``resp`` is (N, r_h) with rows summing to 1; a single all-ones column for
    models without a hidden variable.  Fractional rows give expected
    statistics, one-hot rows give hard ones.
    """
    y = _require_complete(ds)
    schema = ds.schema
    n = ds.n
    r_c = schema.n_classes
    r_h = structure.r_h
    if resp.shape != (n, r_h):
        raise ValueError(f"responsibilities must be ({n}, {r_h})")

    if structure.kind is ModelKind.FM:
        idx = np.arange(r_h)[None, :] * r_c + y[:, None]
        class_counts = np.bincount(idx.ravel(), weights=resp.ravel(), minlength=r_h * r_c)
        class_stats = DiscreteStats(class_counts.reshape(r_h, r_c))
    else:
        class_stats = DiscreteStats(np.bincount(y, minlength=r_c)[None, :].astype(float))

    mixing = None
    if structure.kind is not ModelKind.NB:
        mixing = DiscreteStats(resp.sum(axis=0)[None, :])

    if structure.kind is ModelKind.NB:
        j = y[:, None]
    elif structure.kind is ModelKind.FM:
        j = np.broadcast_to(np.arange(r_h), (n, r_h))
    else:
        j = y[:, None] * r_h + np.arange(r_h)[None, :]
    q = structure.feature_parent_count()

    features: list[DiscreteStats | GaussianStats] = []
    for pos, i in enumerate(schema.feature_indices):
        decl = schema.variables[i]
        col = ds.column(i)
        if decl.is_discrete:
            x = col.astype(np.int64)
            flat = np.bincount(
                (j * decl.arity + x[:, None]).ravel(),
                weights=resp.ravel(),
                minlength=q * decl.arity,
            )
            features.append(DiscreteStats(flat.reshape(q, decl.arity)))
        else:
            weight = np.bincount(j.ravel(), weights=resp.ravel(), minlength=q)
            wsum = np.bincount(j.ravel(), weights=(resp * col[:, None]).ravel(), minlength=q)
            wsumsq = np.bincount(j.ravel(), weights=(resp * (col * col)[:, None]).ravel(), minlength=q)
            features.append(GaussianStats(weight, wsum, wsumsq))
    return SuffStats(class_stats=class_stats, mixing=mixing, features=tuple(features), n_cases=float(n))


def _soft_resp(log_post: np.ndarray) -> np.ndarray:
    return np.exp(log_post)


def _hard_resp(log_post: np.ndarray) -> np.ndarray:
    hard = np.zeros_like(log_post)
    hard[np.arange(log_post.shape[0]), np.argmax(log_post, axis=1)] = 1.0
    return hard


def expected_stats(ds: Dataset, model: Classifier) -> SuffStats:
    """Expected sufficient statistics under the model's hidden posterior.

    With no hidden degrees of freedom (r_h = 1) this equals hard counting.
    """
    log_post, _ = model.hidden_log_posterior(ds)
    return stats_from_responsibilities(ds, model.structure, _soft_resp(log_post))


def cem_stats(ds: Dataset, model: Classifier) -> SuffStats:
    """Hard-assignment statistics: each case goes wholly to its argmax component.

    Ties break toward the lowest component index.
    """
    log_post, _ = model.hidden_log_posterior(ds)
    return stats_from_responsibilities(ds, model.structure, _hard_resp(log_post))


def params_from_stats(
    structure: Structure, stats: SuffStats, alpha: float = 1.0
) -> tuple[Classifier, tuple[str, ...]]:
    """Point estimates for every local distribution; returns model plus notes."""
    notes: list[str] = []
    class_prior = map_multinomial(stats.class_stats, alpha)
    mixing = map_multinomial(stats.mixing, alpha) if stats.mixing is not None else None
    cpds: list[MultinomialCPD | GaussianCPD] = []
    for pos, i in enumerate(structure.schema.feature_indices):
        st = stats.features[pos]
        if isinstance(st, DiscreteStats):
            cpds.append(map_multinomial(st, alpha))
        else:
            cpd, gnotes = map_gaussian(st)
            name = structure.schema.variables[i].name
            notes.extend(f"{name}: {g}" for g in gnotes)
            cpds.append(cpd)
    model = Classifier(
        kind=structure.kind,
        schema=structure.schema,
        r_h=structure.r_h,
        class_prior=class_prior,
        mixing=mixing,
        feature_cpds=tuple(cpds),
    )
    return model, tuple(notes)


class _RestartFailed(Exception):
    pass


def _dirichlet_rows(rng: np.random.Generator, q: int, r: int) -> np.ndarray:
    rows = np.clip(rng.dirichlet(np.ones(r), size=q), 1e-12, None)
    return rows / rows.sum(axis=1, keepdims=True)


def _random_initial_model(ds: Dataset, structure: Structure, rng: np.random.Generator, alpha: float) -> Classifier:
    """Random parameters at data scale.

    Responsibility-based initialization collapses onto the symmetric fixed
    point for separated components (per-component data averages coincide for
    any near-uniform assignment of many cases), so components start instead
    from random tables and Gaussian means drawn around the pooled moments.
    Observed parent-free distributions start at their closed-form estimate.
    """
    schema = structure.schema
    r_c = schema.n_classes
    r_h = structure.r_h
    q = structure.feature_parent_count()
    y_counts = np.bincount(ds.class_column().astype(int), minlength=r_c)[None, :].astype(float)
    if structure.kind is ModelKind.FM:
        class_prior = MultinomialCPD(theta=_dirichlet_rows(rng, r_h, r_c), alpha=np.full((r_h, r_c), alpha))
    else:
        class_prior = map_multinomial(DiscreteStats(y_counts), alpha)
    mixing = None
    if structure.kind is not ModelKind.NB:
        mixing = MultinomialCPD(theta=np.full((1, r_h), 1.0 / r_h), alpha=np.full((1, r_h), alpha))
    cpds: list[MultinomialCPD | GaussianCPD] = []
    for i in schema.feature_indices:
        decl = schema.variables[i]
        if decl.is_discrete:
            cpds.append(MultinomialCPD(theta=_dirichlet_rows(rng, q, decl.arity), alpha=np.full((q, decl.arity), alpha)))
        else:
            col = ds.column(i)
            m = float(col.mean())
            v = float(col.var(ddof=1)) if ds.n > 1 else 0.0
            v = max(v, ABSOLUTE_VARIANCE_FLOOR)
            cpds.append(GaussianCPD(mean=m + math.sqrt(v) * rng.standard_normal(q), var=np.full(q, v)))
    return Classifier(
        kind=structure.kind,
        schema=schema,
        r_h=r_h,
        class_prior=class_prior,
        mixing=mixing,
        feature_cpds=tuple(cpds),
    )


def _run_restart(
    ds: Dataset, structure: Structure, cfg: EmConfig, seed: int
) -> tuple[Classifier, list[float], bool, list[str]]:
    rng = np.random.default_rng(seed)
    n = ds.n
    r_h = structure.r_h
    notes: list[str] = []

    if r_h == 1:
        resp = np.ones((n, 1))
        model, mnotes = params_from_stats(structure, stats_from_responsibilities(ds, structure, resp), cfg.alpha)
        notes.extend(mnotes)
    else:
        model = _random_initial_model(ds, structure, rng, cfg.alpha)

    trace: list[float] = []
    converged = False
    prev_model = model
    prev = None
    reseeded = False
    for it in range(cfg.max_iterations):
        log_post, ll_vec = model.hidden_log_posterior(ds)
        ll = float(ll_vec.sum())
        if not np.isfinite(ll):
            raise _RestartFailed(f"non-finite log-likelihood at iteration {it + 1}")
        if r_h == 1:
            trace.append(ll)
            converged = True  # no hidden degrees of freedom: one pass is exact
            break
        if prev is not None:
            gain = ll - prev
            if gain < 0 and cfg.mode is EmMode.EM and not reseeded:
                # The point estimators are not exact maximizers of the EM
                # surrogate, so a hair above the fixed point the raw
                # log-likelihood can dip.  Keep the better parameters.
                model = prev_model
                converged = True
                break
            trace.append(ll)
            if abs(gain) <= cfg.tolerance * max(1.0, abs(prev)):
                converged = True
                break
        else:
            trace.append(ll)
        prev = ll
        prev_model = model
        reseeded = False
        if it == cfg.max_iterations - 1:
            break  # cap reached; keep the parameters the last trace entry measured
        resp = _hard_resp(log_post) if cfg.mode is EmMode.CEM else _soft_resp(log_post)
        weights = resp.sum(axis=0)
        for k in np.flatnonzero(weights < EMPTY_COMPONENT_WEIGHT):
            case = int(rng.integers(n))
            resp[case, :] = 0.0
            resp[case, k] = 1.0
            reseeded = True
            notes.append(f"iteration {it + 1}: component {k} empty, reseeded from case {case}")
        model, mnotes = params_from_stats(structure, stats_from_responsibilities(ds, structure, resp), cfg.alpha)
        notes.extend(mnotes)
    return model, trace, converged, notes


def fit_em(ds: Dataset, structure: Structure, cfg: EmConfig) -> tuple[Classifier, FitReport]:
    """Fit the model's parameters, keeping the best of ``cfg.restarts`` runs.

    Restart seeds derive deterministically from ``cfg.seed``; the best final
    observed-data log-likelihood wins, earlier restart on ties.  A restart
    that produces a non-finite log-likelihood is recorded and skipped; if
    every restart fails a :class:`FitError` is raised.
    """
    if structure.schema is not ds.schema and structure.schema != ds.schema:
        raise ValueError("structure schema does not match the dataset schema")
    _require_complete(ds)
    restarts = 1 if structure.r_h == 1 else cfg.restarts
    best: tuple[Classifier, list[float], bool, list[str], int] | None = None
    failures: list[str] = []
    for ri in range(restarts):
        try:
            model, trace, converged, notes = _run_restart(ds, structure, cfg, derive_seed(cfg.seed, ri))
        except _RestartFailed as exc:
            failures.append(f"restart {ri}: {exc}")
            continue
        if best is None or trace[-1] > best[1][-1]:
            best = (model, trace, converged, notes, ri)
    if best is None:
        raise FitError("all restarts failed: " + "; ".join(failures))
    model, trace, converged, notes, ri = best
    unique_notes = tuple(dict.fromkeys(notes + failures))  # ordered, deduplicated
    report = FitReport(
        loglik_trace=tuple(trace),
        converged=converged,
        iterations=len(trace),
        best_restart=ri,
        seed=cfg.seed,
        mode=cfg.mode,
        notes=unique_notes,
    )
    return model, report
