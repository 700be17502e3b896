"""Penalized-likelihood scores and the search over hidden cardinality.

Four scores, all "higher is better" and all sharing the fitted model's
observed-data log-likelihood L:

    bic:  L - (d / 2) * ln N
    aic:  L - d
    cs:   log m(Dbar) + L - log p(Dbar | theta)   (Dbar = soft-completed data)
    icl:  Lc - (d / 2) * ln N                     (Lc = hard-completed log-lik)

``d`` counts free parameters, ``m`` is the closed-form marginal likelihood of
the completed statistics under the Dirichlet hyperparameters (continuous
children have no proper closed form under their flat prior, so they enter the
cs marginal at their point estimates; such reports carry a note).  icl
completes the data by argmax posterior assignment at the fitted parameters,
so the assignment-entropy gap between Lc and L penalizes blurry components.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .cpds import DiscreteStats, GaussianCPD, GaussianStats, MultinomialCPD, SuffStats
from .data import Dataset
from .em import EmConfig, FitReport, cem_stats, expected_stats, fit_em
from .errors import SelectionError
from .models import LOG_2PI, Classifier, ModelKind, Structure
from .util import derive_seed


class ScoreKind(enum.Enum):
    BIC = "bic"
    AIC = "aic"
    CS = "cs"
    ICL = "icl"


@dataclass(frozen=True)
class ScoreReport:
    """One scored candidate; ``value = loglik + penalty`` holds exactly."""

    kind: ScoreKind
    value: float
    loglik: float
    penalty: float
    d: int
    r_h: int
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class CandidateResult:
    """A candidate cardinality's outcome within one search."""

    r_h: int
    report: ScoreReport | None
    fit: FitReport | None
    error: str | None = None


@dataclass(frozen=True)
class SearchResult:
    """All candidates of one component-count search plus the winner."""

    kind: ModelKind
    score_kind: ScoreKind
    candidates: tuple[CandidateResult, ...]
    selected_r_h: int
    model: Classifier
    seed: int

    @property
    def selected(self) -> CandidateResult:
        for c in self.candidates:
            if c.r_h == self.selected_r_h:
                return c
        raise LookupError("selected candidate missing")


def param_count(structure: Structure) -> int:
    """Free parameters: class rows + mixing row + one block per feature."""
    schema = structure.schema
    r_c = schema.n_classes
    r_h = structure.r_h
    class_rows = r_h if structure.kind is ModelKind.FM else 1
    d = class_rows * (r_c - 1) + (r_h - 1)
    q = structure.feature_parent_count()
    for i in schema.feature_indices:
        decl = schema.variables[i]
        d += q * (decl.arity - 1) if decl.is_discrete else 2 * q
    return d


def default_r_max(n: int) -> int:
    return max(1, min(20, math.isqrt(n)))


# ------------------------------------------------------------ completed-data terms


def _dirichlet_log_marginal(stats: DiscreteStats, alpha: np.ndarray) -> float:
    """Closed-form log integral of the multinomial likelihood over its prior."""
    a_row = alpha.sum(axis=1)
    n_row = stats.counts.sum(axis=1)
    per_row = gammaln(a_row) - gammaln(a_row + n_row)
    per_cell = gammaln(alpha + stats.counts) - gammaln(alpha)
    return float(per_row.sum() + per_cell.sum())


def _completed_loglik_discrete(stats: DiscreteStats, cpd: MultinomialCPD) -> float:
    return float((stats.counts * cpd.log_theta).sum())


def _completed_loglik_gaussian(stats: GaussianStats, cpd: GaussianCPD) -> float:
    quad = stats.wsumsq - 2.0 * cpd.mean * stats.wsum + cpd.mean**2 * stats.weight
    return float((-0.5 * (stats.weight * (LOG_2PI + np.log(cpd.var)) + quad / cpd.var)).sum())


def _paired_children(model: Classifier, stats: SuffStats):
    yield stats.class_stats, model.class_prior
    if stats.mixing is not None:
        yield stats.mixing, model.mixing
    yield from zip(stats.features, model.feature_cpds)


def completed_loglik(model: Classifier, stats: SuffStats) -> float:
    """log-likelihood of a (possibly fractionally) completed dataset."""
    total = 0.0
    for st, cpd in _paired_children(model, stats):
        if isinstance(st, DiscreteStats):
            total += _completed_loglik_discrete(st, cpd)
        else:
            total += _completed_loglik_gaussian(st, cpd)
    return total


def score(kind: ScoreKind, model: Classifier, ds: Dataset, fit: FitReport) -> ScoreReport:
    """Score a fitted candidate on the data it was fitted to."""
    loglik = model.loglik(ds)
    d = param_count(model.structure)
    n = ds.n
    notes: tuple[str, ...] = ()
    if kind is ScoreKind.BIC:
        penalty = -0.5 * d * math.log(n)
    elif kind is ScoreKind.AIC:
        penalty = -float(d)
    elif kind is ScoreKind.CS:
        stats = expected_stats(ds, model)
        log_marginal = 0.0
        log_completed = 0.0
        approx = False
        for st, cpd in _paired_children(model, stats):
            if isinstance(st, DiscreteStats):
                log_marginal += _dirichlet_log_marginal(st, cpd.alpha)
                log_completed += _completed_loglik_discrete(st, cpd)
            else:
                part = _completed_loglik_gaussian(st, cpd)
                log_marginal += part  # no closed form under the flat prior
                log_completed += part
                approx = True
        penalty = log_marginal - log_completed
        if approx:
            notes = ("continuous children enter the marginal at their point estimates",)
    elif kind is ScoreKind.ICL:
        hard = cem_stats(ds, model)
        lc = completed_loglik(model, hard)
        penalty = (lc - loglik) - 0.5 * d * math.log(n)
    else:  # pragma: no cover - closed enumeration
        raise ValueError(f"unknown score kind {kind!r}")
    return ScoreReport(
        kind=kind, value=loglik + penalty, loglik=loglik, penalty=penalty, d=d, r_h=model.r_h, notes=notes
    )


def select_components(
    ds: Dataset,
    kind: ModelKind,
    score_kind: ScoreKind,
    r_max: int | None = None,
    cfg: EmConfig | None = None,
) -> SearchResult:
    """Fit and score every hidden cardinality 1..r_max; highest score wins.

    An nb search has the single candidate r_h = 1.  Candidates are fitted
    independently with seeds derived from the configured master seed, in the
    assignment mode of ``cfg`` (soft by default; every score evaluates on
    whatever fit it is given).  Ties break toward the smaller cardinality.
    """
    cfg = cfg if cfg is not None else EmConfig()
    if r_max is None:
        r_max = default_r_max(ds.n)
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    cand_rs = [1] if kind is ModelKind.NB else list(range(1, r_max + 1))

    results: list[CandidateResult] = []
    best: tuple[float, int, Classifier] | None = None
    for r in cand_rs:
        structure = Structure(kind, ds.schema, r)
        cfg_r = replace(cfg, seed=derive_seed(cfg.seed, r))
        try:
            model, fit = fit_em(ds, structure, cfg_r)
            report = score(score_kind, model, ds, fit)
        except Exception as exc:  # noqa: BLE001 - per-candidate failures are data
            results.append(CandidateResult(r_h=r, report=None, fit=None, error=str(exc)))
            continue
        results.append(CandidateResult(r_h=r, report=report, fit=fit))
        if best is None or report.value > best[0]:
            best = (report.value, r, model)
    if best is None:
        lines = "; ".join(f"r_h={c.r_h}: {c.error}" for c in results)
        raise SelectionError(f"every candidate failed: {lines}")
    return SearchResult(
        kind=kind,
        score_kind=score_kind,
        candidates=tuple(results),
        selected_r_h=best[1],
        model=best[2],
        seed=cfg.seed,
    )


def structural_difference(selected_r_h: int, true_r_h: int) -> int:
    """Learned minus generating component count."""
    return selected_r_h - true_r_h
