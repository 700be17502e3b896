"""The three classifier families: structure, inference, sampling, serialization.

All three factor the joint over the class variable C and features X_i, with
an optional hidden discrete variable H of arity ``r_h``:

    nb:   p(c, x) = p(c) * prod_i p(x_i | c)
    fm:   p(c, x) = sum_k p(h_k) * p(c | h_k) * prod_i p(x_i | h_k)
    fan:  p(c, x) = p(c) * sum_k [ p(h_k) * prod_i p(x_i | c, h_k) ]

A fan model with r_h = 1 collapses exactly to the nb model with the same
tables.  Inference runs entirely in log space; sums over the hidden variable
use max-shifted exponentiation.  For fan feature tables the flattened parent
configuration is class-major: j = c * r_h + h.

Missing feature values at prediction time are marginalized by dropping their
factors, which is exact under each factorization because features are
conditionally independent given their parents.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .cpds import GaussianCPD, MultinomialCPD
from .data import Cell, Dataset, Schema
from .errors import ParseError
from .util import fmt17

MODEL_FORMAT_VERSION = 1

LOG_2PI = math.log(2.0 * math.pi)


class ModelKind(enum.Enum):
    NB = "nb"
    FM = "fm"
    FAN = "fan"


@dataclass(frozen=True)
class Structure:
    """Model skeleton: kind, schema, and hidden arity (before parameters exist)."""

    kind: ModelKind
    schema: Schema
    r_h: int

    def __post_init__(self) -> None:
        if self.kind is ModelKind.NB and self.r_h != 1:
            raise ValueError("nb has no hidden variable; r_h must be 1")
        if self.r_h < 1:
            raise ValueError("r_h must be >= 1")

    def feature_parent_count(self) -> int:
        """Number of parent configurations of each feature CPD."""
        r_c = self.schema.n_classes
        if self.kind is ModelKind.NB:
            return r_c
        if self.kind is ModelKind.FM:
            return self.r_h
        return r_c * self.r_h


@dataclass(frozen=True, eq=False)
class Prediction:
    """Class posterior for one case."""

    posterior: np.ndarray
    predicted: int
    log_evidence: float


@dataclass(frozen=True, eq=False)
class Classifier:
    """A fully parameterized nb/fm/fan model.

    ``class_prior`` holds p(C) for nb/fan (one row) and p(C | H) for fm
    (r_h rows).  ``mixing`` holds p(H) (one row) and is None for nb.
    ``feature_cpds`` follows the schema's feature order.
    """

    kind: ModelKind
    schema: Schema
    r_h: int
    class_prior: MultinomialCPD
    mixing: MultinomialCPD | None
    feature_cpds: tuple[MultinomialCPD | GaussianCPD, ...]

    def __post_init__(self) -> None:
        st = self.structure  # validates kind/r_h coupling
        r_c = self.schema.n_classes
        if self.kind is ModelKind.FM:
            if self.class_prior.theta.shape != (self.r_h, r_c):
                raise ValueError("fm class table must be (r_h, r_c)")
        elif self.class_prior.theta.shape != (1, r_c):
            raise ValueError("class prior must be a single row over classes")
        if self.kind is ModelKind.NB:
            if self.mixing is not None:
                raise ValueError("nb has no mixing distribution")
        else:
            if self.mixing is None or self.mixing.theta.shape != (1, self.r_h):
                raise ValueError("mixing must be a single row over hidden values")
        q = st.feature_parent_count()
        if len(self.feature_cpds) != len(self.schema.feature_indices):
            raise ValueError("one feature CPD per non-class variable required")
        for pos, i in enumerate(self.schema.feature_indices):
            decl = self.schema.variables[i]
            cpd = self.feature_cpds[pos]
            if decl.is_discrete:
                if not isinstance(cpd, MultinomialCPD) or cpd.theta.shape != (q, decl.arity):
                    raise ValueError(f"feature {decl.name!r}: expected multinomial table ({q}, {decl.arity})")
            elif not isinstance(cpd, GaussianCPD) or cpd.mean.shape != (q,):
                raise ValueError(f"feature {decl.name!r}: expected gaussian table of length {q}")

    @property
    def structure(self) -> Structure:
        return Structure(self.kind, self.schema, self.r_h)

    # ------------------------------------------------------------------ inference

    def class_log_joint(self, ds: Dataset) -> np.ndarray:
        """(N, r_c) matrix of log p(C = c, x) for every case, all classes.

        The class column of ``ds`` is ignored; missing features contribute
        no factor.
        """
        return _class_log_joint(self, ds.values)

    def log_joint(self, case: tuple[Cell, ...]) -> float:
        """log p(c, x) of one case whose class cell is present."""
        ds = Dataset.from_cases(self.schema, [case])
        y = ds.class_column()
        if np.isnan(y[0]):
            raise ValueError("log_joint requires an observed class value")
        return float(self.class_log_joint(ds)[0, int(y[0])])

    def predict_dataset(self, ds: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized posterior: (posteriors (N, r_c), predicted (N,), log_evidence (N,))."""
        lj = self.class_log_joint(ds)
        log_ev = logsumexp(lj, axis=1)
        if np.any(~np.isfinite(log_ev)):
            raise ArithmeticError("all class joints vanished for some case")
        post = np.exp(lj - log_ev[:, None])
        post /= post.sum(axis=1, keepdims=True)
        return post, np.argmax(post, axis=1), log_ev

    def posterior(self, case: tuple[Cell, ...]) -> Prediction:
        """Class posterior of one case; the class cell, if any, is ignored."""
        ds = Dataset.from_cases(self.schema, [case])
        post, pred, log_ev = self.predict_dataset(ds)
        return Prediction(posterior=post[0], predicted=int(pred[0]), log_evidence=float(log_ev[0]))

    def loglik(self, ds: Dataset) -> float:
        """Sum of log p(c, x) over all cases (0 for an empty dataset)."""
        if ds.n == 0:
            return 0.0
        y = ds.class_column()
        if np.any(np.isnan(y)):
            raise ValueError("loglik requires observed class values")
        lj = self.class_log_joint(ds)
        return float(lj[np.arange(ds.n), y.astype(int)].sum())

    def hidden_log_posterior(self, ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
        """Per-case log posterior over H given the full case, plus log p(case).

        Requires observed class values.  For nb the posterior is the trivial
        single column.  Feeds the soft and hard assignment steps of fitting.
        """
        return _hidden_log_posterior(self, ds)

    # ------------------------------------------------------------------ sampling

    def sample(self, n: int, seed: int) -> Dataset:
        """Forward-sample ``n`` cases (hidden values are not emitted)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        r_c = self.schema.n_classes
        if self.kind is ModelKind.NB:
            c = _sample_rows(self.class_prior.theta, np.zeros(n, dtype=int), rng)
            h = np.zeros(n, dtype=int)
        elif self.kind is ModelKind.FM:
            h = _sample_rows(self.mixing.theta, np.zeros(n, dtype=int), rng)
            c = _sample_rows(self.class_prior.theta, h, rng)
        else:
            h = _sample_rows(self.mixing.theta, np.zeros(n, dtype=int), rng)
            c = _sample_rows(self.class_prior.theta, np.zeros(n, dtype=int), rng)
        j = _parent_config(self.kind, c, h, self.r_h)
        values = np.empty((n, len(self.schema.variables)))
        values[:, self.schema.class_index] = c
        for pos, i in enumerate(self.schema.feature_indices):
            cpd = self.feature_cpds[pos]
            if isinstance(cpd, MultinomialCPD):
                values[:, i] = _sample_rows(cpd.theta, j, rng)
            else:
                values[:, i] = cpd.mean[j] + np.sqrt(cpd.var[j]) * rng.standard_normal(n)
        return Dataset(self.schema, values)

    # ------------------------------------------------------------------ serialization

    def to_json(self) -> str:
        def table(cpd: MultinomialCPD | GaussianCPD) -> dict:
            if isinstance(cpd, MultinomialCPD):
                return {
                    "type": "multinomial",
                    "theta": [[fmt17(x) for x in row] for row in cpd.theta],
                    "alpha": [[fmt17(x) for x in row] for row in cpd.alpha],
                }
            return {
                "type": "gaussian",
                "mean": [fmt17(x) for x in cpd.mean],
                "var": [fmt17(x) for x in cpd.var],
            }

        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind.value,
            "r_h": self.r_h,
            "config_order": "class_major",  # fan feature tables: j = c * r_h + h
            "schema": self.schema.to_dict(),
            "parameters": {
                "class_prior": table(self.class_prior),
                "mixing": table(self.mixing) if self.mixing is not None else None,
                "features": [table(c) for c in self.feature_cpds],
            },
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Classifier":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"model file is not valid JSON: {exc}") from exc
        try:
            if d["format_version"] != MODEL_FORMAT_VERSION:
                raise ParseError(f"unsupported model format_version {d['format_version']!r}")
            kind = ModelKind(d["kind"])
            schema = Schema.from_dict(d["schema"])
            params = d["parameters"]

            def untable(entry: dict) -> MultinomialCPD | GaussianCPD:
                if entry["type"] == "multinomial":
                    theta = np.array([[float(x) for x in row] for row in entry["theta"]])
                    alpha = np.array([[float(x) for x in row] for row in entry["alpha"]])
                    return MultinomialCPD(theta=theta, alpha=alpha)
                if entry["type"] == "gaussian":
                    return GaussianCPD(
                        mean=np.array([float(x) for x in entry["mean"]]),
                        var=np.array([float(x) for x in entry["var"]]),
                    )
                raise ParseError(f"unknown CPD type {entry['type']!r}")

            mixing = params["mixing"]
            return cls(
                kind=kind,
                schema=schema,
                r_h=int(d["r_h"]),
                class_prior=untable(params["class_prior"]),
                mixing=untable(mixing) if mixing is not None else None,
                feature_cpds=tuple(untable(e) for e in params["features"]),
            )
        except ParseError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed model file: {exc}") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Classifier":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------- internals


def _parent_config(kind: ModelKind, c: np.ndarray, h: np.ndarray, r_h: int) -> np.ndarray:
    if kind is ModelKind.NB:
        return c
    if kind is ModelKind.FM:
        return h
    return c * r_h + h


def _sample_rows(theta: np.ndarray, rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw of one value per case from theta[rows[case]]."""
    cdf = np.cumsum(theta[rows], axis=1)
    u = rng.random(len(rows))
    vals = (cdf < u[:, None]).sum(axis=1)
    return np.minimum(vals, theta.shape[1] - 1)


def _gauss_logpdf(x: np.ndarray, mean: np.ndarray, var: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):  # extreme deviations underflow to -inf density
        return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


def _feature_terms_all_classes(model: Classifier, values: np.ndarray) -> np.ndarray:
    """Sum of per-feature log factors for every (case, class[, hidden]).

    Shape (N, r_c) for nb, (N, r_h) for fm, (N, r_c, r_h) for fan.  Missing
    features contribute zero.
    """
    schema = model.schema
    n = values.shape[0]
    r_c = schema.n_classes
    r_h = model.r_h
    if model.kind is ModelKind.NB:
        total = np.zeros((n, r_c))
    elif model.kind is ModelKind.FM:
        total = np.zeros((n, r_h))
    else:
        total = np.zeros((n, r_c, r_h))
    for pos, i in enumerate(schema.feature_indices):
        col = values[:, i]
        obs = ~np.isnan(col)
        if not np.any(obs):
            continue
        cpd = model.feature_cpds[pos]
        if isinstance(cpd, MultinomialCPD):
            x = np.where(obs, col, 0).astype(int)
            lt = cpd.log_theta  # (q, r_i)
            if model.kind is ModelKind.FAN:
                lt3 = lt.reshape(r_c, r_h, -1)
                term = lt3.transpose(2, 0, 1)[x]  # (N, r_c, r_h)
            else:
                term = lt.T[x]  # (N, q)
        else:
            x = np.where(obs, col, 0.0)
            if model.kind is ModelKind.FAN:
                mean = cpd.mean.reshape(r_c, r_h)
                var = cpd.var.reshape(r_c, r_h)
                term = _gauss_logpdf(x[:, None, None], mean[None, :, :], var[None, :, :])
            else:
                term = _gauss_logpdf(x[:, None], cpd.mean[None, :], cpd.var[None, :])
        total += np.where(obs.reshape((n,) + (1,) * (total.ndim - 1)), term, 0.0)
    return total


def _class_log_joint(model: Classifier, values: np.ndarray) -> np.ndarray:
    terms = _feature_terms_all_classes(model, values)
    if model.kind is ModelKind.NB:
        return np.log(model.class_prior.theta[0])[None, :] + terms
    log_mix = np.log(model.mixing.theta[0])
    if model.kind is ModelKind.FM:
        # (N, r_h) + (r_h,) summed out against p(c | h): (N, r_c)
        a = terms + log_mix[None, :]
        return logsumexp(a[:, :, None] + np.log(model.class_prior.theta)[None, :, :], axis=1)
    a = terms + log_mix[None, None, :]
    return np.log(model.class_prior.theta[0])[None, :] + logsumexp(a, axis=2)


def _feature_terms_observed_class(model: Classifier, values: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(N, r_h) sum of feature log factors with the class fixed at y (fan only)."""
    schema = model.schema
    n = values.shape[0]
    r_c = schema.n_classes
    r_h = model.r_h
    total = np.zeros((n, r_h))
    for pos, i in enumerate(schema.feature_indices):
        col = values[:, i]
        obs = ~np.isnan(col)
        if not np.any(obs):
            continue
        cpd = model.feature_cpds[pos]
        if isinstance(cpd, MultinomialCPD):
            x = np.where(obs, col, 0).astype(int)
            lt3 = cpd.log_theta.reshape(r_c, r_h, -1)
            term = lt3.transpose(0, 2, 1)[y, x]  # (N, r_h)
        else:
            x = np.where(obs, col, 0.0)
            mean = cpd.mean.reshape(r_c, r_h)[y]
            var = cpd.var.reshape(r_c, r_h)[y]
            term = _gauss_logpdf(x[:, None], mean, var)
        total += np.where(obs[:, None], term, 0.0)
    return total


def _hidden_log_posterior(model: Classifier, ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    y_col = ds.class_column()
    if np.any(np.isnan(y_col)):
        raise ValueError("hidden posterior requires observed class values")
    y = y_col.astype(int)
    values = ds.values
    n = ds.n
    if model.kind is ModelKind.NB:
        terms = _feature_terms_all_classes(model, values)  # (N, r_c)
        ll = np.log(model.class_prior.theta[0])[y] + terms[np.arange(n), y]
        return np.zeros((n, 1)), ll
    log_mix = np.log(model.mixing.theta[0])
    if model.kind is ModelKind.FM:
        terms = _feature_terms_all_classes(model, values)  # (N, r_h)
        a = terms + log_mix[None, :] + np.log(model.class_prior.theta)[:, y].T
    else:
        terms = _feature_terms_observed_class(model, values, y)
        a = terms + log_mix[None, :]
    ll = logsumexp(a, axis=1)
    log_post = a - ll[:, None]
    if model.kind is ModelKind.FAN:
        ll = ll + np.log(model.class_prior.theta[0])[y]
    return log_post, ll
