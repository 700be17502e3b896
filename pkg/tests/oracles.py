"""Independent reference implementations used to check the library.

Everything here computes in plain python / linear space with explicit loops,
deliberately avoiding the library's vectorized log-space paths.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from mixfan import Classifier, ModelKind, MultinomialCPD, Schema, VariableDecl


def enum_outcomes(schema: Schema):
    """All full assignments (tuples over every variable) of an all-discrete schema."""
    domains = [range(v.arity) for v in schema.variables]
    return itertools.product(*domains)


def enum_joint(model: Classifier) -> dict[tuple[int, ...], float]:
    """Brute-force joint table of an all-discrete model, in linear space."""
    schema = model.schema
    ci = schema.class_index
    feats = schema.feature_indices
    out = {}
    for assign in enum_outcomes(schema):
        c = assign[ci]
        if model.kind is ModelKind.NB:
            p = model.class_prior.theta[0][c]
            for pos, i in enumerate(feats):
                p *= model.feature_cpds[pos].theta[c][assign[i]]
        elif model.kind is ModelKind.FM:
            p = 0.0
            for h in range(model.r_h):
                term = model.mixing.theta[0][h] * model.class_prior.theta[h][c]
                for pos, i in enumerate(feats):
                    term *= model.feature_cpds[pos].theta[h][assign[i]]
                p += term
        else:
            p = 0.0
            for h in range(model.r_h):
                term = model.mixing.theta[0][h]
                for pos, i in enumerate(feats):
                    term *= model.feature_cpds[pos].theta[c * model.r_h + h][assign[i]]
                p += term
            p *= model.class_prior.theta[0][c]
        out[assign] = p
    return out


def enum_posterior(model: Classifier, features: dict[int, int]) -> list[float]:
    """Condition the brute-force joint on observed feature values."""
    schema = model.schema
    ci = schema.class_index
    joint = enum_joint(model)
    per_class = [0.0] * schema.n_classes
    for assign, p in joint.items():
        if all(assign[i] == v for i, v in features.items()):
            per_class[assign[ci]] += p
    z = sum(per_class)
    return [p / z for p in per_class]


def random_discrete_model(
    kind: ModelKind,
    rng: np.random.Generator,
    n_features: int = 3,
    r_c: int = 2,
    r_h: int = 2,
    arity: int = 2,
) -> Classifier:
    """Random all-discrete model of the given kind."""
    decls = [VariableDecl(f"x{i}", tuple(f"v{k}" for k in range(arity))) for i in range(n_features)]
    decls.append(VariableDecl("c", tuple(f"c{k}" for k in range(r_c))))
    schema = Schema(tuple(decls), class_index=n_features)
    if kind is ModelKind.NB:
        r_h = 1

    def dirichlet(q, r):
        t = rng.dirichlet(np.ones(r), size=q)
        t = np.clip(t, 1e-9, None)
        return MultinomialCPD(theta=t / t.sum(axis=1, keepdims=True), alpha=np.ones((q, r)))

    class_prior = dirichlet(r_h if kind is ModelKind.FM else 1, r_c)
    mixing = None if kind is ModelKind.NB else dirichlet(1, r_h)
    q = {ModelKind.NB: r_c, ModelKind.FM: r_h, ModelKind.FAN: r_c * r_h}[kind]
    feats = tuple(dirichlet(q, arity) for _ in range(n_features))
    return Classifier(
        kind=kind, schema=schema, r_h=r_h, class_prior=class_prior, mixing=mixing, feature_cpds=feats
    )


def entropy_bits(labels: list) -> float:
    n = len(labels)
    if n == 0:
        return 0.0
    h = 0.0
    for v in set(labels):
        p = labels.count(v) / n
        h -= p * math.log2(p)
    return h


def mdl_scan_cuts(values: list[float], labels: list[int]) -> list[float]:
    """Reference recursive entropy/MDL splitter (brute-force scan of midpoints)."""
    pairs = sorted(zip(values, labels))
    vs = [p[0] for p in pairs]
    ls = [p[1] for p in pairs]
    n = len(vs)
    candidates = []
    for i in range(n - 1):
        if vs[i] != vs[i + 1]:
            candidates.append((0.5 * (vs[i] + vs[i + 1]), i + 1))
    if not candidates:
        return []
    best = None
    for cut, split in candidates:
        e = (split / n) * entropy_bits(ls[:split]) + ((n - split) / n) * entropy_bits(ls[split:])
        if best is None or e < best[0] - 1e-15:
            best = (e, cut, split)
    e_split, cut, split = best
    h = entropy_bits(ls)
    gain = h - e_split
    kc = len(set(ls))
    k1 = len(set(ls[:split]))
    k2 = len(set(ls[split:]))
    delta = math.log2(3**kc - 2) - (kc * h - k1 * entropy_bits(ls[:split]) - k2 * entropy_bits(ls[split:]))
    if gain <= (math.log2(n - 1) + delta) / n:
        return []
    return sorted(
        mdl_scan_cuts(vs[:split], ls[:split]) + [cut] + mdl_scan_cuts(vs[split:], ls[split:])
    )
