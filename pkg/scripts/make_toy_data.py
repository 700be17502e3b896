"""Regenerate the bundled toy datasets under data/.

Everything is seeded, so reruns reproduce the committed files byte for byte.
The generating models are saved next to the samples so tests can enumerate
ground-truth quantities (e.g. the best achievable accuracy).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from mixfan import Classifier, ModelKind, MultinomialCPD, Schema, VariableDecl, save_csv, save_schema
from mixfan.cpds import GaussianCPD

OUT = Path(__file__).resolve().parent.parent / "data"


def toy_nb() -> None:
    decls = [VariableDecl(f"f{i}", ("no", "yes")) for i in range(1, 5)]
    decls.append(VariableDecl("label", ("neg", "pos")))
    schema = Schema(tuple(decls), class_index=4)
    cond = [(0.85, 0.25), (0.70, 0.30), (0.60, 0.40), (0.75, 0.45)]
    model = Classifier(
        kind=ModelKind.NB,
        schema=schema,
        r_h=1,
        class_prior=MultinomialCPD(np.array([[0.6, 0.4]]), np.ones((1, 2))),
        mixing=None,
        feature_cpds=tuple(
            MultinomialCPD(np.array([[p0, 1 - p0], [p1, 1 - p1]]), np.ones((2, 2)))
            for p0, p1 in cond
        ),
    )
    model.save(OUT / "toy_nb.model.json")
    save_schema(schema, OUT / "toy_nb.schema.json")
    save_csv(model.sample(2000, seed=20240101), OUT / "toy_nb.csv")


def toy_mixed() -> None:
    schema = Schema(
        (
            VariableDecl("shape", ("round", "flat", "long")),
            VariableDecl("size", None),
            VariableDecl("weight", None),
            VariableDecl("grade", ("low", "high")),
        ),
        class_index=3,
    )
    model = Classifier(
        kind=ModelKind.NB,
        schema=schema,
        r_h=1,
        class_prior=MultinomialCPD(np.array([[0.5, 0.5]]), np.ones((1, 2))),
        mixing=None,
        feature_cpds=(
            MultinomialCPD(np.array([[0.6, 0.3, 0.1], [0.2, 0.3, 0.5]]), np.ones((2, 3))),
            GaussianCPD(np.array([2.0, 6.0]), np.array([1.0, 1.5])),
            GaussianCPD(np.array([10.0, 11.0]), np.array([4.0, 4.0])),
        ),
    )
    model.save(OUT / "toy_mixed.model.json")
    save_schema(schema, OUT / "toy_mixed.schema.json")
    save_csv(model.sample(300, seed=20240202), OUT / "toy_mixed.csv")


def main() -> None:
    OUT.mkdir(exist_ok=True)
    toy_nb()
    toy_mixed()
    for p in sorted(OUT.iterdir()):
        print(f"wrote {p} ({p.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
