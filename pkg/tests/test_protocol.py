from pathlib import Path

import numpy as np
import pytest
from oracles import random_discrete_model

from mixfan import (
    Dataset,
    EmConfig,
    ModelKind,
    Schema,
    ScoreKind,
    VariableDecl,
    compare_on_datasets,
    cross_validate,
    evaluate_holdout,
    experiment_correlation,
    gs_experiment,
    load_csv,
    load_schema,
)

DATA = Path(__file__).resolve().parent.parent / "data"

FAST = EmConfig(restarts=2, max_iterations=200)


@pytest.fixture(scope="module")
def toy_nb():
    schema = load_schema(DATA / "toy_nb.schema.json")
    return load_csv(DATA / "toy_nb.csv", schema)


class TestCrossValidate:
    def test_deterministic(self, toy_nb):
        small = toy_nb.subset(np.arange(300))
        a = cross_validate(small, ModelKind.NB, ScoreKind.BIC, k=5, seed=3, cfg=FAST)
        b = cross_validate(small, ModelKind.NB, ScoreKind.BIC, k=5, seed=3, cfg=FAST)
        assert a.accuracy == b.accuracy and a.ce == b.ce and a.auc == b.auc

    def test_pooled_accuracy_equals_fold_totals(self, toy_nb):
        small = toy_nb.subset(np.arange(400))
        rep = cross_validate(small, ModelKind.NB, ScoreKind.BIC, k=4, seed=1, cfg=FAST)
        correct = sum(round(f.accuracy * f.n) for f in rep.per_fold)
        assert rep.accuracy == pytest.approx(correct / rep.n)
        assert rep.n == small.n
        assert len(rep.scores) == small.n

    def test_easily_separable_data_scores_high(self):
        schema = Schema((VariableDecl("x", ("a", "b")), VariableDecl("c", ("c0", "c1"))), 1)
        cases = [(0, 0)] * 40 + [(1, 1)] * 40
        ds = Dataset.from_cases(schema, cases)
        rep = cross_validate(ds, ModelKind.NB, ScoreKind.BIC, k=4, seed=0, cfg=FAST)
        assert rep.accuracy == 1.0
        assert rep.ce < 0.2
        assert rep.auc == 1.0

    def test_multiclass_has_no_auc(self):
        schema = Schema((VariableDecl("x", ("a", "b")), VariableDecl("c", ("c0", "c1", "c2"))), 1)
        rng = np.random.default_rng(5)
        cases = [(int(rng.integers(0, 2)), int(rng.integers(0, 3))) for _ in range(60)]
        ds = Dataset.from_cases(schema, cases)
        rep = cross_validate(ds, ModelKind.NB, ScoreKind.BIC, k=3, seed=0, cfg=FAST)
        assert rep.auc is None

    def test_discretize_runs_inside_folds(self):
        schema = Schema((VariableDecl("x", None), VariableDecl("c", ("c0", "c1"))), 1)
        rng = np.random.default_rng(6)
        x0 = rng.normal(0, 1, 60)
        x1 = rng.normal(6, 1, 60)
        ds = Dataset(schema, np.column_stack([np.r_[x0, x1], np.r_[np.zeros(60), np.ones(60)]]))
        rep = cross_validate(ds, ModelKind.NB, ScoreKind.BIC, k=4, seed=2, cfg=FAST, discretize=True)
        assert rep.accuracy > 0.95

    def test_fan_cv_on_toy(self, toy_nb):
        small = toy_nb.subset(np.arange(300))
        rep = cross_validate(small, ModelKind.FAN, ScoreKind.ICL, k=3, seed=7, cfg=FAST, r_max=2)
        assert 0.5 < rep.accuracy <= 1.0
        assert all(f.selected_r_h in (1, 2) for f in rep.per_fold)


class TestHoldout:
    def test_against_known_model(self):
        rng = np.random.default_rng(8)
        gen = random_discrete_model(ModelKind.NB, rng, n_features=3)
        test = gen.sample(500, seed=2)
        rep = evaluate_holdout(gen, test)
        assert 0 <= rep.accuracy <= 1
        assert rep.auc is not None
        assert rep.per_fold == ()


@pytest.fixture(scope="module")
def gs():
    rng = np.random.default_rng(9)
    return random_discrete_model(ModelKind.FAN, rng, n_features=3, r_h=2, arity=3)


class TestGsExperiment:

    def test_rows_and_determinism(self, gs):
        kwargs = dict(
            train_sizes=[80, 160],
            replications=2,
            score_kind=ScoreKind.BIC,
            seed=5,
            test_size=200,
            r_max=2,
            cfg=FAST,
        )
        cells_a = gs_experiment(gs, **kwargs)
        cells_b = gs_experiment(gs, **kwargs)
        assert cells_a == cells_b
        assert len(cells_a) == 4
        for c in cells_a:
            assert c.status == "ok"
            assert c.structural_diff == c.selected_r_h - gs.r_h
            assert 0 <= c.accuracy <= 1

    def test_single_replication_skips_correlation(self, gs):
        cells = gs_experiment(
            gs, train_sizes=[50, 80, 120], replications=1, score_kind=ScoreKind.BIC,
            seed=1, test_size=100, r_max=2, cfg=FAST,
        )
        assert len(cells) == 3
        assert experiment_correlation(cells) is None  # below the 5-row floor

    def test_constant_columns_skip_correlation(self, gs):
        from mixfan.protocol import ExperimentCell

        cells = tuple(
            ExperimentCell(100, r, r, "ok", 2, 2, 0, 0.8, None, 0.5) for r in range(6)
        )
        assert experiment_correlation(cells) is None

    def test_single_component_truth_recovered(self):
        # parsimony tie-break keeps the search at one component on data
        # generated without a mixture, so the structural difference is 0
        rng = np.random.default_rng(31)
        gen = random_discrete_model(ModelKind.FAN, rng, n_features=3, r_h=1, arity=3)
        cells = gs_experiment(
            gen, train_sizes=[500], replications=10, score_kind=ScoreKind.ICL,
            seed=6, test_size=200, r_max=2, cfg=FAST,
        )
        zeros = sum(1 for c in cells if c.structural_diff == 0)
        assert zeros >= 8, [c.selected_r_h for c in cells]


class TestCompare:
    def test_two_datasets_paired(self):
        rng = np.random.default_rng(10)
        named = []
        for i in range(3):
            gen = random_discrete_model(ModelKind.FAN, rng, n_features=3, r_h=2)
            named.append((f"db{i}", gen.sample(120, seed=20 + i)))
        rep = compare_on_datasets(
            named, ModelKind.FAN, ModelKind.NB, ScoreKind.BIC, k=3, seed=4, cfg=FAST, r_max=2
        )
        assert len(rep.rows) == 3
        for r in rep.rows:
            assert 0 <= r.acc_a <= 1 and 0 <= r.acc_b <= 1
            assert 0 <= r.mcnemar_p <= 1
        for t in (rep.accuracy_magnitude, rep.accuracy_significance, rep.ce_comparison):
            assert 0 <= t.p_value <= 1
