import numpy as np
import pytest

from mixfan import (
    Dataset,
    ParseError,
    Schema,
    VariableDecl,
    load_csv,
    load_schema,
    save_csv,
    save_schema,
    stratified_folds,
)


@pytest.fixture
def mixed_schema():
    return Schema(
        (
            VariableDecl("X1", ("a", "b")),
            VariableDecl("X2", None),
            VariableDecl("C", ("c1", "c2")),
        ),
        class_index=2,
    )


class TestSchema:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            Schema((VariableDecl("x", ("a", "b")), VariableDecl("x", ("a", "b"))), 0)

    def test_continuous_class_rejected(self):
        with pytest.raises(ValueError, match="class"):
            Schema((VariableDecl("x", None), VariableDecl("c", ("a", "b"))), 0)

    def test_arity_below_two_rejected(self):
        with pytest.raises(ValueError, match="arity"):
            VariableDecl("x", ("only",))

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            VariableDecl("x", ("a", "a"))

    def test_json_roundtrip(self, mixed_schema, tmp_path):
        path = tmp_path / "s.json"
        save_schema(mixed_schema, path)
        assert load_schema(path) == mixed_schema

    def test_malformed_schema_file(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text('{"variables": []}')
        with pytest.raises(ParseError):
            load_schema(path)


class TestLoadCsv:
    def test_basic_row_mapping(self, mixed_schema, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("X1,X2,C\na,2.5,c1\n")
        ds = load_csv(p, mixed_schema)
        assert ds.cases == [(0, 2.5, 0)]

    def test_missing_marker_substitution(self, mixed_schema, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("X1,X2,C\n?,2.5,c1\n")
        ds = load_csv(p, mixed_schema)
        assert ds.cases == [(None, 2.5, 0)]

    def test_unknown_label_names_row_and_column(self, mixed_schema, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("X1,X2,C\nz,2.5,c1\n")
        with pytest.raises(ParseError, match=r"row 1, column X1"):
            load_csv(p, mixed_schema)

    def test_non_numeric_continuous_cell(self, mixed_schema, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("X1,X2,C\na,oops,c1\n")
        with pytest.raises(ParseError, match=r"row 1, column X2"):
            load_csv(p, mixed_schema)

    def test_row_arity_mismatch(self, mixed_schema, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("X1,X2,C\na,2.5\n")
        with pytest.raises(ParseError, match="columns"):
            load_csv(p, mixed_schema)

    def test_header_must_match(self, mixed_schema, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("X1,WRONG,C\na,2.5,c1\n")
        with pytest.raises(ParseError, match="header"):
            load_csv(p, mixed_schema)

    def test_custom_missing_marker(self, mixed_schema, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("X1,X2,C\nNA,2.5,c1\n")
        ds = load_csv(p, mixed_schema, missing_marker="NA")
        assert ds.cases[0][0] is None

    def test_csv_roundtrip(self, mixed_schema, tmp_path):
        cases = [(0, 2.5, 0), (None, -1.25e-7, 1), (1, None, 0)]
        ds = Dataset.from_cases(mixed_schema, cases)
        p = tmp_path / "out.csv"
        save_csv(ds, p)
        assert load_csv(p, mixed_schema).cases == cases


class TestDataset:
    def test_out_of_range_discrete_index(self, mixed_schema):
        with pytest.raises(ValueError, match="out of range"):
            Dataset.from_cases(mixed_schema, [(2, 1.0, 0)])

    def test_empty_dataset_allowed(self, mixed_schema):
        assert Dataset.from_cases(mixed_schema, []).n == 0

    def test_values_read_only(self, mixed_schema):
        ds = Dataset.from_cases(mixed_schema, [(0, 1.0, 0)])
        with pytest.raises(ValueError):
            ds.values[0, 0] = 1


class TestStratifiedFolds:
    def _ds(self, labels):
        schema = Schema((VariableDecl("C", ("a", "b", "c")),), class_index=0)
        return Dataset.from_cases(schema, [(int(v),) for v in labels])

    def test_exact_divisibility_one_per_class(self):
        ds = self._ds([0] * 10 + [1] * 10)
        plan = stratified_folds(ds, 10, seed=1)
        y = ds.class_column().astype(int)
        for f in range(10):
            idx = plan.fold_indices(f)
            assert len(idx) == 2
            assert sorted(y[idx]) == [0, 1]

    def test_two_to_one_ratio(self):
        ds = self._ds([0] * 10 + [1] * 5)
        plan = stratified_folds(ds, 5, seed=9)
        y = ds.class_column().astype(int)
        for f in range(5):
            idx = plan.fold_indices(f)
            assert (y[idx] == 0).sum() == 2
            assert (y[idx] == 1).sum() == 1

    def test_deterministic_given_seed(self):
        ds = self._ds([0, 0, 0, 1, 1, 1, 2, 2, 2, 2])
        a = stratified_folds(ds, 3, seed=42)
        b = stratified_folds(ds, 3, seed=42)
        assert np.array_equal(a.assignments, b.assignments)

    def test_partition_and_stratification_invariants(self):
        rng = np.random.default_rng(0)
        for trial in range(25):
            labels = rng.integers(0, 3, size=rng.integers(8, 60))
            if len(np.unique(labels)) < 3:
                continue
            ds = self._ds(labels)
            k = int(rng.integers(2, min(8, ds.n) + 1))
            plan = stratified_folds(ds, k, seed=trial)
            all_idx = np.concatenate([plan.fold_indices(f) for f in range(k)])
            assert sorted(all_idx) == list(range(ds.n))  # disjoint cover
            y = ds.class_column().astype(int)
            for c in range(3):
                per_fold = [(y[plan.fold_indices(f)] == c).sum() for f in range(k)]
                assert max(per_fold) - min(per_fold) <= 1

    def test_k_above_n_rejected(self):
        ds = self._ds([0, 1, 2])
        with pytest.raises(ValueError, match="exceeds"):
            stratified_folds(ds, 5, seed=0)

    def test_missing_class_rejected(self):
        schema = Schema((VariableDecl("C", ("a", "b")),), class_index=0)
        ds = Dataset.from_cases(schema, [(0,), (None,), (1,)])
        with pytest.raises(ValueError, match="missing class"):
            stratified_folds(ds, 2, seed=0)
