"""Schemas, datasets, CSV ingestion, and stratified fold plans.

A :class:`Dataset` stores its cases as a dense float matrix: discrete cells
hold the label index as a float, continuous cells hold the raw value, and
missing cells hold NaN.  Everything downstream (estimation, classification,
evaluation) works on column views of this matrix, so datasets are immutable
after construction and safe to share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .util import fmt17

Cell = int | float | None

SCHEMA_FORMAT_VERSION = 1


@dataclass(frozen=True)
class VariableDecl:
    """A named variable: discrete with labelled values, or continuous."""

    name: str
    labels: tuple[str, ...] | None = None  # None means continuous

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if self.labels is not None:
            if len(self.labels) < 2:
                raise ValueError(f"variable {self.name!r}: arity must be >= 2")
            if len(set(self.labels)) != len(self.labels):
                raise ValueError(f"variable {self.name!r}: duplicate value labels")

    @property
    def is_discrete(self) -> bool:
        return self.labels is not None

    @property
    def arity(self) -> int:
        if self.labels is None:
            raise ValueError(f"variable {self.name!r} is continuous")
        return len(self.labels)


@dataclass(frozen=True)
class Schema:
    """Ordered variable declarations with one designated discrete class variable."""

    variables: tuple[VariableDecl, ...]
    class_index: int

    def __post_init__(self) -> None:
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        if not 0 <= self.class_index < len(self.variables):
            raise ValueError("class_index out of range")
        cls = self.variables[self.class_index]
        if not cls.is_discrete:
            raise ValueError("class variable must be discrete")

    @property
    def class_var(self) -> VariableDecl:
        return self.variables[self.class_index]

    @property
    def n_classes(self) -> int:
        return self.class_var.arity

    @property
    def feature_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.variables)) if i != self.class_index)

    def index_of(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise KeyError(name)

    def to_dict(self) -> dict:
        out: dict = {"format_version": SCHEMA_FORMAT_VERSION, "class": self.class_var.name}
        out["variables"] = [
            {"name": v.name, "kind": "discrete", "labels": list(v.labels)}
            if v.is_discrete
            else {"name": v.name, "kind": "continuous"}
            for v in self.variables
        ]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        try:
            decls = []
            for entry in d["variables"]:
                if entry["kind"] == "discrete":
                    decls.append(VariableDecl(entry["name"], tuple(entry["labels"])))
                elif entry["kind"] == "continuous":
                    decls.append(VariableDecl(entry["name"]))
                else:
                    raise ParseError(f"unknown variable kind {entry['kind']!r}")
            names = [v.name for v in decls]
            class_index = names.index(d["class"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed schema: missing field {exc}") from exc
        except ValueError as exc:
            raise ParseError(f"malformed schema: class {d.get('class')!r} not declared") from exc
        return cls(tuple(decls), class_index)


def load_schema(path: str | Path) -> Schema:
    """Read a schema from its JSON file format."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    return Schema.from_dict(d)


def save_schema(schema: Schema, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2) + "\n", encoding="utf-8")


class Dataset:
    """Immutable case collection conforming to a :class:`Schema`.

    ``values`` is an (N, n_vars) float64 matrix; discrete cells store label
    indices, missing cells store NaN.  Construct from python cells with
    :meth:`from_cases` or from a file with :func:`load_csv`.
    """

    __slots__ = ("schema", "_values")

    def __init__(self, schema: Schema, values: np.ndarray):
        values = np.array(values, dtype=float)  # private copy; frozen below
        if values.ndim != 2 or values.shape[1] != len(schema.variables):
            raise ValueError("values must be (N, n_vars)")
        for i, v in enumerate(schema.variables):
            col = values[:, i]
            obs = col[~np.isnan(col)]
            if v.is_discrete:
                if obs.size and (np.any(obs != np.floor(obs)) or np.any(obs < 0) or np.any(obs >= v.arity)):
                    raise ValueError(f"column {v.name!r}: discrete index out of range")
            elif obs.size and not np.all(np.isfinite(obs)):
                raise ValueError(f"column {v.name!r}: non-finite continuous value")
        self.schema = schema
        self._values = values
        self._values.setflags(write=False)

    @classmethod
    def from_cases(cls, schema: Schema, cases: list[tuple[Cell, ...]]) -> "Dataset":
        n_vars = len(schema.variables)
        mat = np.full((len(cases), n_vars), np.nan)
        for r, case in enumerate(cases):
            if len(case) != n_vars:
                raise ValueError(f"case {r}: expected {n_vars} cells, got {len(case)}")
            for i, cell in enumerate(case):
                if cell is not None:
                    mat[r, i] = float(cell)
        return cls(schema, mat)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.shape[0]

    def __len__(self) -> int:
        return self.n

    def column(self, i: int) -> np.ndarray:
        return self._values[:, i]

    def class_column(self) -> np.ndarray:
        return self._values[:, self.schema.class_index]

    def case(self, r: int) -> tuple[Cell, ...]:
        out: list[Cell] = []
        for i, v in enumerate(self.schema.variables):
            x = self._values[r, i]
            if np.isnan(x):
                out.append(None)
            elif v.is_discrete:
                out.append(int(x))
            else:
                out.append(float(x))
        return tuple(out)

    @property
    def cases(self) -> list[tuple[Cell, ...]]:
        return [self.case(r) for r in range(self.n)]

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.schema, self._values[np.asarray(indices, dtype=int)].copy())


def load_csv(path: str | Path, schema: Schema, missing_marker: str = "?") -> Dataset:
    """Parse a comma-separated file into a :class:`Dataset`.

    The first line must be a header repeating the schema's variable names in
    order.  Discrete cells must match a declared label exactly; cells equal
    to ``missing_marker`` become missing.  No quoting is supported.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    names = [v.name for v in schema.variables]
    header = lines[0].split(",")
    if [h.strip() for h in header] != names:
        raise ParseError(f"{path}: header {header!r} does not match schema variables {names!r}")
    label_maps = [
        {lab: k for k, lab in enumerate(v.labels)} if v.is_discrete else None
        for v in schema.variables
    ]
    rows = []
    for r, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(names):
            raise ParseError(f"{path}: row {r}: expected {len(names)} columns, got {len(cells)}")
        row = np.full(len(names), np.nan)
        for i, raw in enumerate(cells):
            raw = raw.strip()
            if raw == missing_marker:
                continue
            lm = label_maps[i]
            if lm is not None:
                if raw not in lm:
                    raise ParseError(
                        f"{path}: row {r}, column {names[i]}: unknown label {raw!r}"
                    )
                row[i] = lm[raw]
            else:
                try:
                    row[i] = float(raw)
                except ValueError as exc:
                    raise ParseError(
                        f"{path}: row {r}, column {names[i]}: not a number: {raw!r}"
                    ) from exc
        rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return Dataset(schema, np.vstack(rows))


def save_csv(ds: Dataset, path: str | Path, missing_marker: str = "?") -> None:
    """Write a dataset back to the CSV format accepted by :func:`load_csv`."""
    schema = ds.schema
    lines = [",".join(v.name for v in schema.variables)]
    for r in range(ds.n):
        cells = []
        for i, v in enumerate(schema.variables):
            x = ds.values[r, i]
            if np.isnan(x):
                cells.append(missing_marker)
            elif v.is_discrete:
                cells.append(v.labels[int(x)])
            else:
                cells.append(fmt17(x))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Assignment of every case to one of ``k`` folds."""

    k: int
    assignments: np.ndarray = field(repr=False)
    seed: int

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def stratified_folds(ds: Dataset, k: int, seed: int) -> FoldPlan:
    """Partition cases into ``k`` folds preserving class proportions.

    Within every class value the shuffled cases are dealt round-robin, so
    per-class fold counts differ by at most one; the deal offset carries
    across classes, keeping overall fold sizes balanced too.  Deterministic
    given ``seed``.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > ds.n:
        raise ValueError(f"k={k} exceeds case count {ds.n}")
    y = ds.class_column()
    if np.any(np.isnan(y)):
        bad = int(np.flatnonzero(np.isnan(y))[0])
        raise ValueError(f"case {bad} has a missing class value")
    y = y.astype(int)
    rng = np.random.default_rng(seed)
    assignments = np.full(ds.n, -1, dtype=int)
    offset = 0
    for c in range(ds.schema.n_classes):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(len(idx))]
        for p, case_i in enumerate(idx):
            assignments[case_i] = (offset + p) % k
        offset = (offset + len(idx)) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)
