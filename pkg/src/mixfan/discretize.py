"""Class-driven discretization of continuous variables.

Cut points are chosen by recursive binary splitting: each split minimizes the
class-label entropy of the two sides and is kept only if its information gain
clears the minimum-description-length threshold

    gain > log2(N - 1) / N + [log2(3^kc - 2) - (kc*H - k1*H1 - k2*H2)] / N

where ``kc`` counts class values present in the segment and ``k1``/``k2`` in
the two sides.  Candidate cuts sit at midpoints between adjacent distinct
observed values.  Entropies here are in bits; everything else in the package
uses nats.

Binning is half-open with the upper side closed: cuts ``[c1, c2]`` produce
bins ``(-inf, c1)``, ``[c1, c2)``, ``[c2, inf)``, so a value equal to a cut
falls in the bin above it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, Schema, VariableDecl
from .errors import ParseError

MAP_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DiscretizationMap:
    """Strictly increasing cut points per variable name; b cuts give b+1 bins."""

    cuts: dict[str, tuple[float, ...]]

    def __post_init__(self) -> None:
        for name, cs in self.cuts.items():
            if any(b <= a for a, b in zip(cs, cs[1:])):
                raise ValueError(f"{name}: cut points must be strictly increasing")

    def n_bins(self, name: str) -> int:
        return len(self.cuts[name]) + 1

    def bin_labels(self, name: str) -> tuple[str, ...]:
        # no commas: labels must survive the package's unquoted CSV dialect
        cs = self.cuts[name]
        if not cs:
            return ("(-inf..inf)",)
        labels = [f"(-inf..{cs[0]!r})"]
        labels += [f"[{a!r}..{b!r})" for a, b in zip(cs, cs[1:])]
        labels.append(f"[{cs[-1]!r}..inf)")
        return tuple(labels)

    def merge(self, other: "DiscretizationMap") -> "DiscretizationMap":
        return DiscretizationMap({**self.cuts, **other.cuts})

    def to_json(self) -> str:
        payload = {
            "format_version": MAP_FORMAT_VERSION,
            "cuts": {name: list(cs) for name, cs in self.cuts.items()},
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DiscretizationMap":
        try:
            d = json.loads(text)
            if d["format_version"] != MAP_FORMAT_VERSION:
                raise ParseError(f"unsupported map format_version {d['format_version']!r}")
            cuts = {str(k): tuple(float(c) for c in v) for k, v in d["cuts"].items()}
        except ParseError:
            raise
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed discretization map: {exc}") from exc
        return cls(cuts)


def load_map(path: str | Path) -> DiscretizationMap:
    return DiscretizationMap.from_json(Path(path).read_text(encoding="utf-8"))


def save_map(dmap: DiscretizationMap, path: str | Path) -> None:
    Path(path).write_text(dmap.to_json(), encoding="utf-8")


def _entropy_bits(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def _best_cut(values: np.ndarray, labels: np.ndarray, n_classes: int) -> float | None:
    """One accepted MDL cut for a sorted segment, or None.

    Among midpoints between adjacent distinct values, picks the one with the
    lowest weighted class entropy (lowest cut on ties) and applies the MDL
    acceptance test.
    """
    n = len(values)
    distinct_end = np.flatnonzero(values[:-1] != values[1:])  # last index of each run
    if distinct_end.size == 0:
        return None

    total = np.bincount(labels, minlength=n_classes).astype(float)
    h_total = _entropy_bits(total)

    best = None  # (entropy, cut, left_counts)
    left = np.zeros(n_classes)
    prev = 0
    for boundary in distinct_end:
        split_at = boundary + 1  # values[:split_at] strictly below the midpoint
        left += np.bincount(labels[prev:split_at], minlength=n_classes)
        prev = split_at
        right = total - left
        h = (split_at / n) * _entropy_bits(left) + ((n - split_at) / n) * _entropy_bits(right)
        if best is None or h < best[0] - 1e-15:
            cut = 0.5 * (values[split_at - 1] + values[split_at])
            best = (h, cut, left.copy(), split_at)

    h_split, cut, left, split_at = best
    right = total - left
    gain = h_total - h_split
    kc = int((total > 0).sum())
    k1 = int((left > 0).sum())
    k2 = int((right > 0).sum())
    delta = math.log2(3**kc - 2) - (kc * h_total - k1 * _entropy_bits(left) - k2 * _entropy_bits(right))
    threshold = (math.log2(n - 1) + delta) / n
    if gain > threshold:
        return float(cut)
    return None


def discretize_supervised(ds: Dataset, var: int) -> DiscretizationMap:
    """Cut points for one continuous variable, driven by the class labels.

    Cases with the variable missing are ignored; such a case may have any
    class value, but a case with the variable observed must have a class.
    """
    decl = ds.schema.variables[var]
    if decl.is_discrete:
        raise ValueError(f"variable {decl.name!r} is discrete")
    x = ds.column(var)
    y = ds.class_column()
    mask = ~np.isnan(x)
    if np.any(np.isnan(y[mask])):
        raise ValueError(f"variable {decl.name!r}: observed case with missing class value")
    x = x[mask]
    y = y[mask].astype(int)
    order = np.argsort(x, kind="mergesort")
    x, y = x[order], y[order]
    n_classes = ds.schema.n_classes

    cuts: list[float] = []
    segments = [(0, len(x))]
    while segments:
        lo, hi = segments.pop()
        if hi - lo < 2:
            continue
        cut = _best_cut(x[lo:hi], y[lo:hi], n_classes)
        if cut is None:
            continue
        cuts.append(cut)
        mid = lo + int(np.searchsorted(x[lo:hi], cut, side="right"))
        if lo < mid < hi:  # guard against degenerate float midpoints
            segments.append((lo, mid))
            segments.append((mid, hi))
    return DiscretizationMap({decl.name: tuple(sorted(cuts))})


def discretize_all(ds: Dataset) -> DiscretizationMap:
    """Fit cuts for every continuous variable of the dataset."""
    merged = DiscretizationMap({})
    for i, v in enumerate(ds.schema.variables):
        if not v.is_discrete:
            merged = merged.merge(discretize_supervised(ds, i))
    return merged


def apply_discretization(ds: Dataset, dmap: DiscretizationMap) -> Dataset:
    """Rebuild the dataset with mapped variables turned into discrete bins.

    A value lands in the bin whose half-open interval contains it
    (``searchsorted`` with the cut array, equal values going up).  Missing
    stays missing.  Variables absent from the map pass through unchanged.
    """
    new_decls = []
    new_values = ds.values.copy()
    for i, v in enumerate(ds.schema.variables):
        if v.name not in dmap.cuts:
            new_decls.append(v)
            continue
        if v.is_discrete:
            raise ValueError(f"variable {v.name!r} is already discrete")
        cs = np.asarray(dmap.cuts[v.name])
        labels = dmap.bin_labels(v.name)
        if len(labels) < 2:
            # A single bin cannot form a legal discrete variable; pad with an
            # unreachable second bin so downstream arity invariants hold.
            labels = (labels[0], "(unused)")
        col = ds.column(i)
        obs = ~np.isnan(col)
        binned = np.full(ds.n, np.nan)
        binned[obs] = np.searchsorted(cs, col[obs], side="right")
        new_values[:, i] = binned
        new_decls.append(VariableDecl(v.name, labels))
    schema = Schema(tuple(new_decls), ds.schema.class_index)
    return Dataset(schema, new_values)
