"""Small shared helpers: seed derivation, float formatting, rank utilities."""

from __future__ import annotations

import numpy as np


def derive_seed(*parts: int) -> int:
    """Deterministically derive a child seed from integer components.

    Used to give independent, reproducible random streams to restarts,
    candidates, folds, and experiment cells without the streams overlapping.
    """
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0] % (2**63 - 1))


def fmt17(x: float) -> str:
    """Render a float as a decimal string with 17 significant digits.

    17 digits round-trip any IEEE-754 double exactly, so values written
    with this function reload bit-identically.
    """
    return format(float(x), ".17g")


def average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with tied values receiving the mean of their rank span."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks
