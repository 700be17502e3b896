"""Significance tests used by the evaluation protocol.

All four tests return a :class:`TestResult` with a two-sided p-value.  The
discrete tests are exact at small n (binomial enumeration; the signed-rank
null distribution by dynamic programming over doubled ranks; rank-correlation
permutation) and switch to standard large-sample approximations above the
thresholds stated in each docstring.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as t_dist

from .errors import UndefinedStatistic
from .util import average_ranks

SIGNED_RANK_EXACT_N = 25
SPEARMAN_EXACT_N = 9


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    n: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value out of [0, 1]")


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mcnemar(paired_correctness: list[tuple[bool, bool]]) -> TestResult:
    """Exact two-sided binomial test on the discordant pairs.

    Input pairs are (A correct, B correct) per case.  Only cases where
    exactly one model is correct carry information; under the null each such
    case favors either model with probability one half.  The statistic is the
    signed normal-approximation z = (b - c) / sqrt(b + c) with b = A-only and
    c = B-only counts.
    """
    if not paired_correctness:
        raise ValueError("mcnemar needs at least one pair")
    b = sum(1 for a_ok, b_ok in paired_correctness if a_ok and not b_ok)
    c = sum(1 for a_ok, b_ok in paired_correctness if b_ok and not a_ok)
    n = b + c
    if n == 0:
        return TestResult(statistic=0.0, p_value=1.0, method="mcnemar-exact", n=0)
    k = min(b, c)
    tail = sum(math.comb(n, i) for i in range(k + 1)) / 2.0**n
    p = min(1.0, 2.0 * tail)
    z = (b - c) / math.sqrt(n)
    return TestResult(statistic=z, p_value=p, method="mcnemar-exact", n=n)


def _signed_rank_exact_p(ranks2: np.ndarray, w2_obs: int) -> float:
    """Exact two-sided tail of the doubled rank-sum statistic.

    ``ranks2`` holds the doubled (hence integral) ranks of the non-zero
    |differences|; under the null each joins the positive sum independently
    with probability one half.
    """
    total = int(ranks2.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in ranks2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:-r] if r > 0 else counts
        counts = 0.5 * (counts + shifted)
    p_le = counts[: w2_obs + 1].sum()
    p_ge = counts[w2_obs:].sum()
    return float(min(1.0, 2.0 * min(p_le, p_ge)))


def signed_rank(differences: list[float]) -> TestResult:
    """Two-sided signed-rank test of median zero.

    Zero differences are dropped; tied |differences| share average ranks.
    The statistic is the positive-rank sum.  The null distribution is exact
    up to n = 25 non-zero differences and a continuity-corrected normal
    approximation (with tie-adjusted variance) beyond.
    """
    d = np.asarray([x for x in differences if x != 0.0], dtype=float)
    n = len(d)
    if n == 0:
        return TestResult(statistic=0.0, p_value=1.0, method="signed-rank-exact", n=0)
    ranks = average_ranks(np.abs(d))
    w_pos = float(ranks[d > 0].sum())
    if n <= SIGNED_RANK_EXACT_N:
        ranks2 = np.round(2.0 * ranks).astype(int)  # average ranks are halves
        p = _signed_rank_exact_p(ranks2, int(round(2.0 * w_pos)))
        return TestResult(statistic=w_pos, p_value=p, method="signed-rank-exact", n=n)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var -= float(((tie_counts**3 - tie_counts) / 48.0).sum())
    if var <= 0:
        return TestResult(statistic=w_pos, p_value=1.0, method="signed-rank-normal", n=n)
    delta = w_pos - mean
    z = (delta - 0.5 * np.sign(delta)) / math.sqrt(var)
    p = min(1.0, 2.0 * _norm_sf(abs(z)))
    return TestResult(statistic=w_pos, p_value=p, method="signed-rank-normal", n=n)


def paired_t(differences: list[float]) -> TestResult:
    """Two-sided paired t-test on a list of differences (df = n - 1).

    Zero sample variance is degenerate: p = 0 when the common value is
    non-zero, else 1 (documented convention).
    """
    d = np.asarray(differences, dtype=float)
    n = len(d)
    if n < 2:
        raise ValueError("paired t-test needs at least two differences")
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TestResult(statistic=0.0, p_value=1.0, method="paired-t", n=n)
        return TestResult(statistic=math.copysign(math.inf, mean), p_value=0.0, method="paired-t", n=n)
    stat = mean / (sd / math.sqrt(n))
    p = min(1.0, 2.0 * float(t_dist.sf(abs(stat), n - 1)))
    return TestResult(statistic=stat, p_value=p, method="paired-t", n=n)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float((a @ a) * (b @ b)))
    return float(a @ b) / denom


def spearman_rho(a: list[float], b: list[float]) -> TestResult:
    """Rank correlation with average ranks on ties.

    The p-value is by full permutation for n <= 9 and by the t approximation
    with n - 2 degrees of freedom above.  A constant input sequence has no
    defined rank correlation.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length sequences")
    n = len(x)
    if n < 3:
        raise ValueError("rank correlation needs at least 3 pairs")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedStatistic("rank correlation of a constant sequence is undefined")
    rx = average_ranks(x)
    ry = average_ranks(y)
    rho = _pearson(rx, ry)
    if n <= SPEARMAN_EXACT_N:
        hits = 0
        total = 0
        target = abs(rho) - 1e-12
        for perm in itertools.permutations(range(n)):
            total += 1
            if abs(_pearson(rx, ry[list(perm)])) >= target:
                hits += 1
        return TestResult(statistic=rho, p_value=hits / total, method="spearman-exact", n=n)
    if abs(rho) >= 1.0:
        return TestResult(statistic=rho, p_value=0.0, method="spearman-t", n=n)
    stat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = min(1.0, 2.0 * float(t_dist.sf(abs(stat), n - 2)))
    return TestResult(statistic=rho, p_value=p, method="spearman-t", n=n)
