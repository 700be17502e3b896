import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln

from mixfan import UndefinedStatistic, mcnemar, paired_t, signed_rank, spearman_rho


def _ranks(values):
    # independent average-rank helper for the oracles below
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def signed_rank_enumeration_p(diffs):
    """Oracle: enumerate all sign patterns of the non-zero differences."""
    d = [x for x in diffs if x != 0.0]
    n = len(d)
    ranks = _ranks([abs(x) for x in d])
    w_obs = sum(r for r, x in zip(ranks, d) if x > 0)
    le = ge = 0
    for pattern in itertools.product([0, 1], repeat=n):
        w = sum(r for r, bit in zip(ranks, pattern) if bit)
        le += w <= w_obs + 1e-12
        ge += w >= w_obs - 1e-12
    total = 2**n
    return min(1.0, 2.0 * min(le / total, ge / total))


class TestMcnemar:
    @staticmethod
    def _pairs(b, c, both=5, neither=4):
        return (
            [(True, False)] * b + [(False, True)] * c + [(True, True)] * both + [(False, False)] * neither
        )

    def test_eight_two_exact_value(self):
        res = mcnemar(self._pairs(8, 2))
        assert res.p_value == 112 / 1024  # 2 * (C(10,0)+C(10,1)+C(10,2)) / 2^10
        assert res.statistic == pytest.approx((8 - 2) / math.sqrt(10))

    def test_balanced_discordance_capped_at_one(self):
        assert mcnemar(self._pairs(5, 5)).p_value == 1.0

    def test_ten_zero_exact_value(self):
        res = mcnemar(self._pairs(10, 0))
        assert res.p_value == 2 / 1024

    def test_no_discordance_no_evidence(self):
        res = mcnemar(self._pairs(0, 0))
        assert res.p_value == 1.0 and res.statistic == 0.0

    def test_concordant_pairs_ignored(self):
        a = mcnemar(self._pairs(6, 3, both=2, neither=1))
        b = mcnemar(self._pairs(6, 3, both=40, neither=17))
        assert a.p_value == b.p_value and a.statistic == b.statistic

    def test_enumeration_oracle_on_random_tables(self):
        # oracle: count bit patterns of the discordant outcomes directly
        rng = np.random.default_rng(6)
        for _ in range(10):
            b = int(rng.integers(0, 7))
            c = int(rng.integers(0, 7))
            if b + c == 0:
                continue
            n = b + c
            k = min(b, c)
            hits = sum(1 for bits in itertools.product([0, 1], repeat=n) if sum(bits) <= k)
            expected = min(1.0, 2.0 * hits / 2**n)
            assert mcnemar(self._pairs(b, c)).p_value == pytest.approx(expected, abs=1e-15)


class TestSignedRank:
    def test_all_positive_ten(self):
        res = signed_rank([float(i) for i in range(1, 11)])
        assert res.statistic == 55.0
        assert res.p_value == 2 / 1024

    def test_antisymmetric_is_one(self):
        res = signed_rank([1.0, -1.0, 2.0, -2.0, 3.0, -3.0])
        assert res.p_value == 1.0

    def test_tied_magnitudes_against_enumeration(self):
        diffs = [1.0, 2.0, 3.0, 4.0, 5.0, -1.0]
        res = signed_rank(diffs)
        assert res.p_value == pytest.approx(signed_rank_enumeration_p(diffs), abs=1e-12)
        # |-1| ties |1| at rank 1.5; the rest rank 3..6
        assert res.statistic == pytest.approx(1.5 + 3 + 4 + 5 + 6)

    def test_zeros_dropped(self):
        assert signed_rank([0.0, 0.0, 1.0, 2.0]).n == 2

    def test_all_zero_is_one(self):
        res = signed_rank([0.0, 0.0])
        assert res.p_value == 1.0

    def test_enumeration_oracle_random_small(self):
        rng = np.random.default_rng(7)
        for _ in range(15):
            n = int(rng.integers(1, 11))
            diffs = rng.choice([-3.0, -2.0, -1.0, 1.0, 2.0, 3.0], size=n).tolist()
            assert signed_rank(diffs).p_value == pytest.approx(
                signed_rank_enumeration_p(diffs), abs=1e-12
            )

    def test_normal_approximation_large_n(self):
        rng = np.random.default_rng(8)
        d = rng.normal(0.3, 1.0, size=60).tolist()
        res = signed_rank(d)
        assert res.method == "signed-rank-normal"
        assert 0.0 <= res.p_value <= 1.0

    def test_invariant_under_odd_monotone_transform(self):
        rng = np.random.default_rng(9)
        d = rng.normal(0.5, 1.0, size=12).tolist()
        cubed = [x**3 for x in d]  # preserves sign and |.| order
        assert signed_rank(d).p_value == signed_rank(cubed).p_value
        assert signed_rank(d).statistic == signed_rank(cubed).statistic


class TestPairedT:
    def test_constant_nonzero_degenerate(self):
        res = paired_t([1.0, 1.0, 1.0, 1.0])
        assert res.p_value == 0.0

    def test_symmetric_zero_mean(self):
        res = paired_t([1.0, -1.0, 2.0, -2.0])
        assert res.statistic == 0.0 and res.p_value == 1.0

    def test_reference_example_against_quadrature(self):
        # {2, 0, 2, 0}: mean 1, sd 2/sqrt(3), t = sqrt(3), df 3
        res = paired_t([2.0, 0.0, 2.0, 0.0])
        assert res.statistic == pytest.approx(math.sqrt(3), rel=1e-12)

        def t_pdf(x, df):
            lognorm = gammaln((df + 1) / 2) - gammaln(df / 2) - 0.5 * math.log(df * math.pi)
            return math.exp(lognorm) * (1 + x * x / df) ** (-(df + 1) / 2)

        tail, _ = quad(t_pdf, res.statistic, np.inf, args=(3,))
        assert res.p_value == pytest.approx(2 * tail, abs=1e-9)
        assert res.p_value == pytest.approx(0.18169, abs=5e-5)

    def test_matches_quadrature_on_random_inputs(self):
        rng = np.random.default_rng(10)

        def t_pdf(x, df):
            lognorm = gammaln((df + 1) / 2) - gammaln(df / 2) - 0.5 * math.log(df * math.pi)
            return math.exp(lognorm) * (1 + x * x / df) ** (-(df + 1) / 2)

        for _ in range(5):
            d = rng.normal(0.4, 1.0, size=int(rng.integers(3, 12))).tolist()
            res = paired_t(d)
            tail, _ = quad(t_pdf, abs(res.statistic), np.inf, args=(len(d) - 1,))
            assert res.p_value == pytest.approx(2 * tail, abs=1e-8)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            paired_t([1.0])


class TestSpearman:
    def test_monotone_identity(self):
        res = spearman_rho([1.0, 2.0, 3.0, 4.0], [10.0, 20.0, 30.0, 40.0])
        assert res.statistic == pytest.approx(1.0)

    def test_monotone_reversal(self):
        res = spearman_rho([1.0, 2.0, 3.0, 4.0], [4.0, 3.0, 2.0, 1.0])
        assert res.statistic == pytest.approx(-1.0)

    def test_hand_computed_example(self):
        # ranks equal values; sum d^2 = 4; rho = 1 - 6*4/(4*15) = 0.6
        res = spearman_rho([1.0, 2.0, 3.0, 4.0], [2.0, 1.0, 4.0, 3.0])
        assert res.statistic == pytest.approx(0.6, abs=1e-12)

    def test_exact_permutation_p_small_n(self):
        a = [1.0, 2.0, 3.0, 4.0]
        b = [2.0, 1.0, 4.0, 3.0]
        res = spearman_rho(a, b)
        # oracle: d^2 formula over all 24 permutations (no ties)
        ra = _ranks(a)
        hits = 0
        for perm in itertools.permutations(_ranks(b)):
            d2 = sum((x - y) ** 2 for x, y in zip(ra, perm))
            rho = 1 - 6 * d2 / (4 * 15)
            hits += abs(rho) >= abs(res.statistic) - 1e-12
        assert res.p_value == pytest.approx(hits / 24, abs=1e-12)

    def test_t_approximation_large_n(self):
        rng = np.random.default_rng(11)
        a = rng.random(30).tolist()
        b = (np.asarray(a) + rng.normal(0, 0.3, 30)).tolist()
        res = spearman_rho(a, b)
        assert res.method == "spearman-t"
        assert res.statistic > 0 and res.p_value < 0.05

    def test_constant_input_undefined(self):
        with pytest.raises(UndefinedStatistic):
            spearman_rho([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            spearman_rho([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_p_values_in_range_random(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            n = int(rng.integers(3, 12))
            a = rng.random(n).tolist()
            b = rng.random(n).tolist()
            res = spearman_rho(a, b)
            assert 0.0 <= res.p_value <= 1.0
