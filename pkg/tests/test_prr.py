from __future__ import annotations

import numpy as np
import pytest

from builders import make_score_vector, make_uncertainty, random_quality_vector
from oracles import min_pr_bruteforce, pr_value_oracle
from uqsum.numerics import rank_ascending
from uqsum.prr import (
    pr_oracle,
    pr_random_expected,
    pr_random_mean,
    pr_value,
    prr,
    risk_from_nlg,
)

EXAMPLE_SCORES = [0, 0.56, 0.47, 1]
EXAMPLE_RISK = [1, 0.44, 0.53, 0]
# Hand cumulative sums over the worked-example risk vector:
# oracle order [3, 1, 2, 0] -> cumsum [0, 0.44, 0.97, 1.97], mean 0.845
# worst order  [0, 2, 1, 3] -> cumsum [1, 1.53, 1.97, 1.97], mean 1.6175
EXAMPLE_PR_ORACLE = 0.845
EXAMPLE_PR_WORST = 1.6175
# Closed-form random expectation ((N+1)/2N) * sum(risk) = (5/8) * 1.97
EXAMPLE_PR_RANDOM = 1.23125


class TestRiskFromNlg:
    def test_worked_example(self):
        np.testing.assert_allclose(risk_from_nlg(make_score_vector(EXAMPLE_SCORES)), EXAMPLE_RISK, atol=1e-12)

    def test_constant_scores_give_half_risk(self):
        np.testing.assert_array_equal(risk_from_nlg(make_score_vector([3, 3, 3])), [0.5, 0.5, 0.5])

    def test_two_point_case(self):
        np.testing.assert_allclose(risk_from_nlg(make_score_vector([0, 1])), [1, 0], atol=1e-15)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            risk_from_nlg(make_score_vector([]))

    def test_rejects_uncertainty_orientation(self):
        with pytest.raises(ValueError):
            risk_from_nlg(make_uncertainty([1, 2]))


class TestPrValue:
    def test_oracle_order_hand_cumsum(self):
        order = rank_ascending(EXAMPLE_RISK)
        np.testing.assert_array_equal(order, [3, 1, 2, 0])
        cumsum = np.cumsum(np.asarray(EXAMPLE_RISK)[order])
        np.testing.assert_allclose(cumsum, [0, 0.44, 0.97, 1.97], atol=1e-12)
        assert pr_value(EXAMPLE_RISK, order) == pytest.approx(EXAMPLE_PR_ORACLE, abs=1e-12)

    def test_worst_order_hand_cumsum(self):
        order = rank_ascending(-np.asarray(EXAMPLE_RISK))
        assert pr_value(EXAMPLE_RISK, order) == pytest.approx(EXAMPLE_PR_WORST, abs=1e-12)

    def test_zero_risk_gives_zero(self):
        assert pr_value([0, 0, 0], [2, 0, 1]) == 0.0

    def test_matches_plain_python_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            risk = rng.uniform(0, 1, size=rng.integers(2, 12))
            order = rng.permutation(risk.size)
            assert pr_value(risk, order) == pytest.approx(pr_value_oracle(risk, order), abs=1e-12)

    def test_length_mismatch_error(self):
        with pytest.raises(ValueError):
            pr_value([1, 0], [0, 1, 2])

    def test_non_permutation_error(self):
        with pytest.raises(ValueError):
            pr_value([1, 0, 0.5], [0, 0, 2])


class TestPrOracle:
    def test_worked_example(self):
        assert pr_oracle(make_score_vector(EXAMPLE_SCORES)) == pytest.approx(EXAMPLE_PR_ORACLE, abs=1e-12)

    def test_single_sample_returns_its_risk(self):
        assert pr_oracle(make_score_vector([42.0])) == 0.5

    def test_invariant_under_input_permutation(self):
        rng = np.random.default_rng(3)
        values = rng.uniform(size=9).tolist()
        direct = pr_oracle(make_score_vector(values))
        shuffled = pr_oracle(make_score_vector(list(reversed(values))))
        assert direct == pytest.approx(shuffled, abs=1e-12)

    def test_is_minimum_over_all_permutations(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            scores = make_score_vector(rng.uniform(size=n).tolist())
            risk = risk_from_nlg(scores)
            assert pr_oracle(scores) == min_pr_bruteforce(risk)


class TestPrRandom:
    def test_closed_form_worked_example(self):
        assert pr_random_expected(make_score_vector(EXAMPLE_SCORES)) == pytest.approx(EXAMPLE_PR_RANDOM, abs=1e-12)

    def test_monte_carlo_near_closed_form(self):
        value = pr_random_mean(make_score_vector(EXAMPLE_SCORES), alpha=1000, seed=42)
        assert abs(value - EXAMPLE_PR_RANDOM) <= 0.03

    def test_zero_risk_any_alpha(self):
        assert pr_random_mean(make_score_vector([5, 5, 5, 5]), alpha=3, seed=0) == pytest.approx(
            pr_random_expected(make_score_vector([5, 5, 5, 5]))
        )

    def test_bit_identical_for_same_seed(self):
        scores = make_score_vector(np.random.default_rng(0).uniform(size=40).tolist())
        a = pr_random_mean(scores, alpha=200, seed=42)
        b = pr_random_mean(scores, alpha=200, seed=42)
        assert a == b

    def test_seed_changes_value(self):
        scores = make_score_vector(np.random.default_rng(0).uniform(size=40).tolist())
        assert pr_random_mean(scores, alpha=50, seed=1) != pr_random_mean(scores, alpha=50, seed=2)

    def test_rejects_alpha_below_one(self):
        with pytest.raises(ValueError):
            pr_random_mean(make_score_vector([1, 2]), alpha=0, seed=0)


class TestPrr:
    def test_oracle_impersonation_is_exactly_one(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            quality = random_quality_vector(rng, 30)
            unc = make_uncertainty([-v for v in quality.values], ids=quality.ids)
            assert prr(unc, quality, alpha=20, seed=1).prr == 1.0

    def test_anti_oracle_worked_example(self):
        quality = make_score_vector(EXAMPLE_SCORES)
        unc = make_uncertainty(EXAMPLE_SCORES, ids=quality.ids)
        result = prr(unc, quality, random_baseline="closed_form")
        # (1.6175 - 1.23125) / (0.845 - 1.23125) = -1 (worst and oracle orders
        # are mirrors, so their PR values average to the random expectation)
        assert result.prr == pytest.approx(-1.0, abs=1e-12)
        assert result.pr_uncertainty == pytest.approx(EXAMPLE_PR_WORST, abs=1e-12)
        assert result.pr_oracle == pytest.approx(EXAMPLE_PR_ORACLE, abs=1e-12)

    def test_constant_quality_flags_degenerate(self):
        quality = make_score_vector([2, 2, 2, 2])
        unc = make_uncertainty([1, 2, 3, 4], ids=quality.ids)
        result = prr(unc, quality, alpha=10, seed=0)
        assert result.prr == 0.0
        assert result.degenerate

    def test_id_mismatch_is_error(self):
        quality = make_score_vector([1, 2, 3])
        unc = make_uncertainty([1, 2, 3], ids=("x", "y", "z"))
        with pytest.raises(ValueError, match="id lists"):
            prr(unc, quality)

    def test_rejects_quality_vector_in_uncertainty_slot(self):
        quality = make_score_vector([1, 2, 3])
        with pytest.raises(ValueError):
            prr(quality, quality)

    def test_monotone_transform_of_uncertainty_is_exact_noop(self):
        rng = np.random.default_rng(9)
        quality = random_quality_vector(rng, 25)
        u_values = rng.normal(size=25)
        base = prr(make_uncertainty(u_values.tolist(), ids=quality.ids), quality, alpha=50, seed=3)
        for transform in (lambda v: 3.0 * v + 7.0, np.exp, lambda v: v**3 + v):
            moved = prr(
                make_uncertainty(transform(u_values).tolist(), ids=quality.ids),
                quality,
                alpha=50,
                seed=3,
            )
            assert moved.prr == base.prr

    def test_affine_transform_of_quality_within_tolerance(self):
        rng = np.random.default_rng(13)
        quality_values = rng.uniform(size=25)
        unc = make_uncertainty(rng.normal(size=25).tolist())
        base = prr(unc, make_score_vector(quality_values.tolist()), alpha=50, seed=3)
        moved = prr(unc, make_score_vector((2.5 * quality_values + 1.0).tolist()), alpha=50, seed=3)
        assert moved.prr == pytest.approx(base.prr, abs=1e-9)

    def test_oracle_never_worse_than_random_baseline(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            quality = random_quality_vector(rng, 15)
            result = prr(make_uncertainty(rng.normal(size=15).tolist(), ids=quality.ids), quality, alpha=30, seed=2)
            assert result.pr_oracle <= result.pr_random_mean + 1e-9

    def test_random_uncertainty_prr_centers_on_zero(self):
        rng = np.random.default_rng(17)
        quality = random_quality_vector(rng, 100)
        values = [
            prr(
                make_uncertainty(rng.normal(size=100).tolist(), ids=quality.ids),
                quality,
                random_baseline="closed_form",
            ).prr
            for _ in range(200)
        ]
        assert abs(float(np.mean(values))) <= 0.05
