import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import mimlrank as mr
from mimlrank.objective import MARGIN, contrast_pool, harmonic
from mimlrank.scoring import score_all_labels
from conftest import direct_score_model, random_bag, random_model, unit_bag


# ---------------------------------------------------------------- pool rules

def test_pool_for_real_label_adds_dummy():
    ls = mr.LabelSpace(4)
    bag = mr.make_bag("b", [[0.0]], [0, 2])
    assert contrast_pool(bag, 0, ls) == [1, 3, 4]


def test_pool_for_dummy_is_irrelevant_labels_only():
    ls = mr.LabelSpace(4)
    bag = mr.make_bag("b", [[0.0]], [0, 2])
    assert contrast_pool(bag, ls.dummy_id, ls) == [1, 3]


def test_pool_empty_when_bag_has_every_label():
    ls = mr.LabelSpace(3)
    bag = mr.make_bag("b", [[0.0]], [0, 1, 2])
    with pytest.raises(mr.NoTrainableContrast, match="no trainable contrast"):
        contrast_pool(bag, ls.dummy_id, ls)


def test_pool_rejects_labels_outside_the_relevant_set():
    ls = mr.LabelSpace(3)
    bag = mr.make_bag("b", [[0.0]], [0])
    with pytest.raises(ValueError):
        contrast_pool(bag, 1, ls)


# ------------------------------------------------------------------- counts

def test_rank_count_cases():
    # pool labels score (0.7, 0.4, 0.6) via direct construction, f_y = 0.5
    model = direct_score_model([0.5, 0.7, 0.4, 0.6, -9.0])
    bag = unit_bag([0])
    assert mr.rank_count(model, bag, 0) == 2
    low = direct_score_model([5.0, 0.7, 0.4, 0.6, -9.0])
    assert mr.rank_count(low, bag, 0) == 0


def test_margin_violation_count_cases():
    model = direct_score_model([0.5, 0.7, 0.4, -0.6, -9.0])
    bag = unit_bag([0])
    # 0.7 and 0.4 sit above f_y - 1 = -0.5; -0.6 and the dummy (-9) do not
    assert mr.margin_violation_count(model, bag, 0) == 2
    huge = direct_score_model([50.0, 0.7, 0.4, -0.6, -9.0])
    assert mr.margin_violation_count(huge, bag, 0) == 0


def test_counts_match_brute_force(rng):
    for _ in range(50):
        model = random_model(rng)
        bag = random_bag(rng, model)
        y = bag.labels[0]
        scores = score_all_labels(model, bag)
        pool = contrast_pool(bag, y, model.label_space)
        assert mr.rank_count(model, bag, y) == sum(scores[j] > scores[y] for j in pool)
        assert mr.margin_violation_count(model, bag, y) == sum(
            scores[j] > scores[y] - MARGIN for j in pool
        )


# ----------------------------------------------------------- ranking error

def test_ranking_error_values():
    assert mr.ranking_error(0) == 0.0
    assert mr.ranking_error(1) == 1.0
    assert mr.ranking_error(3) == pytest.approx(11 / 6)
    with pytest.raises(ValueError):
        mr.ranking_error(-1)


@given(st.integers(0, 200))
def test_ranking_error_monotone(r):
    assert mr.ranking_error(r + 1) > mr.ranking_error(r)


# ---------------------------------------------------------------- surrogate

def test_surrogate_zero_without_violations():
    model = direct_score_model([10.0, 0.0, -1.0, 0.5])
    assert mr.surrogate_loss(model, unit_bag([0]), 0) == 0.0


def test_surrogate_single_violator():
    # pool for y=0 is {label 1, dummy}; only label 1 violates, half a unit
    # below f_y, so the surrogate is H(1) * 0.5 / 1
    model = direct_score_model([0.5, 0.0, -30.0])
    assert mr.surrogate_loss(model, unit_bag([0]), 0) == pytest.approx(0.5)


def test_surrogate_equals_conditional_expectation_of_sampled_loss(rng):
    # for small label sets, enumerate the sampling scheme: uniform over the
    # margin-violated pool labels, each weighted by the harmonic error of the
    # violation count
    for _ in range(50):
        model = random_model(rng, L=int(rng.integers(2, 7)))
        bag = random_bag(rng, model)
        y = bag.labels[int(rng.integers(0, len(bag.labels)))]
        scores = score_all_labels(model, bag)
        pool = contrast_pool(bag, y, model.label_space)
        violated = [j for j in pool if scores[j] > scores[y] - MARGIN]
        psi = mr.surrogate_loss(model, bag, y)
        if not violated:
            assert psi == 0.0
            continue
        weight = harmonic(len(violated))
        expected = np.mean([weight * (MARGIN + scores[j] - scores[y]) for j in violated])
        assert psi == pytest.approx(expected, rel=1e-12)


def test_surrogate_non_increasing_in_target_score_at_fixed_violation_count():
    # monotonicity holds while the violation count stays constant; at count
    # transitions the normalizer jumps, so the comparison is restricted
    pool_scores = [0.3, -0.2, -0.7]
    for f_lo, f_hi in [(0.0, 0.2), (0.35, 0.60), (0.9, 1.1), (1.4, 2.0)]:
        lo = direct_score_model([f_lo] + pool_scores + [-30.0])
        hi = direct_score_model([f_hi] + pool_scores + [-30.0])
        bag = unit_bag([0])
        if mr.margin_violation_count(lo, bag, 0) == mr.margin_violation_count(hi, bag, 0):
            assert mr.surrogate_loss(hi, bag, 0) <= mr.surrogate_loss(lo, bag, 0) + 1e-12


# ------------------------------------------------------------- triplet loss

def test_triplet_loss_inactive_when_separated():
    model = direct_score_model([1.5, 0.2, 0.4])
    bag = unit_bag([0])
    assert mr.triplet_loss(model, bag, 0, 1, 2.0) == 0.0


def test_triplet_loss_equal_scores_pay_the_margin():
    model = direct_score_model([0.2, 0.2, 0.4])
    assert mr.triplet_loss(model, unit_bag([0]), 0, 1, 1.5) == pytest.approx(1.5)


def test_triplet_loss_matches_recomputation(rng):
    for _ in range(30):
        model = random_model(rng)
        bag = random_bag(rng, model)
        y = bag.labels[0]
        pool = contrast_pool(bag, y, model.label_space)
        y_neg = pool[int(rng.integers(0, len(pool)))]
        w = float(rng.uniform(0, 3))
        f_y = mr.bag_score(model, bag, y).score
        f_n = mr.bag_score(model, bag, y_neg).score
        assert mr.triplet_loss(model, bag, y, y_neg, w) == pytest.approx(
            w * max(0.0, 1.0 + f_n - f_y), rel=1e-12
        )
    with pytest.raises(ValueError):
        mr.triplet_loss(model, bag, y, y_neg, -0.5)


# -------------------------------------------------------------- rank weight

def test_harmonic_weight_values():
    assert mr.harmonic_weight(5, 2) == pytest.approx(1.5)  # floor(5/2) = 2
    assert mr.harmonic_weight(5, 1) == pytest.approx(harmonic(5))
    assert mr.harmonic_weight(5, 5) == 1.0
    with pytest.raises(ValueError):
        mr.harmonic_weight(5, 0)
    with pytest.raises(ValueError):
        mr.harmonic_weight(5, 6)


def test_expected_inverse_rank_values():
    assert mr.expected_inverse_rank(0.5) == pytest.approx(math.log(2), abs=1e-15)
    assert abs(mr.expected_inverse_rank(0.999) - 1.0) < 0.01
    assert mr.expected_inverse_rank(0.1) == pytest.approx(0.1 * math.log(10) / 0.9, abs=1e-15)
    for bad in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValueError):
            mr.expected_inverse_rank(bad)


def test_floored_rank_estimate_tracks_closed_form_expectation():
    # the single-draw estimate floor(|pool| / v) averages to the closed-form
    # inverse-rank expectation times the pool size, within 10% across the
    # usable probability range
    rng = np.random.default_rng(88)
    pool_size = 50
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        draws = rng.geometric(p, size=300_000)
        v = draws[draws <= pool_size][:100_000]
        estimate = np.mean(pool_size // v) / pool_size
        assert abs(estimate - mr.expected_inverse_rank(p)) / mr.expected_inverse_rank(p) < 0.10


def test_expected_inverse_rank_against_monte_carlo():
    rng = np.random.default_rng(314)
    p = 0.37
    draws = rng.geometric(p, size=10**6)
    samples = 1.0 / draws
    sem = samples.std(ddof=1) / np.sqrt(samples.size)
    assert abs(samples.mean() - mr.expected_inverse_rank(p)) < 3 * sem


# -------------------------------------------------- upper-bound inequality

def test_strict_count_error_is_bounded_by_strict_surrogate(rng):
    # harmonic rank error with the strict count never exceeds the hinge
    # spread that uses the same strict count as weight and normalizer
    for _ in range(400):
        model = random_model(rng)
        bag = random_bag(rng, model)
        y = bag.labels[int(rng.integers(0, len(bag.labels)))]
        scores = score_all_labels(model, bag)
        pool = contrast_pool(bag, y, model.label_space)
        strict = mr.rank_count(model, bag, y)
        hinge_sum = sum(max(0.0, MARGIN + scores[j] - scores[y]) for j in pool)
        psi_strict = 0.0 if strict == 0 else harmonic(strict) / strict * hinge_sum
        assert mr.ranking_error(strict) <= psi_strict + 1e-9
