"""Exact and sampled forms of the weighted ranking objective.

For a bag and one of its relevant labels y, the contrast pool holds the
labels y must outrank: all irrelevant real labels, plus the dummy label
unless y *is* the dummy.  A pool label is violated when it scores within a
unit margin of y.  The rank-sensitive weight is the harmonic number of the
violation count, which the trainer approximates from the sampling position
of the first violated label it draws.
"""
from __future__ import annotations

import math

import numpy as np

from .data import Bag, LabelSpace
from .model import Model
from .scoring import bag_score, score_all_labels

MARGIN = 1.0  # fixed hinge margin; not configurable


class NoTrainableContrast(ValueError):
    """The bag is relevant to every label, so nothing can be ranked below y."""


def contrast_pool(bag: Bag, y: int, label_space: LabelSpace) -> list[int]:
    """Labels that should rank below y, in ascending id order.

    For y == dummy the pool is the irrelevant real labels; for a real y the
    dummy belongs to the pool as well (it must sit below every relevant
    label).  Raises :class:`NoTrainableContrast` when the pool is empty.
    """
    relevant = set(bag.labels)
    pool = [l for l in range(label_space.num_labels) if l not in relevant]
    if y != label_space.dummy_id:
        pool.append(label_space.dummy_id)
    if y in pool:
        raise ValueError(f"label {y} is not a relevant label of bag {bag.id!r}")
    if not pool:
        raise NoTrainableContrast(f"bag {bag.id!r}: no trainable contrast for the dummy label")
    return pool


def harmonic(n: int) -> float:
    """The n-th harmonic number; 0 for n == 0."""
    return sum(1.0 / i for i in range(1, n + 1))


def ranking_error(rank: int) -> float:
    """Rank-sensitive error: harmonic number of how many labels outrank l."""
    if rank < 0:
        raise ValueError(f"rank must be >= 0, got {rank}")
    return harmonic(rank)


def _pool_scores(model: Model, bag: Bag, label: int) -> tuple[np.ndarray, float]:
    scores = score_all_labels(model, bag)
    pool = contrast_pool(bag, label, model.label_space)
    return scores[pool], float(scores[label])


def rank_count(model: Model, bag: Bag, label: int) -> int:
    """How many pool labels strictly outscore the given label."""
    pool_scores, f_l = _pool_scores(model, bag, label)
    return int(np.sum(pool_scores > f_l))


def margin_violation_count(model: Model, bag: Bag, label: int) -> int:
    """How many pool labels score within the unit margin: f_j > f_l - 1."""
    pool_scores, f_l = _pool_scores(model, bag, label)
    return int(np.sum(pool_scores > f_l - MARGIN))


def surrogate_loss(model: Model, bag: Bag, label: int) -> float:
    """Hinge surrogate of the ranking error for one (bag, label) pair.

    The error weight is spread uniformly over the margin-violated pool
    labels; 0 when nothing violates.
    """
    pool_scores, f_l = _pool_scores(model, bag, label)
    hinges = np.maximum(0.0, MARGIN + pool_scores - f_l)
    violations = int(np.sum(pool_scores > f_l - MARGIN))
    if violations == 0:
        return 0.0
    return float(harmonic(violations) / violations * hinges.sum())


def triplet_loss(model: Model, bag: Bag, y: int, y_neg: int, weight: float) -> float:
    """Weighted hinge between a relevant label and one pool label."""
    if weight < 0:
        raise ValueError(f"weight must be >= 0, got {weight}")
    f_y = bag_score(model, bag, y).score
    f_neg = bag_score(model, bag, y_neg).score
    return weight * max(0.0, MARGIN + f_neg - f_y)


def harmonic_weight(pool_size: int, v: int) -> float:
    """Sampled approximation of the rank weight.

    A violation first found at draw v out of a pool of the given size implies
    roughly ``pool_size / v`` violated labels; the weight is that estimate's
    harmonic number.
    """
    if not 1 <= v <= pool_size:
        raise ValueError(f"v must lie in [1, {pool_size}], got {v}")
    return harmonic(pool_size // v)


def expected_inverse_rank(p: float) -> float:
    """Closed form of E[1/v] when v is geometric with success probability p.

    Used by the test suite to validate the sampled rank estimator's bias:
    the value is -p * ln(p) / (1 - p), which approaches p only as p -> 1.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return -p * math.log(p) / (1.0 - p)
