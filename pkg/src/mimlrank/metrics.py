"""Label-ranking evaluation criteria and inspection reports.

All criteria operate on the real labels only (the dummy threshold label is
an internal training device) and average over bags.  Scores enter as one
row per bag over the L real labels; rank positions break ties toward the
smaller label id.  Bags whose truth set makes a criterion undefined (empty,
or empty complement for ranking loss) are skipped and counted.

Conventions pinned here:

* hamming loss    mean |predicted symmetric-difference truth| / L
* one error       fraction of bags whose top-ranked label is not relevant
* coverage        deepest rank position holding a relevant label, 0-indexed,
                  divided by L - 1 so the worst case is 1
* ranking loss    mis-ordered (relevant, irrelevant) pairs / (|Y| * |Y^c|),
                  ties counting one half
* avg. precision  mean over relevant labels of precision at their ranks
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Bag, Dataset
from .model import Model
from .scoring import bag_score, predict_labels, score_bags


def _as_score_matrix(rankings) -> np.ndarray:
    scores = np.asarray(rankings, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError(f"expected one score row per bag, got shape {scores.shape}")
    return scores


def _check_labels(truths, num_labels: int, n_rows: int | None = None) -> list[np.ndarray]:
    out = []
    for i, t in enumerate(truths):
        arr = np.asarray(sorted(set(int(l) for l in t)), dtype=np.int64)
        if arr.size and (arr[0] < 0 or arr[-1] >= num_labels):
            raise ValueError(f"bag {i}: label outside [0, {num_labels})")
        out.append(arr)
    if n_rows is not None and len(out) != n_rows:
        raise ValueError(f"got {n_rows} score rows but {len(out)} truth sets")
    return out


def _rank_positions(scores_row: np.ndarray) -> np.ndarray:
    """Position of every label in the descending-score order (0-indexed)."""
    order = np.argsort(-scores_row, kind="stable")
    pos = np.empty_like(order)
    pos[order] = np.arange(len(order))
    return pos


def hamming_loss(predictions, truths, num_labels: int) -> float:
    """Mean size of the prediction/truth symmetric difference, over L."""
    total = 0.0
    n = 0
    for pred, truth in zip(predictions, truths, strict=True):
        p = set(int(l) for l in pred)
        t = set(int(l) for l in truth)
        for l in p | t:
            if not 0 <= l < num_labels:
                raise ValueError(f"label {l} outside [0, {num_labels})")
        total += len(p ^ t) / num_labels
        n += 1
    return total / n if n else 0.0


def one_error(rankings, truths) -> float:
    scores = _as_score_matrix(rankings)
    truth_sets = _check_labels(truths, scores.shape[1], n_rows=scores.shape[0])
    errors = 0
    n = 0
    for row, truth in zip(scores, truth_sets):
        if truth.size == 0:
            continue
        n += 1
        if int(np.argmax(row)) not in truth:
            errors += 1
    return errors / n if n else 0.0


def coverage(rankings, truths) -> float:
    scores = _as_score_matrix(rankings)
    num_labels = scores.shape[1]
    truth_sets = _check_labels(truths, num_labels, n_rows=scores.shape[0])
    if num_labels == 1:
        return 0.0
    total = 0.0
    n = 0
    for row, truth in zip(scores, truth_sets):
        if truth.size == 0:
            continue
        pos = _rank_positions(row)
        total += pos[truth].max() / (num_labels - 1)
        n += 1
    return total / n if n else 0.0


def ranking_loss(rankings, truths) -> float:
    scores = _as_score_matrix(rankings)
    truth_sets = _check_labels(truths, scores.shape[1], n_rows=scores.shape[0])
    total = 0.0
    n = 0
    for row, truth in zip(scores, truth_sets):
        if truth.size == 0 or truth.size == scores.shape[1]:
            continue
        rel = row[truth]
        mask = np.ones(len(row), dtype=bool)
        mask[truth] = False
        irr = row[mask]
        bad = np.sum(irr[None, :] > rel[:, None]) + 0.5 * np.sum(irr[None, :] == rel[:, None])
        total += bad / (rel.size * irr.size)
        n += 1
    return total / n if n else 0.0


def average_precision(rankings, truths) -> float:
    scores = _as_score_matrix(rankings)
    truth_sets = _check_labels(truths, scores.shape[1], n_rows=scores.shape[0])
    total = 0.0
    n = 0
    for row, truth in zip(scores, truth_sets):
        if truth.size == 0:
            continue
        ranks = np.sort(_rank_positions(row)[truth]) + 1  # 1-indexed
        total += float(np.mean(np.arange(1, len(ranks) + 1) / ranks))
        n += 1
    return total / n if n else 0.0


def key_instance_accuracy(model: Model, dataset: Dataset) -> float:
    """Fraction of (bag, relevant label) pairs whose detected key instance
    truly carries the label, per the dataset's instance annotations."""
    if not dataset.has_instance_labels:
        raise ValueError("dataset has no instance-level label annotations")
    hits = 0
    pairs = 0
    for bag in dataset.bags:
        for l in bag.labels:
            found = bag_score(model, bag, l)
            pairs += 1
            if l in bag.instance_labels[found.key_instance]:
                hits += 1
    return hits / pairs if pairs else float("nan")


def sub_concept_report(model: Model, dataset: Dataset) -> np.ndarray:
    """Winning sub-concept counts per real label, shape (L, K).

    One count per (bag, relevant label) pair; empty sub-concepts simply
    collect nothing.
    """
    counts = np.zeros((model.num_labels, model.K), dtype=np.int64)
    for bag in dataset.bags:
        for l in bag.labels:
            counts[l, bag_score(model, bag, l).sub_concept] += 1
    return counts


@dataclass
class EvalReport:
    hamming_loss: float
    one_error: float
    coverage: float
    ranking_loss: float
    average_precision: float
    n_bags: int
    skipped_empty_truth: int = 0
    skipped_trivial_pairs: int = 0  # bags with no (relevant, irrelevant) pair
    key_instance_accuracy: float | None = None
    sub_concept_histogram: np.ndarray | None = None

    def to_record(self) -> dict:
        rec = {
            "hamming_loss": self.hamming_loss,
            "one_error": self.one_error,
            "coverage": self.coverage,
            "ranking_loss": self.ranking_loss,
            "average_precision": self.average_precision,
            "n_bags": self.n_bags,
            "skipped_empty_truth": self.skipped_empty_truth,
            "skipped_trivial_pairs": self.skipped_trivial_pairs,
        }
        if self.key_instance_accuracy is not None:
            rec["key_instance_accuracy"] = self.key_instance_accuracy
        if self.sub_concept_histogram is not None:
            rec["sub_concept_histogram"] = self.sub_concept_histogram.tolist()
        return rec

    def to_text(self) -> str:
        lines = [f"{k}: {v}" for k, v in self.to_record().items() if k != "sub_concept_histogram"]
        if self.sub_concept_histogram is not None:
            lines.append("sub_concept_histogram: " + json.dumps(self.sub_concept_histogram.tolist()))
        return "\n".join(lines)


def evaluate_rankings(rankings, truths, num_labels: int, predictions=None) -> EvalReport:
    """All ranking criteria at once (hamming only when predictions given)."""
    scores = _as_score_matrix(rankings)
    truth_list = list(truths)
    empty = sum(1 for t in truth_list if len(set(t)) == 0)
    trivial = sum(1 for t in truth_list if not 0 < len(set(t)) < num_labels)
    return EvalReport(
        hamming_loss=(
            hamming_loss(predictions, truth_list, num_labels) if predictions is not None else float("nan")
        ),
        one_error=one_error(scores, truth_list),
        coverage=coverage(scores, truth_list),
        ranking_loss=ranking_loss(scores, truth_list),
        average_precision=average_precision(scores, truth_list),
        n_bags=len(truth_list),
        skipped_empty_truth=empty,
        skipped_trivial_pairs=trivial,
    )


def evaluate_model(
    model: Model,
    dataset: Dataset,
    with_key_instances: bool = False,
    with_sub_concepts: bool = False,
) -> EvalReport:
    scores = score_bags(model, dataset.bags)[:, : model.num_labels]
    truths = [b.labels for b in dataset.bags]
    predictions = [predict_labels(model, b) for b in dataset.bags]
    report = evaluate_rankings(scores, truths, model.num_labels, predictions=predictions)
    if with_key_instances:
        report.key_instance_accuracy = key_instance_accuracy(model, dataset)
    if with_sub_concepts:
        report.sub_concept_histogram = sub_concept_report(model, dataset)
    return report
