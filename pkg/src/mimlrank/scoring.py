"""Forward-pass computations over an immutable model.

All functions are pure; ties anywhere break toward the smallest index so
results are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Variant
from .data import Bag
from .model import Model


@dataclass(frozen=True)
class BagScore:
    """Score of one bag on one label, with the argmax that produced it."""

    label_id: int
    score: float
    key_instance: int
    sub_concept: int


def project_instances(model: Model, instances: np.ndarray) -> np.ndarray:
    """Map raw instance rows into head space (identity when no shared space)."""
    if model.w0 is None:
        return instances
    return instances @ model.w0.T


def instance_score(model: Model, x: np.ndarray, label: int, k: int) -> float:
    """Score of a single instance on one (label, sub-concept) pair."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.feature_dim,):
        raise ValueError(f"expected feature vector of dim {model.feature_dim}, got {x.shape}")
    projected = x if model.w0 is None else model.w0 @ x
    return float(model.heads[label, k] @ projected)


def instance_label_score(model: Model, x: np.ndarray, label: int) -> tuple[float, int]:
    """Best sub-concept score for an instance; returns (score, sub_concept)."""
    x = np.asarray(x, dtype=np.float64)
    projected = x if model.w0 is None else model.w0 @ x
    per_k = model.heads[label] @ projected
    k = int(np.argmax(per_k))
    return float(per_k[k]), k


def bag_score(model: Model, bag: Bag, label: int) -> BagScore:
    """Bag-level score: max over instances and sub-concepts.

    The argmax instance is the key instance of the bag on this label.
    """
    if bag.size < 1:
        raise ValueError(f"bag {bag.id!r} is empty")
    projected = project_instances(model, bag.instances)
    per_ik = projected @ model.heads[label].T  # (z, K)
    flat = int(np.argmax(per_ik))
    i, k = divmod(flat, model.K)
    return BagScore(label_id=label, score=float(per_ik[i, k]), key_instance=i, sub_concept=k)


def score_all_labels(model: Model, bag: Bag) -> np.ndarray:
    """Bag scores for every label including the dummy; shape (L + 1,)."""
    projected = project_instances(model, bag.instances)
    per = projected @ model.heads.reshape(-1, model.head_dim).T
    return per.reshape(bag.size, -1, model.K).max(axis=(0, 2))


def score_bags(model: Model, bags) -> np.ndarray:
    """Score many bags at once; returns (n_bags, L + 1).

    One matmul over all instances, then a segmented max per bag.
    """
    mats = [b.instances if isinstance(b, Bag) else np.asarray(b, dtype=np.float64) for b in bags]
    if not mats:
        return np.zeros((0, model.num_labels + 1))
    stacked = np.vstack(mats)
    projected = project_instances(model, stacked)
    per = projected @ model.heads.reshape(-1, model.head_dim).T
    per_label = per.reshape(len(stacked), -1, model.K).max(axis=2)
    offsets = np.cumsum([0] + [m.shape[0] for m in mats])[:-1]
    return np.maximum.reduceat(per_label, offsets, axis=0)


def rank_labels(model: Model, bag: Bag) -> list[tuple[int, float]]:
    """All labels (dummy included) sorted by descending score, ties by id."""
    scores = score_all_labels(model, bag)
    order = np.argsort(-scores, kind="stable")
    return [(int(l), float(scores[l])) for l in order]


def predict_relevant(model: Model, bag: Bag) -> set[int]:
    """Real labels scoring above the dummy threshold: 1 + f_l > f_dummy."""
    scores = score_all_labels(model, bag)
    dummy = scores[model.dummy_id]
    return {l for l in range(model.num_labels) if 1.0 + scores[l] > dummy}


def predict_top_r(model: Model, bag: Bag, r: int) -> set[int]:
    """The r best-scoring real labels (ties toward smaller ids)."""
    scores = score_all_labels(model, bag)[: model.num_labels]
    order = np.argsort(-scores, kind="stable")
    return {int(l) for l in order[:r]}


def predict_labels(model: Model, bag: Bag) -> set[int]:
    """Variant-aware relevant-label decision for one bag."""
    if model.variant is Variant.TOP_R:
        if model.top_r is None:
            raise ValueError("top-r model is missing its r value; was it trained?")
        return predict_top_r(model, bag, model.top_r)
    return predict_relevant(model, bag)
