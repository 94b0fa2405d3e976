"""Core containers for multi-instance multi-label data.

A bag is a non-empty set of fixed-dimension instance vectors plus a set of
relevant label ids.  Every real label id lives in ``[0, num_labels)``; one
extra "dummy" label with id ``num_labels`` is appended by the learner as a
per-bag decision threshold and never appears in stored label sets.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class LabelSpace:
    """The set of real labels plus the reserved dummy label."""

    num_labels: int

    def __post_init__(self) -> None:
        if self.num_labels < 1:
            raise ValueError(f"num_labels must be >= 1, got {self.num_labels}")

    @property
    def dummy_id(self) -> int:
        return self.num_labels

    @property
    def total(self) -> int:
        """Real labels plus the dummy."""
        return self.num_labels + 1


@dataclass(frozen=True)
class Bag:
    """One supervised example: instances plus its relevant label ids.

    ``labels`` is stored as a sorted tuple so iteration order (and therefore
    every sampling decision downstream) is deterministic.  ``instance_labels``
    optionally carries per-instance ground truth, used only for key-instance
    scoring.
    """

    id: str
    instances: np.ndarray
    labels: tuple[int, ...]
    instance_labels: tuple[tuple[int, ...], ...] | None = None

    @property
    def size(self) -> int:
        return self.instances.shape[0]


def make_bag(
    bag_id: str,
    instances,
    labels: Iterable[int],
    instance_labels: Sequence[Sequence[int]] | None = None,
) -> Bag:
    """Normalize raw inputs into a validated :class:`Bag`."""
    arr = np.ascontiguousarray(instances, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError(f"bag {bag_id!r}: instances must be a non-empty 2d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"bag {bag_id!r}: non-finite feature values")
    label_tuple = tuple(sorted({int(l) for l in labels}))
    inst_labels = None
    if instance_labels is not None:
        if len(instance_labels) != arr.shape[0]:
            raise ValueError(
                f"bag {bag_id!r}: got {len(instance_labels)} instance label lists "
                f"for {arr.shape[0]} instances"
            )
        inst_labels = tuple(tuple(sorted({int(l) for l in ls})) for ls in instance_labels)
    return Bag(id=str(bag_id), instances=arr, labels=label_tuple, instance_labels=inst_labels)


@dataclass
class Dataset:
    bags: list[Bag]
    label_space: LabelSpace
    feature_dim: int

    def __len__(self) -> int:
        return len(self.bags)

    @property
    def has_instance_labels(self) -> bool:
        return all(b.instance_labels is not None for b in self.bags)

    def validate(self) -> "Dataset":
        """Check all container invariants; returns self for chaining."""
        seen_ids: set[str] = set()
        n = self.label_space.num_labels
        for bag in self.bags:
            if bag.id in seen_ids:
                raise ValueError(f"duplicate bag id {bag.id!r}")
            seen_ids.add(bag.id)
            if bag.instances.shape[1] != self.feature_dim:
                raise ValueError(
                    f"bag {bag.id!r}: feature dim {bag.instances.shape[1]} != {self.feature_dim}"
                )
            if bag.size < 1:
                raise ValueError(f"bag {bag.id!r}: empty instance list")
            if not np.all(np.isfinite(bag.instances)):
                raise ValueError(f"bag {bag.id!r}: non-finite feature values")
            for l in bag.labels:
                if not 0 <= l < n:
                    raise ValueError(f"bag {bag.id!r}: label {l} outside [0, {n})")
            if bag.instance_labels is not None:
                for ls in bag.instance_labels:
                    for l in ls:
                        if not 0 <= l < n:
                            raise ValueError(f"bag {bag.id!r}: instance label {l} outside [0, {n})")
        return self


def check_bags(X, feature_dim: int | None = None) -> list[np.ndarray]:
    """Validate a sequence of bag feature matrices.

    Accepts anything convertible to a list of 2d float arrays with one shared
    column count.  Returns contiguous float64 arrays.
    """
    if isinstance(X, np.ndarray) and X.ndim == 2:
        X = [X]
    bags = []
    for i, item in enumerate(X):
        arr = np.ascontiguousarray(item, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError(f"bag {i}: expected a non-empty 2d array of instances")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"bag {i}: non-finite feature values")
        if feature_dim is None:
            feature_dim = arr.shape[1]
        elif arr.shape[1] != feature_dim:
            raise ValueError(f"bag {i}: feature dim {arr.shape[1]} != {feature_dim}")
        bags.append(arr)
    if not bags:
        raise ValueError("expected at least one bag")
    return bags


def check_label_sets(y, num_labels: int | None = None) -> tuple[list[tuple[int, ...]], int]:
    """Validate per-bag relevant label collections.

    Returns the normalized label tuples and the label count (inferred as
    ``max id + 1`` when not given).
    """
    sets = [tuple(sorted({int(l) for l in labels})) for labels in y]
    max_seen = max((ls[-1] for ls in sets if ls), default=-1)
    if num_labels is None:
        num_labels = max_seen + 1
        if num_labels < 1:
            raise ValueError("cannot infer the label count from empty label sets")
    if max_seen >= num_labels:
        raise ValueError(f"label id {max_seen} outside [0, {num_labels})")
    if any(ls and ls[0] < 0 for ls in sets):
        raise ValueError("negative label id")
    return sets, num_labels
