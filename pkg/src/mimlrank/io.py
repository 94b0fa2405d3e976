"""Dataset file format: one JSON object per line, UTF-8.

Line 1 is a header ``{"miml_header": 1, "num_labels": L, "feature_dim": d}``;
every following line is one bag::

    {"id": "...", "labels": [ints], "instances": [[floats]],
     "instance_labels": [[ints]]}      # instance_labels optional

Numbers are serialized with full round-trip precision, so save -> load is an
identity on the in-memory dataset.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .data import Bag, Dataset, LabelSpace, make_bag

FORMAT_VERSION = 1


class DatasetFormatError(ValueError):
    """A malformed dataset file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _bag_record(bag: Bag) -> dict:
    rec = {
        "id": bag.id,
        "labels": list(bag.labels),
        "instances": bag.instances.tolist(),
    }
    if bag.instance_labels is not None:
        rec["instance_labels"] = [list(ls) for ls in bag.instance_labels]
    return rec


def save(dataset: Dataset, path) -> None:
    header = {
        "miml_header": FORMAT_VERSION,
        "num_labels": dataset.label_space.num_labels,
        "feature_dim": dataset.feature_dim,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for bag in dataset.bags:
            fh.write(json.dumps(_bag_record(bag)) + "\n")


def load(path) -> Dataset:
    """Parse and validate a dataset file, reporting the line of any defect."""
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise DatasetFormatError("missing header line", line=1)
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"invalid JSON: {exc}", line=1) from exc
        if not isinstance(header, dict) or header.get("miml_header") != FORMAT_VERSION:
            raise DatasetFormatError("first line is not a recognized header", line=1)
        try:
            num_labels = int(header["num_labels"])
            feature_dim = int(header["feature_dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(f"bad header field: {exc}", line=1) from exc
        if num_labels < 1 or feature_dim < 1:
            raise DatasetFormatError("num_labels and feature_dim must be positive", line=1)

        bags: list[Bag] = []
        seen: set[str] = set()
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"invalid JSON: {exc}", line=line_no) from exc
            bags.append(_parse_bag(rec, num_labels, feature_dim, seen, line_no))

    return Dataset(bags=bags, label_space=LabelSpace(num_labels), feature_dim=feature_dim)


def _parse_bag(rec, num_labels: int, feature_dim: int, seen: set[str], line_no: int) -> Bag:
    if not isinstance(rec, dict):
        raise DatasetFormatError("bag record must be a JSON object", line=line_no)
    for field in ("id", "labels", "instances"):
        if field not in rec:
            raise DatasetFormatError(f"missing field {field!r}", line=line_no)
    bag_id = str(rec["id"])
    if bag_id in seen:
        raise DatasetFormatError(f"duplicate bag id {bag_id!r}", line=line_no)
    seen.add(bag_id)
    instances = rec["instances"]
    if not isinstance(instances, list) or not instances:
        raise DatasetFormatError("instances must be a non-empty list", line=line_no)
    widths = {len(row) if isinstance(row, list) else -1 for row in instances}
    if widths != {feature_dim}:
        raise DatasetFormatError(
            f"instance dimension {sorted(widths)} != declared feature_dim {feature_dim}",
            line=line_no,
        )
    for row in instances:
        for val in row:
            if not isinstance(val, (int, float)) or not math.isfinite(val):
                raise DatasetFormatError(f"non-finite feature value {val!r}", line=line_no)
    labels = rec["labels"]
    if not isinstance(labels, list):
        raise DatasetFormatError("labels must be a list", line=line_no)
    for l in labels:
        if not isinstance(l, int) or not 0 <= l < num_labels:
            raise DatasetFormatError(f"label {l!r} outside [0, {num_labels})", line=line_no)
    inst_labels = rec.get("instance_labels")
    if inst_labels is not None:
        if not isinstance(inst_labels, list) or len(inst_labels) != len(instances):
            raise DatasetFormatError(
                "instance_labels must list one label set per instance", line=line_no
            )
        for ls in inst_labels:
            for l in ls:
                if not isinstance(l, int) or not 0 <= l < num_labels:
                    raise DatasetFormatError(
                        f"instance label {l!r} outside [0, {num_labels})", line=line_no
                    )
    try:
        return make_bag(bag_id, instances, labels, inst_labels)
    except ValueError as exc:
        raise DatasetFormatError(str(exc), line=line_no) from exc


def split(dataset: Dataset, fraction: float, rng: np.random.Generator) -> tuple[Dataset, Dataset]:
    """Random disjoint split; the first part gets ceil(n * fraction) bags."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    n = len(dataset.bags)
    n_first = math.ceil(n * fraction)
    perm = rng.permutation(n)

    def part(indices) -> Dataset:
        return Dataset(
            bags=[dataset.bags[i] for i in indices],
            label_space=dataset.label_space,
            feature_dim=dataset.feature_dim,
        )

    return part(perm[:n_first]), part(perm[n_first:])
