"""Planted-model synthetic data with exact instance-level ground truth.

A hidden model (projection + per-label sub-concept heads) is drawn first.
Each sub-concept gets one unit cluster center in feature space; bags draw
their instances around one or two active centers.  An instance carries label
l when its hidden score clears a per-label threshold picked so that roughly
1/L of all instances carry each label; bag labels are the union over
instances.  Because the labeling rule is the hidden model itself, the data
admits a known good solution and the recorded instance labels give exact
ground truth for key-instance detection.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Bag, Dataset, LabelSpace, make_bag
from .model import Model
from .config import Variant

_PLANTED_NORM_BOUND = 1e18  # effectively unbounded; the hidden model is never projected


@dataclass(frozen=True)
class SynthSpec:
    n_bags: int
    z: int                # instances per bag
    d: int
    L: int
    K_true: int           # planted sub-concepts per label
    m_true: int
    noise_sigma: float
    rng_seed: int
    # Labels whose sub-concept heads form antipodal +/- pairs.  Such a label
    # has two genuinely incompatible modes: no single linear head can score
    # both high, which is the setting where sub-concepts matter.
    antipodal_labels: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for name in ("n_bags", "z", "d", "L", "K_true", "m_true"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        for l in self.antipodal_labels:
            if not 0 <= l < self.L:
                raise ValueError(f"antipodal label {l} outside [0, {self.L})")
        if self.antipodal_labels and self.K_true < 2:
            raise ValueError("antipodal labels need K_true >= 2")


def _draw_planted(spec: SynthSpec, rng: np.random.Generator):
    """Hidden parameters and cluster centers; shared by data and model."""
    scale = 1.0 / np.sqrt(spec.d)
    w0 = rng.standard_normal((spec.m_true, spec.d)) * scale
    heads = rng.standard_normal((spec.L, spec.K_true, spec.m_true))
    heads /= np.linalg.norm(heads, axis=2, keepdims=True)
    for l in spec.antipodal_labels:
        for k in range(1, spec.K_true):
            heads[l, k] = -heads[l, 0] if k % 2 else heads[l, 0]
    centers = np.einsum("mj,lkm->lkj", w0, heads).reshape(spec.L * spec.K_true, spec.d)
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    return w0, heads, centers


def planted_model(spec: SynthSpec) -> Model:
    """The hidden scorer as a regular model (dummy head left at zero)."""
    rng = np.random.default_rng(spec.rng_seed)
    w0, heads, _ = _draw_planted(spec, rng)
    full = np.zeros((spec.L + 1, spec.K_true, spec.m_true))
    full[: spec.L] = heads
    return Model(
        w0=w0,
        heads=full,
        m=spec.m_true,
        K=spec.K_true,
        C=_PLANTED_NORM_BOUND,
        num_labels=spec.L,
        feature_dim=spec.d,
        variant=Variant.FULL,
    )


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Draw a dataset from the planted model; deterministic per seed."""
    rng = np.random.default_rng(spec.rng_seed)
    w0, heads, centers = _draw_planted(spec, rng)
    n_clusters = spec.L * spec.K_true

    features = np.empty((spec.n_bags, spec.z, spec.d))
    for b in range(spec.n_bags):
        n_active = int(rng.integers(1, 3))  # bags mix one or two modes
        active = rng.integers(0, n_clusters, size=n_active)
        picks = active[rng.integers(0, n_active, size=spec.z)]
        noise = rng.standard_normal((spec.z, spec.d)) * spec.noise_sigma
        features[b] = centers[picks] + noise

    flat = features.reshape(-1, spec.d)
    projected = flat @ w0.T
    scores = np.einsum("lkm,nm->nlk", heads, projected).max(axis=2)  # (N, L)
    thresholds = np.quantile(scores, 1.0 - 1.0 / spec.L, axis=0)
    carries = scores > thresholds  # instance-level prevalence ~ 1/L per label

    bags = []
    carries = carries.reshape(spec.n_bags, spec.z, spec.L)
    for b in range(spec.n_bags):
        inst_labels = [tuple(np.flatnonzero(carries[b, i]).tolist()) for i in range(spec.z)]
        bag_labels = sorted(set().union(*[set(ls) for ls in inst_labels]))
        bags.append(make_bag(f"b{b}", features[b], bag_labels, inst_labels))

    return Dataset(bags=bags, label_space=LabelSpace(spec.L), feature_dim=spec.d).validate()
