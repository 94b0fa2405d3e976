"""Model parameters: shared projection plus per-(label, sub-concept) heads.

The score of instance x on label l is ``max_k  heads[l, k] @ (w0 @ x)``; under
the NO_SHARED_SPACE variant the projection is dropped and heads act on x
directly.  Every label, including the dummy, owns K head vectors.  After any
update, head vectors and the columns of ``w0`` are kept inside the L2 ball of
radius C.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .config import TrainConfig, Variant
from .data import LabelSpace

MODEL_MAGIC = b"MIMLFST1"


class ModelFormatError(ValueError):
    """Raised when a serialized model cannot be decoded safely."""


@dataclass
class Model:
    w0: np.ndarray | None  # (m, d); None under NO_SHARED_SPACE
    heads: np.ndarray      # (L + 1, K, head_dim); row L is the dummy label
    m: int
    K: int
    C: float
    num_labels: int
    feature_dim: int
    variant: Variant = Variant.FULL
    top_r: int | None = None  # only set for TOP_R models, from training data

    @property
    def dummy_id(self) -> int:
        return self.num_labels

    @property
    def head_dim(self) -> int:
        return self.heads.shape[2]

    @property
    def label_space(self) -> LabelSpace:
        return LabelSpace(self.num_labels)

    def copy(self) -> "Model":
        return Model(
            w0=None if self.w0 is None else self.w0.copy(),
            heads=self.heads.copy(),
            m=self.m,
            K=self.K,
            C=self.C,
            num_labels=self.num_labels,
            feature_dim=self.feature_dim,
            variant=self.variant,
            top_r=self.top_r,
        )


def clip_to_ball(vec: np.ndarray, radius: float) -> None:
    """Scale ``vec`` in place onto the L2 ball of the given radius.

    Vectors already inside the ball are left untouched; unconditional
    rescaling would destroy small weights.
    """
    norm = float(np.sqrt(vec @ vec))
    if norm > radius:
        vec *= radius / norm


def clip_columns_to_ball(mat: np.ndarray, radius: float) -> None:
    """Project every column of ``mat`` onto the L2 ball, in place."""
    sq = np.einsum("ij,ij->j", mat, mat)
    over = sq > radius * radius
    if np.any(over):
        mat[:, over] *= radius / np.sqrt(sq[over])


def init_model(
    d: int,
    label_space: LabelSpace,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> Model:
    """Draw a fresh model: i.i.d. Gaussian entries, mean 0, std 1/sqrt(d).

    Head vectors and projection columns are clipped to norm <= C afterwards.
    Draw order (w0 first, then heads) is part of the determinism contract.
    """
    if d < 1:
        raise ValueError(f"feature dimension must be >= 1, got {d}")
    scale = 1.0 / np.sqrt(d)
    total = label_space.total
    if cfg.variant is Variant.NO_SHARED_SPACE:
        w0 = None
        heads = rng.standard_normal((total, cfg.K, d)) * scale
    else:
        w0 = rng.standard_normal((cfg.m, d)) * scale
        heads = rng.standard_normal((total, cfg.K, cfg.m)) * scale
        clip_columns_to_ball(w0, cfg.C)
    for l in range(total):
        for k in range(cfg.K):
            clip_to_ball(heads[l, k], cfg.C)
    return Model(
        w0=w0,
        heads=np.ascontiguousarray(heads),
        m=cfg.m,
        K=cfg.K,
        C=cfg.C,
        num_labels=label_space.num_labels,
        feature_dim=d,
        variant=cfg.variant,
    )


_VARIANT_CODES = {Variant.FULL: 0, Variant.NO_SHARED_SPACE: 1, Variant.TOP_R: 2}
_CODE_VARIANTS = {v: k for k, v in _VARIANT_CODES.items()}
# magic | variant | L | K | m | d | top_r (-1 when unset) | C
_HEADER = struct.Struct("<8sIIIIIid")


def save_model(model: Model, path) -> None:
    """Write the model to ``path`` in the versioned binary dump format."""
    top_r = -1 if model.top_r is None else int(model.top_r)
    header = _HEADER.pack(
        MODEL_MAGIC,
        _VARIANT_CODES[model.variant],
        model.num_labels,
        model.K,
        model.m,
        model.feature_dim,
        top_r,
        model.C,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        if model.w0 is not None:
            fh.write(np.ascontiguousarray(model.w0, dtype=np.float64).tobytes())
        fh.write(np.ascontiguousarray(model.heads, dtype=np.float64).tobytes())


def load_model(path) -> Model:
    """Read a model dump, rejecting bad magic or mismatched dimensions."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size or blob[:8] != MODEL_MAGIC:
        raise ModelFormatError("not a model file (bad magic header)")
    magic, vcode, L, K, m, d, top_r, C = _HEADER.unpack_from(blob)
    if vcode not in _CODE_VARIANTS:
        raise ModelFormatError(f"unknown variant code {vcode}")
    variant = _CODE_VARIANTS[vcode]
    if min(L, K, d) < 1 or (variant is not Variant.NO_SHARED_SPACE and m < 1) or C <= 0:
        raise ModelFormatError("corrupt header: non-positive dimensions")
    head_dim = d if variant is Variant.NO_SHARED_SPACE else m
    n_w0 = 0 if variant is Variant.NO_SHARED_SPACE else m * d
    n_heads = (L + 1) * K * head_dim
    expected = _HEADER.size + 8 * (n_w0 + n_heads)
    if len(blob) != expected:
        raise ModelFormatError(
            f"payload size {len(blob)} does not match header dimensions (want {expected})"
        )
    offset = _HEADER.size
    w0 = None
    if n_w0:
        w0 = np.frombuffer(blob, dtype="<f8", count=n_w0, offset=offset).reshape(m, d).copy()
        offset += 8 * n_w0
    heads = (
        np.frombuffer(blob, dtype="<f8", count=n_heads, offset=offset)
        .reshape(L + 1, K, head_dim)
        .copy()
    )
    if (w0 is not None and not np.all(np.isfinite(w0))) or not np.all(np.isfinite(heads)):
        raise ModelFormatError("non-finite parameter values")
    return Model(
        w0=w0,
        heads=heads,
        m=m,
        K=K,
        C=C,
        num_labels=L,
        feature_dim=d,
        variant=variant,
        top_r=None if top_r < 0 else top_r,
    )
