"""SGD training on sampled ranking triplets.

Each iteration samples a bag and one of its relevant labels y (the dummy
counts as relevant for every bag), locates y's key instance, then draws
labels from y's contrast pool with replacement until one violates the unit
margin.  The violating triplet gets a gradient step whose weight reflects
the estimated number of violated labels, and the touched parameters are
clipped back into the norm ball.

Training stops when the validation ranking loss has not improved for
``patience`` consecutive evaluations (or at ``max_iters``), and returns the
parameters from the best evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TrainConfig, Variant
from .data import Bag, Dataset
from .metrics import ranking_loss
from .model import Model, clip_columns_to_ball, clip_to_ball, init_model
from .objective import (
    MARGIN,
    NoTrainableContrast,
    contrast_pool,
    harmonic,
    harmonic_weight,
    triplet_loss,
)
from .scoring import bag_score, score_bags


@dataclass(frozen=True)
class Triplet:
    """One SGD step's ingredients: a bag, its label y, and a violated rival."""

    bag_index: int
    y: int
    y_neg: int
    key: tuple[int, int]       # (instance index, sub-concept) for y
    key_neg: tuple[int, int]   # same for y_neg
    v: int                     # sampling step at which the violation was found
    s_weight: float            # harmonic rank weight for that v


@dataclass
class TrainState:
    model: Model
    t: int
    rng: np.random.Generator
    best_val_rankloss: float
    evals_since_improvement: int
    # (iteration, validation ranking loss, cumulative sampled loss)
    history: list[tuple[int, float, float]] = field(default_factory=list)
    sampled_losses: np.ndarray = field(default_factory=lambda: np.zeros(0))


def step_size(cfg: TrainConfig, t: int) -> float:
    """Decaying step size gamma0 / (1 + eta * gamma0 * t)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return cfg.gamma0 / (1.0 + cfg.eta * cfg.gamma0 * t)


def sample_training_pair(dataset: Dataset, rng: np.random.Generator) -> tuple[int, int]:
    """Uniform bag, then uniform label among its relevant labels plus the dummy."""
    b = int(rng.integers(0, len(dataset.bags)))
    labels = dataset.bags[b].labels
    c = int(rng.integers(0, len(labels) + 1))
    y = labels[c] if c < len(labels) else dataset.label_space.dummy_id
    return b, y


def find_violation(
    model: Model,
    bag: Bag,
    y: int,
    pool: list[int],
    rng: np.random.Generator,
    bag_index: int = 0,
) -> Triplet | None:
    """Sample the pool with replacement until a label violates the margin.

    At most ``len(pool)`` attempts; the first draw whose label scores above
    ``f_y - 1`` wins.  Returns None when every attempt is already ranked
    correctly, which is the success path.
    """
    score_y = bag_score(model, bag, y)
    npool = len(pool)
    for attempt in range(1, npool + 1):
        j = int(rng.integers(0, npool))
        y_neg = pool[j]
        score_neg = bag_score(model, bag, y_neg)
        if score_neg.score > score_y.score - MARGIN:
            return Triplet(
                bag_index=bag_index,
                y=y,
                y_neg=y_neg,
                key=(score_y.key_instance, score_y.sub_concept),
                key_neg=(score_neg.key_instance, score_neg.sub_concept),
                v=attempt,
                s_weight=harmonic_weight(npool, attempt),
            )
    return None


def sgd_update(model: Model, bag: Bag, triplet: Triplet, step: float) -> None:
    """Apply one gradient step for the triplet, then re-clip norms.

    All three gradients are evaluated at the pre-step parameters; only the
    two touched heads (and, in the shared-space case, the projection
    columns) are re-projected.
    """
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    g = step * triplet.s_weight
    if g == 0.0:
        return
    ki, k = triplet.key
    ki_neg, k_neg = triplet.key_neg
    x = bag.instances[ki]
    x_neg = bag.instances[ki_neg]
    w_y = model.heads[triplet.y, k]
    w_neg = model.heads[triplet.y_neg, k_neg]
    if model.w0 is None:
        proj_x, proj_x_neg = x, x_neg
    else:
        proj_x = model.w0 @ x
        proj_x_neg = model.w0 @ x_neg
        model.w0 -= g * (np.outer(w_neg, x_neg) - np.outer(w_y, x))
        clip_columns_to_ball(model.w0, model.C)
    w_y += g * proj_x
    w_neg -= g * proj_x_neg
    clip_to_ball(w_y, model.C)
    clip_to_ball(w_neg, model.C)


def _run_reference(
    model: Model,
    train_set: Dataset,
    cfg: TrainConfig,
    rng: np.random.Generator,
    losses: np.ndarray,
    t_start: int,
    t_end: int,
) -> None:
    """Slow-path loop built from the public ops; used for verification."""
    for t in range(t_start, t_end):
        b, y = sample_training_pair(train_set, rng)
        bag = train_set.bags[b]
        try:
            pool = contrast_pool(bag, y, train_set.label_space)
        except NoTrainableContrast:
            continue
        trip = find_violation(model, bag, y, pool, rng, bag_index=b)
        if trip is None:
            continue
        losses[t] = triplet_loss(model, bag, y, trip.y_neg, trip.s_weight)
        sgd_update(model, bag, trip, step_size(cfg, t))


class _Packed:
    """Flat array views of a dataset for the compiled loop."""

    def __init__(self, dataset: Dataset):
        bags = dataset.bags
        L = dataset.label_space.num_labels
        self.X = np.ascontiguousarray(np.vstack([b.instances for b in bags]))
        sizes = np.array([b.size for b in bags], dtype=np.int64)
        self.bag_ptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        rel = [np.asarray(b.labels, dtype=np.int64) for b in bags]
        irr = [
            np.setdiff1d(np.arange(L, dtype=np.int64), r, assume_unique=False) for r in rel
        ]
        self.rel_flat = np.concatenate(rel) if rel else np.zeros(0, dtype=np.int64)
        self.rel_ptr = np.concatenate([[0], np.cumsum([len(r) for r in rel])]).astype(np.int64)
        self.irr_flat = np.concatenate(irr) if irr else np.zeros(0, dtype=np.int64)
        self.irr_ptr = np.concatenate([[0], np.cumsum([len(q) for q in irr])]).astype(np.int64)
        self.z_max = int(sizes.max())


def _run_compiled(
    model: Model,
    packed: _Packed,
    cfg: TrainConfig,
    rng: np.random.Generator,
    harm: np.ndarray,
    proj_buf: np.ndarray,
    losses: np.ndarray,
    t_start: int,
    t_end: int,
) -> None:
    from . import _kernel

    use_shared = model.w0 is not None
    w0 = model.w0 if use_shared else np.zeros((1, 1))
    _kernel.run_sgd(
        rng,
        w0,
        model.heads,
        use_shared,
        packed.X,
        packed.bag_ptr,
        packed.rel_flat,
        packed.rel_ptr,
        packed.irr_flat,
        packed.irr_ptr,
        model.num_labels,
        model.K,
        model.C,
        cfg.gamma0,
        cfg.eta,
        t_start,
        t_end - t_start,
        harm,
        losses[t_start:t_end],
        proj_buf,
    )


def _validation_ranking_loss(model: Model, bags: list[Bag]) -> float:
    scores = score_bags(model, bags)[:, : model.num_labels]
    return ranking_loss(scores, [b.labels for b in bags])


def train(dataset: Dataset, cfg: TrainConfig, compiled: bool = True) -> tuple[Model, TrainState]:
    """Run the full training loop; returns (best model, final state).

    A validation subset (``cfg.validation_fraction`` of the bags) is split
    off first and only steers stopping; the returned model is the checkpoint
    with the lowest validation ranking loss.  Everything is deterministic
    given ``cfg.rng_seed``.  ``compiled=False`` runs the same loop through
    the pure-Python ops instead of the jitted kernel.
    """
    if not dataset.bags:
        raise ValueError("cannot train on an empty dataset")
    rng = np.random.default_rng(cfg.rng_seed)

    n = len(dataset.bags)
    if n == 1:
        train_bags = val_bags = list(dataset.bags)
    else:
        n_val = min(n - 1, max(1, round(n * cfg.validation_fraction)))
        perm = rng.permutation(n)
        val_bags = [dataset.bags[i] for i in perm[:n_val]]
        train_bags = [dataset.bags[i] for i in perm[n_val:]]
    train_set = Dataset(train_bags, dataset.label_space, dataset.feature_dim)

    model = init_model(dataset.feature_dim, dataset.label_space, cfg, rng)
    if cfg.variant is Variant.TOP_R:
        mean_labels = float(np.mean([len(b.labels) for b in train_bags]))
        model.top_r = max(1, int(np.floor(mean_labels + 0.5)))

    losses = np.zeros(cfg.max_iters)
    state = TrainState(
        model=model,
        t=0,
        rng=rng,
        best_val_rankloss=np.inf,
        evals_since_improvement=0,
    )
    if cfg.max_iters == 0:
        state.sampled_losses = losses
        return model.copy(), state

    packed = harm = proj_buf = None
    if compiled:
        packed = _Packed(train_set)
        harm = np.array([harmonic(i) for i in range(dataset.label_space.num_labels + 2)])
        proj_buf = np.empty((packed.z_max, model.head_dim))

    best = model.copy()
    t = 0
    while t < cfg.max_iters:
        t_end = min(t + cfg.eval_every, cfg.max_iters)
        if compiled:
            _run_compiled(model, packed, cfg, rng, harm, proj_buf, losses, t, t_end)
        else:
            _run_reference(model, train_set, cfg, rng, losses, t, t_end)
        t = t_end
        val_rl = _validation_ranking_loss(model, val_bags)
        state.history.append((t, val_rl, float(losses[:t].sum())))
        if val_rl < state.best_val_rankloss:
            state.best_val_rankloss = val_rl
            state.evals_since_improvement = 0
            best = model.copy()
        else:
            state.evals_since_improvement += 1
            if state.evals_since_improvement >= cfg.patience:
                break

    state.t = t
    state.sampled_losses = losses[:t].copy()
    return best, state


def cumulative_loss_curve(state: TrainState) -> np.ndarray:
    """Running mean of the sampled triplet losses; shape (t, 2).

    Column 0 is the 1-based iteration count, column 1 the mean loss over all
    iterations so far (skipped iterations count as zero loss).
    """
    losses = np.asarray(state.sampled_losses, dtype=np.float64)
    steps = np.arange(1, len(losses) + 1, dtype=np.float64)
    return np.column_stack([steps, np.cumsum(losses) / steps])
