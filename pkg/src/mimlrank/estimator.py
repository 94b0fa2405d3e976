"""Scikit-learn style front end for the bag ranking learner.

``X`` is a sequence of bags, each a 2d array of instance feature rows (bag
sizes may differ); ``y`` is a sequence of relevant-label collections, or a
binary indicator matrix.  The estimator follows the usual conventions:
hyperparameters are stored verbatim in ``__init__``, all work happens in
``fit``, fitted state lives in trailing-underscore attributes, and
``get_params``/``set_params``/``clone`` behave as sklearn expects.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .config import TrainConfig, Variant
from .data import Dataset, LabelSpace, check_bags, check_label_sets, make_bag
from .scoring import predict_labels, score_bags
from .training import train


def _label_sets_from(y, num_labels):
    if isinstance(y, np.ndarray) and y.ndim == 2:
        y = [np.flatnonzero(row) for row in y]
    return check_label_sets(y, num_labels)


class MimlRanker(BaseEstimator):
    """Multi-instance multi-label ranker with a shared low-rank label space.

    Parameters
    ----------
    shared_dim : width of the space shared by all labels (ignored by the
        "v1" variant, which scores raw features directly).
    sub_concepts : number of linear heads per label; a label's score is the
        best of its heads, so multi-modal labels can split across them.
    norm_bound : L2 ball radius for every head and projection column.
    learning_rate, lr_decay : step size schedule
        ``learning_rate / (1 + lr_decay * learning_rate * t)``.
    max_iters, eval_every, patience, validation_fraction : stopping policy;
        training halts once the validation ranking loss stops improving.
    variant : "full", "v1" (no shared space) or "v2" (predict the top r
        labels, r = mean training label count, instead of thresholding
        against the learned dummy label).
    n_labels : label count; inferred from ``y`` when None.
    random_state : seed; identical seeds give bit-identical models.
    """

    def __init__(
        self,
        shared_dim: int = 100,
        sub_concepts: int = 5,
        norm_bound: float = 1.0,
        learning_rate: float = 1e-3,
        lr_decay: float = 1e-5,
        max_iters: int = 100_000,
        eval_every: int = 5_000,
        patience: int = 10,
        validation_fraction: float = 0.1,
        variant: str = "full",
        n_labels: int | None = None,
        random_state: int = 0,
    ):
        self.shared_dim = shared_dim
        self.sub_concepts = sub_concepts
        self.norm_bound = norm_bound
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.max_iters = max_iters
        self.eval_every = eval_every
        self.patience = patience
        self.validation_fraction = validation_fraction
        self.variant = variant
        self.n_labels = n_labels
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(
            m=self.shared_dim,
            K=self.sub_concepts,
            C=self.norm_bound,
            gamma0=self.learning_rate,
            eta=self.lr_decay,
            max_iters=self.max_iters,
            eval_every=self.eval_every,
            patience=self.patience,
            validation_fraction=self.validation_fraction,
            rng_seed=self.random_state,
            variant=Variant(self.variant),
        )

    def fit(self, X, y):
        bags = check_bags(X)
        label_sets, n_labels = _label_sets_from(y, self.n_labels)
        if len(label_sets) != len(bags):
            raise ValueError(f"got {len(bags)} bags but {len(label_sets)} label sets")
        dataset = Dataset(
            bags=[make_bag(str(i), b, ls) for i, (b, ls) in enumerate(zip(bags, label_sets))],
            label_space=LabelSpace(n_labels),
            feature_dim=bags[0].shape[1],
        ).validate()
        self.model_, self.train_state_ = train(dataset, self._config())
        self.n_labels_ = n_labels
        self.feature_dim_ = dataset.feature_dim
        return self

    def decision_function(self, X) -> np.ndarray:
        """Bag scores on the real labels, shape (n_bags, n_labels)."""
        check_is_fitted(self, "model_")
        bags = check_bags(X, self.feature_dim_)
        return score_bags(self.model_, bags)[:, : self.n_labels_]

    def predict(self, X) -> np.ndarray:
        """Binary indicator matrix of predicted relevant labels."""
        check_is_fitted(self, "model_")
        bags = check_bags(X, self.feature_dim_)
        out = np.zeros((len(bags), self.n_labels_), dtype=np.int64)
        for i, mat in enumerate(bags):
            labels = predict_labels(self.model_, make_bag(str(i), mat, ()))
            out[i, sorted(labels)] = 1
        return out

    def predict_sets(self, X) -> list[set[int]]:
        """Predicted relevant labels as one set per bag."""
        indicator = self.predict(X)
        return [set(np.flatnonzero(row).tolist()) for row in indicator]
