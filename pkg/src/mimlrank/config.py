"""Training hyperparameters."""
from __future__ import annotations

import enum
from dataclasses import dataclass


class Variant(enum.Enum):
    """Model variants.

    FULL            shared projection + per-label heads, dummy-label threshold
    NO_SHARED_SPACE heads act on raw features directly ("v1"); no projection
    TOP_R           trained like FULL, but prediction takes the top r labels
                    instead of thresholding against the dummy ("v2")
    """

    FULL = "full"
    NO_SHARED_SPACE = "v1"
    TOP_R = "v2"


@dataclass(frozen=True)
class TrainConfig:
    """All knobs for one training run.

    The step size at iteration t is ``gamma0 / (1 + eta * gamma0 * t)``.
    Typical search grids: m in {50, 100, 200}, C in {1, 5, 10},
    K in {1, 5, 10, 15}, gamma0 in {1e-4, 5e-4, 1e-3, 5e-3},
    eta in {1e-5, 1e-6}.
    """

    m: int = 100
    K: int = 5
    C: float = 1.0
    gamma0: float = 1e-3
    eta: float = 1e-5
    max_iters: int = 100_000
    eval_every: int = 5_000
    patience: int = 10
    validation_fraction: float = 0.1
    rng_seed: int = 0
    variant: Variant = Variant.FULL

    def __post_init__(self) -> None:
        if self.m < 1 or self.K < 1:
            raise ValueError("m and K must be positive")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.eval_every < 1 or self.patience < 1:
            raise ValueError("eval_every and patience must be positive")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in (0, 1)")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")
