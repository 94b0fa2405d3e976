import numpy as np
import pytest

import mimlrank as mr


def random_model(rng, d=None, m=None, K=None, L=None, C=None):
    """A small random model with loose default ranges."""
    d = d or int(rng.integers(2, 7))
    m = m or int(rng.integers(2, 5))
    K = K or int(rng.integers(1, 4))
    L = L or int(rng.integers(2, 9))
    C = C or float(rng.uniform(0.5, 2.0))
    cfg = mr.TrainConfig(m=m, K=K, C=C, gamma0=1e-3)
    return mr.init_model(d, mr.LabelSpace(L), cfg, rng)


def random_bag(rng, model, z=None, n_rel=None, bag_id="bag"):
    """A random bag compatible with the model, with >= 1 relevant label."""
    z = z or int(rng.integers(1, 5))
    L = model.num_labels
    n_rel = n_rel or int(rng.integers(1, L))
    labels = sorted(rng.choice(L, size=n_rel, replace=False).tolist())
    return mr.make_bag(bag_id, rng.standard_normal((z, model.feature_dim)), labels)


def direct_score_model(head_values, C=100.0):
    """1-d model whose bag score on label l is exactly head_values[l].

    head_values has one entry per label including the dummy (last).
    """
    values = np.asarray(head_values, dtype=np.float64)
    heads = values.reshape(-1, 1, 1).copy()
    return mr.Model(
        w0=np.ones((1, 1)),
        heads=heads,
        m=1,
        K=1,
        C=C,
        num_labels=len(values) - 1,
        feature_dim=1,
    )


def unit_bag(labels=(0,)):
    """Single-instance bag with feature [1.0] for direct-score models."""
    return mr.make_bag("u", np.ones((1, 1)), labels)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
