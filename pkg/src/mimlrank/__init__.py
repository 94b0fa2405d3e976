"""Fast multi-instance multi-label ranking.

Bags of instances are scored against a label set through a low-rank space
shared by all labels, with several linear heads per label so multi-modal
labels can split into sub-concepts.  Training runs stochastic gradient
descent on sampled ranking triplets; a learned dummy label separates
relevant from irrelevant labels at prediction time.
"""
from .config import TrainConfig, Variant
from .data import Bag, Dataset, LabelSpace, make_bag
from .estimator import MimlRanker
from .io import DatasetFormatError, load, save, split
from .metrics import (
    EvalReport,
    average_precision,
    coverage,
    evaluate_model,
    evaluate_rankings,
    hamming_loss,
    key_instance_accuracy,
    one_error,
    ranking_loss,
    sub_concept_report,
)
from .model import Model, ModelFormatError, init_model, load_model, save_model
from .scoring import (
    BagScore,
    bag_score,
    instance_label_score,
    instance_score,
    predict_labels,
    predict_relevant,
    predict_top_r,
    rank_labels,
    score_bags,
)
from .objective import (
    NoTrainableContrast,
    contrast_pool,
    expected_inverse_rank,
    harmonic_weight,
    margin_violation_count,
    rank_count,
    ranking_error,
    surrogate_loss,
    triplet_loss,
)
from .synth import SynthSpec, generate_synthetic, planted_model
from .training import (
    TrainState,
    Triplet,
    cumulative_loss_curve,
    find_violation,
    sample_training_pair,
    sgd_update,
    step_size,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Bag",
    "BagScore",
    "Dataset",
    "DatasetFormatError",
    "EvalReport",
    "LabelSpace",
    "MimlRanker",
    "Model",
    "ModelFormatError",
    "NoTrainableContrast",
    "SynthSpec",
    "TrainConfig",
    "TrainState",
    "Triplet",
    "Variant",
    "average_precision",
    "bag_score",
    "contrast_pool",
    "coverage",
    "cumulative_loss_curve",
    "evaluate_model",
    "evaluate_rankings",
    "expected_inverse_rank",
    "find_violation",
    "generate_synthetic",
    "hamming_loss",
    "harmonic_weight",
    "init_model",
    "instance_label_score",
    "instance_score",
    "key_instance_accuracy",
    "load",
    "load_model",
    "make_bag",
    "margin_violation_count",
    "one_error",
    "planted_model",
    "predict_labels",
    "predict_relevant",
    "predict_top_r",
    "rank_count",
    "rank_labels",
    "ranking_error",
    "ranking_loss",
    "sample_training_pair",
    "save",
    "save_model",
    "score_bags",
    "sgd_update",
    "split",
    "step_size",
    "sub_concept_report",
    "surrogate_loss",
    "train",
    "triplet_loss",
]
