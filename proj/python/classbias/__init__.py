"""Class-wise bias (CEV/SDE) and group-fairness metrics for classifier predictions."""

import json

from ._core import (
    DegenerateError,
    Error,
    InputError,
    PredictionSet,
    cie,
    load_predictions,
    predictions_from_lists,
)
from . import _core

__all__ = [
    "DegenerateError",
    "Error",
    "InputError",
    "PredictionSet",
    "binary_fairness",
    "cie",
    "compare",
    "deltas",
    "group_fairness",
    "load_predictions",
    "matrix",
    "predictions_from_lists",
    "profile",
]


def profile(predictions):
    """Per-class FPR/FNR and top-1 accuracy of one model."""
    return json.loads(_core._profile_json(predictions))


def compare(base, alt, policy="exclude", normalize=True, random_mode="analytic", seed=0, draws=None):
    """CEV and SDE of ``alt`` against ``base``, optionally normalized by a random predictor."""
    return json.loads(_core._compare_json(base, alt, policy, normalize, random_mode, seed, draws))


def deltas(base, alt, policy="exclude"):
    """Per-class normalized FPR/FNR changes."""
    return json.loads(_core._deltas_json(base, alt, policy))


def matrix(models, metric="cev", policy="exclude", sort="top1", random_mode="analytic", seed=0,
           draws=None):
    """Pairwise metric matrix; rows are base models, columns alternatives."""
    return json.loads(_core._matrix_json(list(models), metric, policy, sort, random_mode, seed, draws))


def group_fairness(predictions, group, policy="exclude"):
    """Full test set vs the subset selected by ``group`` ("attr=value" or "attr!=value")."""
    return json.loads(_core._group_fairness_json(predictions, group, policy))


def binary_fairness(predictions, attribute, policy="exclude", positive_label=None,
                    require_scores=False):
    """FPED, FNED, DIMS and DIAMR over the values of ``attribute``."""
    return json.loads(
        _core._binary_fairness_json(predictions, attribute, policy, positive_label, require_scores))
