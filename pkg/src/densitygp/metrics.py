"""Evaluation metrics."""

from typing import Tuple

import numpy as np
from scipy.stats import rankdata

from .errors import DataError, InvalidLabels, LengthMismatch, OneClassOnly

DECISION_THRESHOLD = 0.5


def rmse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape} predictions vs {truth.shape} targets")
    if pred.size < 1:
        raise DataError("rmse of an empty vector")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def _check_labels(prob_plus, labels):
    prob_plus = np.asarray(prob_plus, dtype=float)
    labels = np.asarray(labels)
    if prob_plus.shape != labels.shape:
        raise LengthMismatch(f"{prob_plus.shape} probabilities vs {labels.shape} labels")
    if prob_plus.size < 1:
        raise DataError("no predictions")
    if not np.all(np.isin(labels, (-1, 1))):
        raise InvalidLabels("labels must be -1 or +1")
    return prob_plus, labels


def accuracy(prob_plus, labels) -> float:
    """Fraction classified correctly; +1 iff P(+1) >= 1/2."""
    prob_plus, labels = _check_labels(prob_plus, labels)
    predicted = np.where(prob_plus >= DECISION_THRESHOLD, 1, -1)
    return float(np.mean(predicted == labels))


def auc(prob_plus, labels) -> float:
    """Mann-Whitney estimate of P(score of a positive > score of a negative), ties count 1/2."""
    prob_plus, labels = _check_labels(prob_plus, labels)
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly("AUC needs both classes")
    ranks = rankdata(prob_plus)
    u_statistic = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_statistic / (n_pos * n_neg))


def accuracy_auc(prob_plus, labels) -> Tuple[float, float]:
    acc = accuracy(prob_plus, labels)
    try:
        return acc, auc(prob_plus, labels)
    except OneClassOnly as exc:
        raise OneClassOnly(str(exc), accuracy=acc) from None
