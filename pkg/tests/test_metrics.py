import numpy as np
import pytest

from densitygp.errors import InvalidLabels, LengthMismatch, OneClassOnly
from densitygp.metrics import accuracy, accuracy_auc, auc, rmse


def pairwise_auc(scores, labels):
    pos = scores[labels == 1]
    neg = scores[labels == -1]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (pos.size * neg.size)


def test_rmse():
    assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(np.sqrt(12.5))


def test_rmse_needs_matching_lengths():
    with pytest.raises(LengthMismatch):
        rmse([1.0, 2.0], [1.0])


def test_accuracy_uses_half_as_threshold():
    assert accuracy([0.5, 0.49, 0.9, 0.1], [1, -1, 1, 1]) == pytest.approx(0.75)


def test_perfect_ranking():
    assert auc([0.9, 0.8, 0.2, 0.1], [1, 1, -1, -1]) == 1.0
    assert auc([0.1, 0.2, 0.8, 0.9], [1, 1, -1, -1]) == 0.0


def test_constant_scores_give_half():
    assert auc(np.full(6, 0.5), [1, -1, 1, -1, 1, -1]) == 0.5


def test_auc_matches_pairwise_count():
    rng = np.random.default_rng(20)
    for _ in range(20):
        labels = np.where(rng.uniform(size=20) < 0.5, 1, -1)
        labels[:2] = [1, -1]
        scores = np.round(rng.uniform(size=20), 1)
        assert auc(scores, labels) == pytest.approx(pairwise_auc(scores, labels))


def test_auc_is_invariant_under_monotone_maps():
    rng = np.random.default_rng(21)
    scores = rng.uniform(size=30)
    labels = np.where(rng.uniform(size=30) < 0.5, 1, -1)
    labels[:2] = [1, -1]
    assert auc(scores, labels) == pytest.approx(auc(scores ** 3, labels))


def test_one_class_keeps_the_accuracy():
    with pytest.raises(OneClassOnly) as info:
        accuracy_auc([0.7, 0.4], [1, 1])
    assert info.value.accuracy == pytest.approx(0.5)


def test_labels_are_checked():
    with pytest.raises(InvalidLabels):
        accuracy([0.5, 0.5], [0, 1])
