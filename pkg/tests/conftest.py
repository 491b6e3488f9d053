"""Shared fixtures: Beta densities on the grid and small training sets."""

import numpy as np
import pytest
from scipy.stats import beta

from densitygp.classification import ClassifyTrainSet
from densitygp.density import density_from_function
from densitygp.regression import RegressionTrainSet

SMALL_GRID = 128


def beta_density(a: float, b: float, m: int = SMALL_GRID):
    return density_from_function(lambda t: beta.pdf(t, a, b), m)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def beta_pair():
    return beta_density(2.0, 3.0), beta_density(3.0, 2.0)


@pytest.fixture
def regression_data():
    params = [(2.0, 5.0), (2.5, 4.0), (3.0, 3.0), (4.0, 2.5), (5.0, 2.0), (3.5, 6.0), (6.0, 3.5), (2.2, 2.2)]
    densities = [beta_density(a, b) for a, b in params]
    targets = np.array([np.sin(3.0 * a / (a + b)) for a, b in params])
    return densities, targets


@pytest.fixture
def regression_train(regression_data):
    densities, targets = regression_data
    return RegressionTrainSet.from_densities(densities, targets)


@pytest.fixture
def classification_data():
    plus = [(2.0, 5.0), (2.2, 5.5), (1.8, 4.6), (2.1, 4.8), (2.4, 5.2)]
    minus = [(5.0, 2.0), (5.5, 2.2), (4.6, 1.8), (4.8, 2.1), (5.2, 2.4)]
    densities = [beta_density(a, b) for a, b in plus + minus]
    labels = np.array([1] * len(plus) + [-1] * len(minus))
    return densities, labels


@pytest.fixture
def classification_train(classification_data):
    densities, labels = classification_data
    return ClassifyTrainSet.from_densities(densities, labels)
