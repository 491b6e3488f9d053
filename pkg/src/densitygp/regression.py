"""
Gaussian-process regression with density inputs.

All solves go through one Cholesky factor of A = C + noise_var * I.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from .covariance import (MaternParams, cov_from_distances, cov_grad_matrices,
                         cross_distances, matern_k, pairwise_distances)
from .density import DensityOnGrid
from .errors import DataError, NotPSD, PreconditionError
from .geometry import EmbeddedFeature, embed_all

logger = logging.getLogger(__name__)

DEFAULT_NOISE_VAR = 1e-4
LOG_2PI = np.log(2.0 * np.pi)
VARIANCE_ROUNDOFF = 1e-10


@dataclass(frozen=True)
class RegressionTrainSet:
    features: Tuple[EmbeddedFeature, ...]
    targets: np.ndarray
    noise_var: float = DEFAULT_NOISE_VAR

    def __post_init__(self):
        object.__setattr__(self, 'features', tuple(self.features))
        targets = np.array(self.targets, dtype=float)
        targets.setflags(write=False)
        object.__setattr__(self, 'targets', targets)
        if len(self.features) < 1:
            raise DataError("a regression training set needs at least one pair")
        if targets.shape != (len(self.features),):
            raise DataError(f"{len(self.features)} features but targets of shape {targets.shape}")
        if not np.all(np.isfinite(targets)):
            raise DataError("targets must be finite")
        if not self.noise_var > 0:
            raise PreconditionError(f"noise variance must be positive, got {self.noise_var}")

    @classmethod
    def from_densities(cls, densities: Sequence[DensityOnGrid], targets,
                       noise_var: float = DEFAULT_NOISE_VAR) -> 'RegressionTrainSet':
        return cls(tuple(embed_all(densities)), targets, noise_var)

    @property
    def size(self) -> int:
        return len(self.features)

    def take(self, indices) -> 'RegressionTrainSet':
        indices = np.asarray(indices, dtype=int)
        return RegressionTrainSet(tuple(self.features[i] for i in indices),
                                  self.targets[indices], self.noise_var)

    @cached_property
    def distances(self) -> np.ndarray:
        return pairwise_distances(self.features)


@dataclass(frozen=True)
class FittedRegression:
    params: MaternParams
    chol: np.ndarray
    weights: np.ndarray
    noise_var: float
    jitter_used: float = 0.0


def _factorize(train: RegressionTrainSet, params: MaternParams):
    cov = cov_from_distances(train.distances, params)
    noisy = cov.effective + train.noise_var * np.eye(train.size)
    try:
        chol = cholesky(noisy, lower=True)
    except LinAlgError:
        raise NotPSD("C + noise_var * I is not positive definite") from None
    return cov, chol


def nlml_regression(train: RegressionTrainSet, params: MaternParams) -> float:
    """Negative log-marginal likelihood."""
    _, chol = _factorize(train, params)
    weights = cho_solve((chol, True), train.targets)
    return float(0.5 * train.targets @ weights
                 + np.sum(np.log(np.diag(chol)))
                 + 0.5 * train.size * LOG_2PI)


def nlml_regression_grad(train: RegressionTrainSet, params: MaternParams) -> Tuple[float, float]:
    """(d/d delta2, d/d alpha) of nlml_regression.

    dNLML = 1/2 tr(A^-1 dC) - 1/2 w' dC w with w = A^-1 y.
    """
    _, chol = _factorize(train, params)
    weights = cho_solve((chol, True), train.targets)
    grads = []
    for d_cov in cov_grad_matrices(train.distances, params):
        trace = np.trace(cho_solve((chol, True), d_cov))
        grads.append(float(0.5 * trace - 0.5 * weights @ d_cov @ weights))
    return grads[0], grads[1]


def fit_regression(train: RegressionTrainSet, params: MaternParams) -> FittedRegression:
    cov, chol = _factorize(train, params)
    weights = cho_solve((chol, True), train.targets)
    logger.debug(f"Fitted regression on {train.size} densities, jitter {cov.jitter_used:g}")
    return FittedRegression(params, chol, weights, train.noise_var, cov.jitter_used)


def _clamp_variance(variance: np.ndarray) -> np.ndarray:
    if np.any(variance < -VARIANCE_ROUNDOFF):
        logger.warning(f"Predictive variance {variance.min():.3g} clamped to zero")
    return np.clip(variance, 0.0, None)


def predict_features(model: FittedRegression, train: RegressionTrainSet,
                     features: Sequence[EmbeddedFeature]) -> Tuple[np.ndarray, np.ndarray]:
    k_star = matern_k(cross_distances(train.features, features), model.params)
    k_star = np.atleast_2d(k_star)
    mean = k_star.T @ model.weights
    v = solve_triangular(model.chol, k_star, lower=True)
    variance = model.params.delta2 - np.sum(v * v, axis=0)
    return mean, _clamp_variance(variance)


def predict_regression_batch(model: FittedRegression, train: RegressionTrainSet,
                             densities: Sequence[DensityOnGrid]) -> Tuple[np.ndarray, np.ndarray]:
    return predict_features(model, train, embed_all(densities))


def predict_regression(model: FittedRegression, train: RegressionTrainSet,
                       p_star: DensityOnGrid) -> Tuple[float, float]:
    """Predictive mean and latent variance at one density."""
    mean, variance = predict_regression_batch(model, train, [p_star])
    return float(mean[0]), float(variance[0])
