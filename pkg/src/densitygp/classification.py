"""
Binary Gaussian-process classification with density inputs.

The latent posterior is approximated by a Gaussian at its mode (Laplace).
Newton steps use the B = I + W^1/2 C W^1/2 formulation so that no matrix
other than B is ever factorized.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.special import expit, log_expit

from .covariance import (MaternParams, cov_from_distances, cov_grad_matrices,
                         cross_distances, matern_k, pairwise_distances)
from .density import DensityOnGrid
from .errors import DataError, InvalidLabels, NoConvergence, NotPSD
from .geometry import EmbeddedFeature, embed_all

logger = logging.getLogger(__name__)

DEFAULT_MAX_NEWTON = 100
DEFAULT_NEWTON_TOL = 1e-10
STATIONARITY_TOL = 1e-8
MAX_HALVINGS = 30
GAUSS_HERMITE_NODES = 32
VARIANCE_ROUNDOFF = 1e-10


@dataclass(frozen=True)
class ClassifyTrainSet:
    features: Tuple[EmbeddedFeature, ...]
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'features', tuple(self.features))
        labels = np.asarray(self.labels)
        if labels.shape != (len(self.features),):
            raise DataError(f"{len(self.features)} features but labels of shape {labels.shape}")
        if len(self.features) < 1:
            raise DataError("a classification training set needs at least one pair")
        if not np.all(np.isin(labels, (-1, 1))):
            raise InvalidLabels("labels must be -1 or +1")
        labels = labels.astype(int)
        labels.setflags(write=False)
        object.__setattr__(self, 'labels', labels)

    @classmethod
    def from_densities(cls, densities: Sequence[DensityOnGrid], labels) -> 'ClassifyTrainSet':
        return cls(tuple(embed_all(densities)), labels)

    @property
    def size(self) -> int:
        return len(self.features)

    def take(self, indices) -> 'ClassifyTrainSet':
        indices = np.asarray(indices, dtype=int)
        return ClassifyTrainSet(tuple(self.features[i] for i in indices), self.labels[indices])

    @cached_property
    def distances(self) -> np.ndarray:
        return pairwise_distances(self.features)


@dataclass(frozen=True)
class LaplaceState:
    params: MaternParams
    Zhat: np.ndarray
    W: np.ndarray
    chol_B: np.ndarray
    # C^-1 Zhat, equal to the likelihood gradient at the mode
    weights: np.ndarray
    log_posterior: float
    n_iter: int = 0
    jitter_used: float = 0.0


def log_sigmoid_likelihood(Z, y) -> float:
    """Sum of log sigma(y_i Z_i)."""
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.sum(log_expit(y * Z)))


def _likelihood_terms(Z: np.ndarray, y: np.ndarray):
    """Gradient, negative Hessian diagonal and third derivative of the log-likelihood."""
    pi = expit(Z)
    grad = (y + 1) / 2.0 - pi
    W = pi * (1.0 - pi)
    third = -W * (1.0 - 2.0 * pi)
    return grad, W, third


def _factor_B(C: np.ndarray, sW: np.ndarray) -> np.ndarray:
    B = np.eye(C.shape[0]) + sW[:, None] * C * sW[None, :]
    try:
        return cholesky(B, lower=True)
    except LinAlgError:
        raise NotPSD("I + W^1/2 C W^1/2 is not positive definite") from None


def laplace_map(train: ClassifyTrainSet, params: MaternParams,
                max_newton: int = DEFAULT_MAX_NEWTON,
                tol: float = DEFAULT_NEWTON_TOL) -> LaplaceState:
    """Mode of log p(y|Z) - 1/2 Z' C^-1 Z by damped Newton iteration from Z = 0.

    Z is carried as C a, so the prior term is 1/2 a'Z and its gradient is a.
    """
    cov = cov_from_distances(train.distances, params)
    C = cov.effective
    y = train.labels.astype(float)
    n = train.size

    a = np.zeros(n)
    Z = np.zeros(n)
    psi = log_sigmoid_likelihood(Z, y)
    converged = False
    iteration = 0
    for iteration in range(1, max_newton + 1):
        grad, W, _ = _likelihood_terms(Z, y)
        sW = np.sqrt(W)
        L = _factor_B(C, sW)
        b = W * Z + grad
        a_newton = b - sW * cho_solve((L, True), sW * (C @ b))

        step = 1.0
        direction = a_newton - a
        slack = 1e-12 * (1.0 + abs(psi))
        for _ in range(MAX_HALVINGS + 1):
            a_try = a + step * direction
            Z_try = C @ a_try
            psi_try = log_sigmoid_likelihood(Z_try, y) - 0.5 * a_try @ Z_try
            if psi_try >= psi - slack:
                break
            step *= 0.5
        else:
            logger.debug(f"Newton step {iteration}: no ascent after {MAX_HALVINGS} halvings")
            break

        change = float(np.max(np.abs(Z_try - Z)))
        a, Z, psi = a_try, Z_try, psi_try
        if change < tol and step == 1.0:
            converged = True
            break

    grad, W, _ = _likelihood_terms(Z, y)
    stationarity = float(np.max(np.abs(grad - a)))
    if not converged and stationarity >= STATIONARITY_TOL:
        raise NoConvergence(
            f"Laplace mode not found after {iteration} Newton steps (gradient {stationarity:.3g})")
    logger.debug(f"Laplace mode after {iteration} Newton steps, gradient {stationarity:.2e}")
    return LaplaceState(params, Z, W, _factor_B(C, np.sqrt(W)), a, psi, iteration, cov.jitter_used)


def laplace_nlml(state: LaplaceState, train: ClassifyTrainSet) -> float:
    """1/2 Zhat' C^-1 Zhat - log p(y|Zhat) + 1/2 log|B| at a converged state."""
    return float(0.5 * state.weights @ state.Zhat
                 - log_sigmoid_likelihood(state.Zhat, train.labels)
                 + np.sum(np.log(np.diag(state.chol_B))))


def nlml_classification(train: ClassifyTrainSet, params: MaternParams) -> float:
    return laplace_nlml(laplace_map(train, params), train)


def nlml_classification_grad(train: ClassifyTrainSet, params: MaternParams) -> Tuple[float, float]:
    """(d/d delta2, d/d alpha) of the Laplace NLML.

    The explicit part holds Zhat fixed; the implicit part follows Zhat through
    dZhat/dtheta = (I + C W)^-1 dC grad log p(y|Zhat), weighted by the
    derivative of 1/2 log|B| with respect to Zhat, which involves the third
    derivative of the log-likelihood.
    """
    state = laplace_map(train, params)
    C = cov_from_distances(train.distances, params).effective
    y = train.labels.astype(float)
    grad, W, third = _likelihood_terms(state.Zhat, y)
    sW = np.sqrt(W)
    L = state.chol_B

    R = sW[:, None] * cho_solve((L, True), np.diag(sW))
    V = solve_triangular(L, sW[:, None] * C, lower=True)
    s2 = 0.5 * (np.diag(C) - np.sum(V * V, axis=0)) * third

    grads = []
    for d_cov in cov_grad_matrices(train.distances, params):
        explicit = 0.5 * state.weights @ d_cov @ state.weights - 0.5 * np.sum(R * d_cov)
        b = d_cov @ grad
        implicit = s2 @ (b - C @ (R @ b))
        grads.append(-float(explicit + implicit))
    return grads[0], grads[1]


def sigmoid_gaussian_integral(mean, variance, n_nodes: int = GAUSS_HERMITE_NODES):
    """E[sigma(z)] for z ~ N(mean, variance), by Gauss-Hermite quadrature."""
    nodes, weights = np.polynomial.hermite.hermgauss(n_nodes)
    mean = np.asarray(mean, dtype=float)
    scale = np.sqrt(2.0 * np.clip(np.asarray(variance, dtype=float), 0.0, None))
    z = mean[..., None] + scale[..., None] * nodes
    prob = expit(z) @ weights / np.sqrt(np.pi)
    return float(prob) if prob.ndim == 0 else prob


def predict_features(state: LaplaceState, train: ClassifyTrainSet,
                     features: Sequence[EmbeddedFeature]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    k_star = np.atleast_2d(matern_k(cross_distances(train.features, features), state.params))
    mean = k_star.T @ state.weights
    v = solve_triangular(state.chol_B, np.sqrt(state.W)[:, None] * k_star, lower=True)
    variance = state.params.delta2 - np.sum(v * v, axis=0)
    if np.any(variance < -VARIANCE_ROUNDOFF):
        logger.warning(f"Latent variance {variance.min():.3g} clamped to zero")
    variance = np.clip(variance, 0.0, None)
    return mean, variance, sigmoid_gaussian_integral(mean, variance)


def predict_class_batch(state: LaplaceState, train: ClassifyTrainSet,
                        densities: Sequence[DensityOnGrid]):
    return predict_features(state, train, embed_all(densities))


def predict_class(state: LaplaceState, train: ClassifyTrainSet,
                  p_star: DensityOnGrid) -> Tuple[float, float, float]:
    """(latent mean, latent variance, P(y = +1)) at one density."""
    mean, variance, prob = predict_class_batch(state, train, [p_star])
    return float(mean[0]), float(variance[0]), float(prob[0])


def negative_log_predictive(prob_plus, labels) -> float:
    """Mean of -log P(y_i) under the predicted class probabilities."""
    prob_plus = np.asarray(prob_plus, dtype=float)
    labels = np.asarray(labels)
    if prob_plus.shape != labels.shape:
        raise DataError(f"{prob_plus.shape} probabilities vs {labels.shape} labels")
    prob = np.where(labels == 1, prob_plus, 1.0 - prob_plus)
    return float(-np.mean(np.log(np.clip(prob, 1e-300, 1.0))))
