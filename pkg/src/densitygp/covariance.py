"""
Half-integer Matern covariances over embedded density features.

K(t) = delta2 * P_nu(u) * exp(-u), with u = 2 sqrt(nu) t / alpha by default
and P_nu the usual closed-form polynomial for nu = 1/2, 3/2, 5/2, 7/2.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import LinAlgError, cholesky
from scipy.spatial.distance import cdist, pdist, squareform

from .density import MIN_GRID_SIZE
from .errors import LengthMismatch, NotPSD, PreconditionError, UnsupportedNu
from .geometry import EmbeddedFeature

logger = logging.getLogger(__name__)

ALLOWED_NU = (0.5, 1.5, 2.5, 3.5)
KERNEL_FORMS = ('linear', 'sqrt')

# coefficients of P_nu in increasing powers of u
_MATERN_POLY = {
    0.5: np.array([1.0]),
    1.5: np.array([1.0, 1.0]),
    2.5: np.array([1.0, 1.0, 1.0 / 3.0]),
    3.5: np.array([1.0, 1.0, 2.0 / 5.0, 1.0 / 15.0]),
}


@dataclass(frozen=True)
class JitterPolicy:
    """Diagonal jitter, relative to delta2, tried in turn when Cholesky fails."""

    start: float = 1e-10
    factor: float = 10.0
    maximum: float = 1e-6


@dataclass(frozen=True)
class MaternParams:
    delta2: float
    alpha: float
    nu: float = 2.5
    # 'linear': u = 2 sqrt(nu) t / alpha; 'sqrt': u = 2 sqrt(nu t) / alpha
    form: str = 'linear'

    def __post_init__(self):
        object.__setattr__(self, 'delta2', float(self.delta2))
        object.__setattr__(self, 'alpha', float(self.alpha))
        object.__setattr__(self, 'nu', float(self.nu))
        if not self.delta2 > 0:
            raise PreconditionError(f"delta2 must be positive, got {self.delta2}")
        if not self.alpha > 0:
            raise PreconditionError(f"alpha must be positive, got {self.alpha}")
        if self.nu not in _MATERN_POLY:
            raise UnsupportedNu(f"nu must be one of {ALLOWED_NU}, got {self.nu}")
        if self.form not in KERNEL_FORMS:
            raise PreconditionError(f"kernel form must be one of {KERNEL_FORMS}, got {self.form!r}")

    def with_values(self, delta2: float, alpha: float) -> 'MaternParams':
        return MaternParams(delta2, alpha, self.nu, self.form)

    def to_dict(self) -> dict:
        return {'delta2': self.delta2, 'alpha': self.alpha, 'nu': self.nu, 'form': self.form}


def _check_nu(nu: float) -> np.ndarray:
    try:
        return _MATERN_POLY[float(nu)]
    except KeyError:
        raise UnsupportedNu(f"nu must be one of {ALLOWED_NU}, got {nu}") from None


def _argument(t: np.ndarray, params: MaternParams) -> np.ndarray:
    if params.form == 'sqrt':
        return 2.0 * np.sqrt(params.nu * t) / params.alpha
    return 2.0 * np.sqrt(params.nu) * t / params.alpha


def matern_k(t, params: MaternParams):
    """Matern covariance at distance(s) t >= 0."""
    coeffs = _check_nu(params.nu)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise PreconditionError("distances must be nonnegative")
    u = _argument(t, params)
    value = params.delta2 * P.polyval(u, coeffs) * np.exp(-u)
    return float(value) if value.ndim == 0 else value


def matern_k_grad(t, params: MaternParams):
    """(dK/d delta2, dK/d alpha) at distance(s) t.

    Both argument forms scale as 1/alpha, so du/d alpha = -u / alpha and
    dK/d alpha = delta2 * (P(u) - P'(u)) * exp(-u) * u / alpha.
    """
    coeffs = _check_nu(params.nu)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise PreconditionError("distances must be nonnegative")
    u = _argument(t, params)
    decay = np.exp(-u)
    poly = P.polyval(u, coeffs)
    d_delta2 = poly * decay
    d_alpha = params.delta2 * (poly - P.polyval(u, P.polyder(coeffs))) * decay * u / params.alpha
    if d_delta2.ndim == 0:
        return float(d_delta2), float(d_alpha)
    return d_delta2, d_alpha


@dataclass(frozen=True)
class CovMatrix:
    entries: np.ndarray
    jitter_used: float = 0.0

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def effective(self) -> np.ndarray:
        """The factorizable matrix: entries plus the recorded diagonal jitter."""
        if self.jitter_used == 0.0:
            return self.entries
        return self.entries + self.jitter_used * np.eye(self.size)


def _feature_matrix(features: Sequence[EmbeddedFeature]) -> np.ndarray:
    """Rows scaled by the square-root trapezoid weights so Euclidean = L2."""
    if len(features) < 1:
        raise PreconditionError("need at least one feature")
    sizes = {f.grid_size for f in features}
    if len(sizes) != 1:
        raise LengthMismatch(f"features live on different grids: {sorted(sizes)}")
    m = sizes.pop()
    if m < MIN_GRID_SIZE:
        raise LengthMismatch(f"grid size {m} is too small")
    weights = np.full(m, 1.0 / (m - 1))
    weights[0] = weights[-1] = 0.5 / (m - 1)
    return np.vstack([f.vec for f in features]) * np.sqrt(weights)


def pairwise_distances(features: Sequence[EmbeddedFeature]) -> np.ndarray:
    x = _feature_matrix(features)
    if x.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(x, metric='euclidean'))


def cross_distances(train: Sequence[EmbeddedFeature], test: Sequence[EmbeddedFeature]) -> np.ndarray:
    """Distances with shape (len(train), len(test))."""
    return cdist(_feature_matrix(train), _feature_matrix(test), metric='euclidean')


def cov_from_distances(distances: np.ndarray, params: MaternParams,
                       jitter_policy: JitterPolicy = JitterPolicy()) -> CovMatrix:
    """Covariance from a precomputed distance matrix, jittered only if needed."""
    entries = matern_k(distances, params)
    entries = np.atleast_2d(entries)
    np.fill_diagonal(entries, params.delta2)
    jitter = 0.0
    while True:
        try:
            cholesky(entries + jitter * np.eye(entries.shape[0]), lower=True)
            break
        except LinAlgError:
            jitter = jitter_policy.start * params.delta2 if jitter == 0.0 else jitter * jitter_policy.factor
            if jitter > jitter_policy.maximum * params.delta2 * (1 + 1e-9):
                raise NotPSD(
                    f"covariance not factorizable with jitter up to {jitter_policy.maximum:g} * delta2") from None
            logger.debug(f"Cholesky failed, retrying with jitter {jitter:.1e}")
    return CovMatrix(entries, jitter)


def build_cov(features: Sequence[EmbeddedFeature], params: MaternParams,
              jitter_policy: JitterPolicy = JitterPolicy()) -> CovMatrix:
    return cov_from_distances(pairwise_distances(features), params, jitter_policy)


def cov_grad_matrices(distances: np.ndarray, params: MaternParams) -> Tuple[np.ndarray, np.ndarray]:
    d_delta2, d_alpha = matern_k_grad(np.atleast_2d(distances), params)
    return d_delta2, d_alpha
