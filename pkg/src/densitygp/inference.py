"""
Covariance hyperparameter estimation: objectives, priors, gradient descent
and cross-validated choice of the smoothness nu.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import halfcauchy, invgamma

from .classification import (ClassifyTrainSet, negative_log_predictive,
                             nlml_classification, nlml_classification_grad,
                             laplace_map, predict_features as predict_class_features)
from .covariance import ALLOWED_NU, MaternParams
from .errors import (DensityGPError, LineSearchFailed, NonPositiveParam,
                     NumericalError, PreconditionError)
from .metrics import rmse
from .regression import (RegressionTrainSet, fit_regression, nlml_regression,
                         nlml_regression_grad,
                         predict_features as predict_regression_features)

logger = logging.getLogger(__name__)

TrainSet = Union[RegressionTrainSet, ClassifyTrainSet]

ARMIJO_C = 1e-4
MAX_HALVINGS = 50
# largest move per iteration in log-parameter space
MAX_LOG_STEP = 5.0


@dataclass(frozen=True)
class Objective:
    """A negative log-marginal likelihood in (delta2, alpha) and its gradient."""

    eval: Callable[[float, float], float]
    grad: Callable[[float, float], Tuple[float, float]]


def regression_objective(train: RegressionTrainSet, nu: float, form: str = 'linear') -> Objective:
    def params(delta2, alpha):
        return MaternParams(delta2, alpha, nu, form)

    return Objective(
        eval=lambda d, a: nlml_regression(train, params(d, a)),
        grad=lambda d, a: nlml_regression_grad(train, params(d, a)),
    )


def classification_objective(train: ClassifyTrainSet, nu: float, form: str = 'linear') -> Objective:
    def params(delta2, alpha):
        return MaternParams(delta2, alpha, nu, form)

    return Objective(
        eval=lambda d, a: nlml_classification(train, params(d, a)),
        grad=lambda d, a: nlml_classification_grad(train, params(d, a)),
    )


def make_objective(train: TrainSet, nu: float, form: str = 'linear') -> Objective:
    if isinstance(train, RegressionTrainSet):
        return regression_objective(train, nu, form)
    return classification_objective(train, nu, form)


def default_init(train: TrainSet) -> Tuple[float, float]:
    """Starting point: target variance (or 1) and the median feature distance."""
    if isinstance(train, RegressionTrainSet):
        delta2 = max(float(np.var(train.targets)), 1e-3)
    else:
        delta2 = 1.0
    upper = train.distances[np.triu_indices(train.size, k=1)]
    upper = upper[upper > 0]
    alpha = float(np.median(upper)) if upper.size else 1.0
    return delta2, alpha


# Priors

@dataclass(frozen=True)
class PriorConfig:
    b_delta2: float = 5.0
    a_alpha: float = 2.0
    b_alpha: float = 1.0

    def __post_init__(self):
        for name in ('b_delta2', 'a_alpha', 'b_alpha'):
            if not getattr(self, name) > 0:
                raise PreconditionError(f"prior hyperparameter {name} must be positive")

    def medians(self) -> Tuple[float, float]:
        return (float(halfcauchy.median(scale=self.b_delta2)),
                float(invgamma.median(self.a_alpha, scale=self.b_alpha)))


def _check_positive(delta2: float, alpha: float):
    if not (delta2 > 0 and alpha > 0):
        raise NonPositiveParam(f"prior needs positive parameters, got delta2={delta2}, alpha={alpha}")


def log_prior(delta2: float, alpha: float, config: PriorConfig = PriorConfig()) -> float:
    """Half-Cauchy log-density for delta2 plus inverse-gamma log-density for alpha."""
    _check_positive(delta2, alpha)
    return float(halfcauchy.logpdf(delta2, scale=config.b_delta2)
                 + invgamma.logpdf(alpha, config.a_alpha, scale=config.b_alpha))


def log_prior_grad(delta2: float, alpha: float, config: PriorConfig = PriorConfig()) -> Tuple[float, float]:
    _check_positive(delta2, alpha)
    b = config.b_delta2
    d_delta2 = -2.0 * delta2 / (b * b + delta2 * delta2)
    d_alpha = -(config.a_alpha + 1.0) / alpha + config.b_alpha / (alpha * alpha)
    return d_delta2, d_alpha


# Gradient descent

@dataclass(frozen=True)
class OptimizeResult:
    delta2: float
    alpha: float
    value: float
    initial_value: float
    n_iter: int
    converged: bool
    grad_norm: float
    trace: Tuple[float, ...] = field(default=())
    # line search gave up before the gradient test passed
    stalled: bool = False


def _log_space_grad(obj: Objective, theta: np.ndarray) -> np.ndarray:
    return np.asarray(obj.grad(*theta), dtype=float) * theta


def gradient_descent(obj: Objective, init: Tuple[float, float], tol: float = 1e-6,
                     max_iter: int = 500) -> OptimizeResult:
    """Minimize obj over (log delta2, log alpha) with Armijo backtracking.

    Stops when the sup-norm of the log-space gradient drops below tol or
    after max_iter iterations. The log-space gradient is the raw gradient
    times theta, so tol bounds theta * dNLML/dtheta rather than the raw
    gradient; grad_norm in the result is on the same scale.
    """
    theta = np.asarray(init, dtype=float)
    if theta.shape != (2,) or np.any(theta <= 0):
        raise PreconditionError(f"initial parameters must be two positive numbers, got {init}")
    x = np.log(theta)
    value = float(obj.eval(*theta))
    initial_value = value
    g = _log_space_grad(obj, theta)
    trace = [value]
    step = 1.0
    converged = False
    iteration = 0

    while iteration < max_iter:
        grad_norm = float(np.max(np.abs(g)))
        if grad_norm < tol:
            converged = True
            break
        t = min(2.0 * step, MAX_LOG_STEP / grad_norm)
        for _ in range(MAX_HALVINGS):
            x_new = x - t * g
            try:
                value_new = float(obj.eval(*np.exp(x_new)))
            except NumericalError:
                value_new = np.inf
            if value_new <= value - ARMIJO_C * t * float(g @ g):
                break
            t *= 0.5
        else:
            raise LineSearchFailed(
                f"no sufficient decrease after {MAX_HALVINGS} halvings (gradient {grad_norm:.3g})",
                point=tuple(np.exp(x)), value=value, n_iter=iteration)
        iteration += 1
        x, value, step = x_new, value_new, t
        g = _log_space_grad(obj, np.exp(x))
        trace.append(value)
        logger.debug(f"descent iteration {iteration}: value {value:.8g}, step {t:.3g}")

    grad_norm = float(np.max(np.abs(g)))
    if not converged:
        converged = grad_norm < tol
    delta2, alpha = np.exp(x)
    return OptimizeResult(float(delta2), float(alpha), value, initial_value, iteration,
                          converged, grad_norm, tuple(trace))


def optimize_hyperparameters(train: TrainSet, nu: float, form: str = 'linear',
                             init: Optional[Tuple[float, float]] = None, tol: float = 1e-6,
                             max_iter: int = 500) -> Tuple[MaternParams, OptimizeResult]:
    """Gradient descent that keeps the last accepted point if the line search stalls."""
    obj = make_objective(train, nu, form)
    init = default_init(train) if init is None else init
    try:
        result = gradient_descent(obj, init, tol=tol, max_iter=max_iter)
    except LineSearchFailed as exc:
        logger.warning(f"⚠️ Line search stalled after {exc.n_iter} iterations; keeping last point")
        delta2, alpha = exc.point
        initial = float(obj.eval(*init))
        result = OptimizeResult(delta2, alpha, exc.value, initial, exc.n_iter, False, float('nan'),
                                stalled=True)
    return MaternParams(result.delta2, result.alpha, nu, form), result


# Cross-validation over nu

@dataclass(frozen=True)
class NuSelection:
    nu: float
    scores: Dict[float, float]


def _fold_score(train: TrainSet, test: TrainSet, params: MaternParams) -> float:
    if isinstance(train, RegressionTrainSet):
        model = fit_regression(train, params)
        mean, _ = predict_regression_features(model, train, test.features)
        return rmse(mean, test.targets)
    state = laplace_map(train, params)
    _, _, prob = predict_class_features(state, train, test.features)
    return negative_log_predictive(prob, test.labels)


def select_nu(train: TrainSet, candidate_nus: Sequence[float] = ALLOWED_NU, folds: int = 5,
              seed: int = 0, form: str = 'linear', tol: float = 1e-6,
              max_iter: int = 500) -> NuSelection:
    """k-fold cross-validation; ties resolve to the smallest nu."""
    candidates = sorted(float(nu) for nu in candidate_nus)
    if not candidates:
        raise PreconditionError("need at least one candidate nu")
    if len(candidates) == 1:
        return NuSelection(candidates[0], {candidates[0]: float('nan')})
    if folds < 2 or train.size < folds:
        raise PreconditionError(f"need 2 <= folds <= n, got folds={folds}, n={train.size}")

    order = np.random.default_rng(seed).permutation(train.size)
    chunks = np.array_split(order, folds)
    scores = {}
    for nu in candidates:
        fold_scores = []
        try:
            for k, held_out in enumerate(chunks):
                kept = np.concatenate([c for j, c in enumerate(chunks) if j != k])
                sub_train, sub_test = train.take(kept), train.take(held_out)
                params, _ = optimize_hyperparameters(sub_train, nu, form, tol=tol, max_iter=max_iter)
                fold_scores.append(_fold_score(sub_train, sub_test, params))
            scores[nu] = float(np.mean(fold_scores))
        except DensityGPError as exc:
            logger.warning(f"⚠️ nu={nu} disqualified: {type(exc).__name__}: {exc}")
            scores[nu] = float('inf')
        logger.info(f"CV score for nu={nu}: {scores[nu]:.6g}")

    best = candidates[0]
    for nu in candidates[1:]:
        if scores[nu] < scores[best]:
            best = nu
    return NuSelection(best, scores)
