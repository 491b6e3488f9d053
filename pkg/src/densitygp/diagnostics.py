"""Gradient and geometry checks behind ``densitygp diagnose``."""

import logging
from itertools import combinations
from typing import Sequence

import numpy as np
import pandas as pd

from .covariance import ALLOWED_NU
from .datasets import gen_classification_beta, gen_regression_tfb, observation_rng
from .density import DensityOnGrid
from .errors import PreconditionError
from .geometry import isometry_discrepancy
from .inference import default_init, make_objective
from .pipeline import derive_seed, make_train_set

logger = logging.getLogger(__name__)

FD_RELATIVE_STEP = 1e-5


def central_difference(func, theta: np.ndarray, rel_step: float = FD_RELATIVE_STEP) -> np.ndarray:
    grad = np.zeros_like(theta)
    for k in range(theta.size):
        h = rel_step * theta[k]
        up, down = theta.copy(), theta.copy()
        up[k] += h
        down[k] -= h
        grad[k] = (func(*up) - func(*down)) / (2.0 * h)
    return grad


def _instance(task: str, seed: int, n_points: int, grid_size: int):
    if task == 'regress':
        data = gen_regression_tfb(n=n_points, seed=seed, grid_size=grid_size)
        return make_train_set(task, data.densities, data.targets)
    data = gen_classification_beta(n_per_class=max(n_points // 2, 1), seed=seed, grid_size=grid_size)
    return make_train_set(task, data.densities, data.labels)


def gradient_check(task: str, n_instances: int = 50, seed: int = 0, n_points: int = 12,
                   grid_size: int = 128) -> pd.DataFrame:
    """Analytic vs central-difference NLML gradients on random small problems.

    Each instance draws its own data, nu and (delta2, alpha) scattered around
    the default starting point.
    """
    if n_instances < 1:
        raise PreconditionError(f"n_instances must be >= 1, got {n_instances}")
    rows = []
    for instance in range(n_instances):
        instance_seed = derive_seed(seed, instance)
        rng = observation_rng(seed, instance, 1)
        train = _instance(task, instance_seed, n_points, grid_size)
        nu = float(rng.choice(ALLOWED_NU))
        delta2, alpha = np.asarray(default_init(train)) * np.exp(rng.uniform(-1.0, 1.0, size=2))
        objective = make_objective(train, nu)
        theta = np.array([delta2, alpha])
        analytic = np.asarray(objective.grad(*theta))
        numeric = central_difference(objective.eval, theta)
        rel_error = float(np.max(np.abs(analytic - numeric)) / max(np.max(np.abs(numeric)), 1e-8))
        rows.append({
            'instance': instance, 'nu': nu, 'delta2': delta2, 'alpha': alpha,
            'grad_delta2': analytic[0], 'fd_delta2': numeric[0],
            'grad_alpha': analytic[1], 'fd_alpha': numeric[1],
            'rel_error': rel_error,
        })
    frame = pd.DataFrame(rows)
    logger.info(f"🔍 {task} gradient check: max relative error {frame['rel_error'].max():.2e}")
    return frame


def isometry_report(densities: Sequence[DensityOnGrid]) -> pd.DataFrame:
    """Tangent chord at the pole vs geodesic distance for every pair."""
    if len(densities) < 2:
        raise PreconditionError("need at least two densities")
    rows = []
    for i, j in combinations(range(len(densities)), 2):
        chord, geodesic, difference = isometry_discrepancy(densities[i], densities[j])
        rows.append({'i': i, 'j': j, 'chord': chord, 'geodesic': geodesic, 'difference': difference})
    return pd.DataFrame(rows)
