"""
Synthetic datasets of densities.

Every observation draws from its own generator seeded by (seed, stream, index),
so a dataset is bit-identical for a fixed seed regardless of evaluation order.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.stats import beta as beta_dist
from scipy.stats import invgamma

from .density import (DEFAULT_GRID_SIZE, DensityOnGrid, SampleBatch, kde_estimate,
                      normalize, trapezoid_inner, uniform_grid)
from .errors import DataError, PreconditionError

logger = logging.getLogger(__name__)

MAX_REDRAWS = 100


@dataclass(frozen=True)
class RegressionDataset:
    densities: Tuple[DensityOnGrid, ...]
    targets: np.ndarray
    seed: int
    noiseless: Optional[np.ndarray] = None
    config: Dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.densities) != len(self.targets):
            raise DataError(f"{len(self.densities)} densities vs {len(self.targets)} targets")


@dataclass(frozen=True)
class ClassificationDataset:
    densities: Tuple[DensityOnGrid, ...]
    labels: np.ndarray
    seed: int
    config: Dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.densities) != len(self.labels):
            raise DataError(f"{len(self.densities)} densities vs {len(self.labels)} labels")


def observation_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def _fourier(c_sin: float, c_cos: float) -> Callable[[np.ndarray], np.ndarray]:
    root2 = np.sqrt(2.0)
    return lambda t: c_sin * root2 * np.sin(2 * np.pi * t) + c_cos * root2 * np.cos(2 * np.pi * t)


def sample_from_function(g: Callable[[np.ndarray], np.ndarray], sample_size: int,
                         rng: np.random.Generator, grid_size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Draws from the density proportional to softplus(g), by inverse CDF on the grid."""
    grid = uniform_grid(grid_size)
    weights = np.logaddexp(0.0, g(grid))
    cdf = cumulative_trapezoid(weights, grid, initial=0.0)
    cdf /= cdf[-1]
    return np.interp(rng.uniform(size=sample_size), cdf, grid)


def gen_regression_tfb(n: int = 100, noise: float = 0.01, sample_size: int = 500, seed: int = 0,
                       grid_size: int = DEFAULT_GRID_SIZE) -> RegressionDataset:
    """Densities estimated from samples of random truncated-Fourier functions.

    Targets are 0.5 <sqrt(p_i), sqrt(p_ref)> + 0.5 plus N(0, noise^2) errors,
    with p_ref built the same way from fixed coefficients (-0.5, 0.5).
    """
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    if sample_size < 100:
        raise PreconditionError(f"sample_size must be >= 100, got {sample_size}")
    if noise < 0:
        raise PreconditionError(f"noise must be nonnegative, got {noise}")

    ref_rng = observation_rng(seed, 1, 0)
    reference = kde_estimate(SampleBatch(sample_from_function(_fourier(-0.5, 0.5), sample_size, ref_rng,
                                                              grid_size)), grid_size)
    root_ref = np.sqrt(reference.values)

    densities, noiseless, targets = [], [], []
    for i in range(n):
        rng = observation_rng(seed, 0, i)
        c_sin, c_cos = rng.standard_normal(2)
        draws = sample_from_function(_fourier(c_sin, c_cos), sample_size, rng, grid_size)
        p = kde_estimate(SampleBatch(draws), grid_size)
        clean = 0.5 * trapezoid_inner(np.sqrt(p.values), root_ref) + 0.5
        densities.append(p)
        noiseless.append(clean)
        targets.append(clean + noise * rng.standard_normal())

    config = {'generator': 'tfb', 'n': n, 'noise': noise, 'sample_size': sample_size,
              'seed': seed, 'grid_size': grid_size}
    logger.debug(f"Generated {n} TFB regression densities")
    return RegressionDataset(tuple(densities), np.array(targets), seed, np.array(noiseless), config)


def _noisy_density(pdf: np.ndarray, noise: float, rng: np.random.Generator) -> DensityOnGrid:
    values = pdf + noise * rng.standard_normal(pdf.size) if noise > 0 else pdf
    return normalize(np.clip(values, 0.0, None))


def _two_class(pdf: Callable[[np.ndarray, Tuple[float, ...]], np.ndarray],
               centers: Dict[int, Tuple[float, ...]], jitter: Tuple[float, ...],
               n_per_class: int, noise: float, seed: int, grid_size: int):
    grid = uniform_grid(grid_size)
    densities, labels = [], []
    for stream, (label, center) in enumerate(centers.items()):
        for i in range(n_per_class):
            rng = observation_rng(seed, stream, i)
            for _ in range(MAX_REDRAWS):
                params = np.asarray(center) + np.asarray(jitter) * rng.standard_normal(len(center))
                if np.all(params > 0):
                    values = pdf(grid, tuple(params))
                    if np.all(np.isfinite(values)) and np.any(values > 0):
                        break
            else:
                raise DataError(f"no valid parameters around {center} after {MAX_REDRAWS} draws")
            densities.append(_noisy_density(values, noise, rng))
            labels.append(label)
    return tuple(densities), np.array(labels, dtype=int)


def gen_classification_beta(n_per_class: int = 100, param_shift: float = 0.8, noise: float = 0.02,
                            seed: int = 0, a0: float = 2.0, b0: float = 5.0,
                            param_jitter: float = 0.1,
                            grid_size: int = DEFAULT_GRID_SIZE) -> ClassificationDataset:
    """Class +1 around Beta(a0, b0), class -1 around Beta(a0 + shift, b0 + shift)."""
    _check_class_args(n_per_class, param_shift, noise)
    centers = {1: (a0, b0), -1: (a0 + param_shift, b0 + param_shift)}
    densities, labels = _two_class(lambda t, p: beta_dist.pdf(t, p[0], p[1]), centers,
                                   (param_jitter, param_jitter), n_per_class, noise, seed, grid_size)
    config = {'generator': 'beta', 'n_per_class': n_per_class, 'param_shift': param_shift,
              'noise': noise, 'seed': seed, 'a0': a0, 'b0': b0, 'param_jitter': param_jitter,
              'grid_size': grid_size}
    return ClassificationDataset(densities, labels, seed, config)


def gen_classification_invgamma(n_per_class: int = 100, param_shift: float = 0.6, noise: float = 0.02,
                                seed: int = 0, shape0: float = 3.0, scale: float = 0.5,
                                param_jitter: float = 0.1,
                                grid_size: int = DEFAULT_GRID_SIZE) -> ClassificationDataset:
    """Inverse-gamma densities truncated to [0, 1]; classes differ in shape, scale is shared."""
    _check_class_args(n_per_class, param_shift, noise)
    centers = {1: (shape0,), -1: (shape0 + param_shift,)}
    densities, labels = _two_class(lambda t, p: invgamma.pdf(t, p[0], scale=scale), centers,
                                   (param_jitter,), n_per_class, noise, seed, grid_size)
    config = {'generator': 'invgamma', 'n_per_class': n_per_class, 'param_shift': param_shift,
              'noise': noise, 'seed': seed, 'shape0': shape0, 'scale': scale,
              'param_jitter': param_jitter, 'grid_size': grid_size}
    return ClassificationDataset(densities, labels, seed, config)


def _check_class_args(n_per_class: int, param_shift: float, noise: float):
    if n_per_class < 1:
        raise PreconditionError(f"n_per_class must be >= 1, got {n_per_class}")
    if param_shift < 0:
        raise PreconditionError(f"param_shift must be nonnegative, got {param_shift}")
    if noise < 0:
        raise PreconditionError(f"noise must be nonnegative, got {noise}")
