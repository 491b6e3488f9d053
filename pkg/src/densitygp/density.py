"""
Probability densities on the unit interval, sampled on a uniform grid.

All densities in the package share one grid convention: ``m`` equally spaced
points on [0, 1], endpoints included, integrated with the trapezoid rule.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import gaussian_kde

from .errors import (AllZero, DataError, DegenerateSamples, LengthMismatch,
                     NegativeInput, PreconditionError)

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 512
MIN_GRID_SIZE = 3
FLOOR_EPSILON = 1e-12
TOL_NEG = 1e-12
TOL_NORM = 1e-8


def uniform_grid(m: int) -> np.ndarray:
    if m < MIN_GRID_SIZE:
        raise PreconditionError(f"grid size must be >= {MIN_GRID_SIZE}, got {m}")
    return np.linspace(0.0, 1.0, m)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def integrate(values) -> float:
    """Trapezoid integral over [0, 1] of values sampled on the uniform grid."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < MIN_GRID_SIZE:
        raise LengthMismatch(f"expected a 1-D vector with >= {MIN_GRID_SIZE} values, got shape {values.shape}")
    return float(trapezoid(values, dx=1.0 / (values.size - 1)))


def trapezoid_inner(f, g) -> float:
    """The L2 inner product on [0, 1] under the trapezoid rule."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise LengthMismatch(f"inner product of vectors with shapes {f.shape} and {g.shape}")
    return integrate(f * g)


@dataclass(frozen=True)
class DensityOnGrid:
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        object.__setattr__(self, 'values', values)
        if values.ndim != 1 or values.size < MIN_GRID_SIZE:
            raise DataError(f"a density needs >= {MIN_GRID_SIZE} grid values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("density values must be finite")
        if np.any(values < 0):
            raise NegativeInput("density values must be nonnegative")
        total = integrate(values)
        if abs(total - 1.0) > TOL_NORM:
            raise DataError(f"density integrates to {total!r}, expected 1")

    @property
    def grid_size(self) -> int:
        return int(self.values.size)

    @property
    def grid(self) -> np.ndarray:
        return uniform_grid(self.grid_size)


@dataclass(frozen=True)
class SampleBatch:
    draws: np.ndarray

    def __post_init__(self):
        draws = _frozen(self.draws)
        object.__setattr__(self, 'draws', draws)
        if draws.ndim != 1 or draws.size < 2:
            raise DataError(f"a sample batch needs at least 2 draws, got shape {draws.shape}")
        if np.any(draws < 0.0) or np.any(draws > 1.0) or not np.all(np.isfinite(draws)):
            raise DataError("all draws must lie in [0, 1]")


def normalize(values) -> DensityOnGrid:
    """Clamp, floor and rescale grid values into a density.

    Values down to -TOL_NEG are treated as round-off and clamped; the floor
    keeps square roots and reciprocals finite.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < MIN_GRID_SIZE:
        raise DataError(f"need a 1-D vector with >= {MIN_GRID_SIZE} values, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise DataError("values must be finite")
    if np.any(values < -TOL_NEG):
        raise NegativeInput(f"minimum value {values.min()!r} is below -{TOL_NEG}")
    clamped = np.clip(values, 0.0, None)
    if integrate(clamped) <= 0.0:
        raise AllZero("values integrate to zero")
    floored = np.maximum(clamped, FLOOR_EPSILON)
    return DensityOnGrid(floored / integrate(floored))


def uniform_density(m: int = DEFAULT_GRID_SIZE) -> DensityOnGrid:
    return DensityOnGrid(np.ones(m))


def density_from_function(func: Callable[[np.ndarray], np.ndarray],
                          m: int = DEFAULT_GRID_SIZE) -> DensityOnGrid:
    return normalize(func(uniform_grid(m)))


def l1_distance(p: DensityOnGrid, q: DensityOnGrid) -> float:
    if p.grid_size != q.grid_size:
        raise LengthMismatch(f"grid sizes differ: {p.grid_size} vs {q.grid_size}")
    return integrate(np.abs(p.values - q.values))


def _check_spread(draws: np.ndarray) -> None:
    if np.ptp(draws) == 0.0:
        raise DegenerateSamples(f"all {draws.size} draws are identical")


def silverman_bandwidth(draws: np.ndarray) -> float:
    """h = 0.9 * min(std, IQR / 1.34) * s^(-1/5)."""
    draws = np.asarray(draws, dtype=float)
    _check_spread(draws)
    std = float(np.std(draws, ddof=1))
    q75, q25 = np.percentile(draws, [75, 25])
    iqr = float(q75 - q25)
    spread = min(std, iqr / 1.34) if iqr > 0.0 else std
    return 0.9 * spread * draws.size ** (-0.2)


def kde_estimate(batch: SampleBatch, grid_size: int = DEFAULT_GRID_SIZE,
                 bandwidth: Optional[float] = None) -> DensityOnGrid:
    """Gaussian KDE on the grid, reflected at 0 and 1 to keep the mass inside."""
    if bandwidth is not None and not bandwidth > 0:
        raise PreconditionError(f"bandwidth must be positive, got {bandwidth}")
    draws = batch.draws
    _check_spread(draws)
    std = float(np.std(draws, ddof=1))
    h = silverman_bandwidth(draws) if bandwidth is None else float(bandwidth)

    # gaussian_kde scales its kernel by the sample standard deviation
    kde = gaussian_kde(draws, bw_method=h / std)
    x = uniform_grid(grid_size)
    pdf = kde.evaluate(x) + kde.evaluate(-x) + kde.evaluate(2.0 - x)
    logger.debug(f"KDE of {draws.size} draws with bandwidth {h:.4g}")
    return normalize(pdf)
