"""
Fisher-Rao geometry of densities through the square-root map.

A density p is represented by phi = sqrt(p), a unit vector on the positive
part of the L2 sphere. Geodesics, exponential/log maps and parallel transport
are the sphere's; the fixed tangent space at the constant function 1 is the
feature space the covariance functions work in.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .density import DensityOnGrid, normalize, trapezoid_inner
from .errors import (AntipodalPair, DataError, LeavesHemisphere,
                     LengthMismatch, NoConvergence)

logger = logging.getLogger(__name__)

TOL_UNIT = 1e-8
TOL_TANGENT = 1e-8
TOL_ZERO = 1e-14
TOL_NEGATIVE = 1e-10
TOL_ANTIPODAL = 1e-10
# above this cosine the chord formula is used for the angle
CHORD_SWITCH = 0.9


def l2_norm(f) -> float:
    return float(np.sqrt(max(trapezoid_inner(f, f), 0.0)))


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpherePoint:
    phi: np.ndarray

    def __post_init__(self):
        phi = _readonly(self.phi)
        object.__setattr__(self, 'phi', phi)
        if np.any(phi < 0):
            raise DataError("sphere points must be nonnegative (upper hemisphere)")
        norm = l2_norm(phi)
        if abs(norm - 1.0) > TOL_UNIT:
            raise DataError(f"sphere point has norm {norm!r}, expected 1")

    @property
    def grid_size(self) -> int:
        return int(self.phi.size)


@dataclass(frozen=True)
class TangentVector:
    base: SpherePoint
    vec: np.ndarray

    def __post_init__(self):
        vec = _readonly(self.vec)
        object.__setattr__(self, 'vec', vec)
        if vec.shape != self.base.phi.shape:
            raise LengthMismatch(f"tangent vector shape {vec.shape} vs base {self.base.phi.shape}")
        residual = trapezoid_inner(vec, self.base.phi)
        if abs(residual) > TOL_TANGENT:
            raise DataError(f"vector is not tangent at its base point (inner product {residual!r})")

    @property
    def norm(self) -> float:
        return l2_norm(self.vec)


@dataclass(frozen=True)
class EmbeddedFeature:
    """Tangent vector at the unity pole: the input of every covariance."""

    vec: np.ndarray

    def __post_init__(self):
        vec = _readonly(self.vec)
        object.__setattr__(self, 'vec', vec)
        residual = trapezoid_inner(vec, np.ones_like(vec))
        if abs(residual) > TOL_TANGENT:
            raise DataError(f"feature is not tangent at the unity pole (mean {residual!r})")

    @property
    def grid_size(self) -> int:
        return int(self.vec.size)


def unity_pole(m: int) -> SpherePoint:
    return SpherePoint(np.ones(m))


def to_sphere(p: DensityOnGrid) -> SpherePoint:
    return SpherePoint(np.sqrt(p.values))


def to_density(point: SpherePoint) -> DensityOnGrid:
    return normalize(point.phi ** 2)


def _angle(phi1: np.ndarray, phi2: np.ndarray) -> Tuple[float, float]:
    """Return (beta, cos beta) for two unit vectors."""
    c = float(np.clip(trapezoid_inner(phi1, phi2), -1.0, 1.0))
    if c <= CHORD_SWITCH:
        return float(np.arccos(c)), c
    chord = l2_norm(phi2 - phi1)
    return float(2.0 * np.arcsin(min(chord / 2.0, 1.0))), c


def geodesic_distance(phi1: SpherePoint, phi2: SpherePoint) -> float:
    """Arc length between two points of the unit hemisphere, in [0, pi]."""
    if phi1.grid_size != phi2.grid_size:
        raise LengthMismatch(f"grid sizes differ: {phi1.grid_size} vs {phi2.grid_size}")
    beta, _ = _angle(phi1.phi, phi2.phi)
    return beta


def exp_map(base: SpherePoint, w: TangentVector) -> SpherePoint:
    norm = l2_norm(w.vec)
    if norm < TOL_ZERO:
        return base
    phi = np.cos(norm) * base.phi + np.sin(norm) * (w.vec / norm)
    if np.any(phi < -TOL_NEGATIVE):
        raise LeavesHemisphere(f"exp map of a vector with norm {norm:.4g} leaves the upper hemisphere")
    phi = np.clip(phi, 0.0, None)
    return SpherePoint(phi / l2_norm(phi))


def log_map(phi1: SpherePoint, phi2: SpherePoint) -> TangentVector:
    if phi1.grid_size != phi2.grid_size:
        raise LengthMismatch(f"grid sizes differ: {phi1.grid_size} vs {phi2.grid_size}")
    beta, c = _angle(phi1.phi, phi2.phi)
    if beta < TOL_ZERO:
        return TangentVector(phi1, np.zeros_like(phi1.phi))
    direction = phi2.phi - c * phi1.phi
    # scaling by the direction's own norm makes |result| = beta exactly
    return TangentVector(phi1, direction * (beta / l2_norm(direction)))


def embed(p: DensityOnGrid) -> EmbeddedFeature:
    """Log map at the unity pole of sqrt(p)."""
    w = log_map(unity_pole(p.grid_size), to_sphere(p))
    return EmbeddedFeature(w.vec)


def embed_all(densities: Sequence[DensityOnGrid]) -> List[EmbeddedFeature]:
    return [embed(p) for p in densities]


def parallel_transport(w: TangentVector, phi2: SpherePoint) -> TangentVector:
    """Move w from its base point to phi2 along the connecting geodesic."""
    phi1 = w.base
    total = phi1.phi + phi2.phi
    sq = trapezoid_inner(total, total)
    if np.sqrt(sq) < TOL_ANTIPODAL:
        raise AntipodalPair("cannot transport between antipodal points")
    vec = w.vec - 2.0 * total / sq * trapezoid_inner(w.vec, phi2.phi)
    return TangentVector(phi2, vec)


def geodesic_path(phi1: SpherePoint, phi2: SpherePoint, ts: Sequence[float]) -> List[SpherePoint]:
    """Points along the geodesic from phi1 (t=0) to phi2 (t=1)."""
    w = log_map(phi1, phi2)
    return [exp_map(phi1, TangentVector(phi1, float(t) * w.vec)) for t in ts]


def fisher_rao_inner(f1, f2, p: DensityOnGrid) -> float:
    """The Fisher-Rao metric at p: integral of f1 * f2 / p."""
    return trapezoid_inner(np.asarray(f1, dtype=float) / p.values, f2)


def pushforward(f, p: DensityOnGrid) -> TangentVector:
    """Differential of p -> sqrt(p) applied to a direction f with zero integral."""
    base = to_sphere(p)
    return TangentVector(base, np.asarray(f, dtype=float) / (2.0 * base.phi))


def fisher_rao_distance(p1: DensityOnGrid, p2: DensityOnGrid) -> float:
    """Distance on the space of densities under the map p -> 2 sqrt(p)."""
    psi1 = 2.0 * np.sqrt(p1.values)
    psi2 = 2.0 * np.sqrt(p2.values)
    # the image lies on the sphere of radius 2
    c = float(np.clip(trapezoid_inner(psi1, psi2) / 4.0, -1.0, 1.0))
    if c <= CHORD_SWITCH:
        return 2.0 * float(np.arccos(c))
    chord = l2_norm(psi2 - psi1) / 2.0
    return 2.0 * float(2.0 * np.arcsin(min(chord / 2.0, 1.0)))


def isometry_discrepancy(p1: DensityOnGrid, p2: DensityOnGrid) -> Tuple[float, float, float]:
    """(tangent chord at the pole, geodesic distance, chord - geodesic)."""
    chord = l2_norm(embed(p1).vec - embed(p2).vec)
    geodesic = geodesic_distance(to_sphere(p1), to_sphere(p2))
    return chord, geodesic, chord - geodesic


def frechet_mean(densities: Sequence[DensityOnGrid], max_iter: int = 100,
                 tol: float = 1e-9) -> DensityOnGrid:
    """Intrinsic mean by fixed-step Riemannian gradient descent.

    Starts from the normalized extrinsic average of the square-root
    representatives and repeats mu <- Exp_mu(mean_i Log_mu(phi_i)).
    """
    if len(densities) < 1:
        raise DataError("the Frechet mean needs at least one density")
    points = [to_sphere(p) for p in densities]
    start = np.mean([pt.phi for pt in points], axis=0)
    mu = SpherePoint(start / l2_norm(start))

    update_norm = np.inf
    for iteration in range(1, max_iter + 1):
        update = np.mean([log_map(mu, pt).vec for pt in points], axis=0)
        update_norm = l2_norm(update)
        if update_norm < tol:
            logger.debug(f"Frechet mean converged after {iteration} iterations")
            return to_density(mu)
        mu = exp_map(mu, TangentVector(mu, update))

    if update_norm > 100 * tol:
        raise NoConvergence(f"Frechet mean update norm {update_norm:.3g} after {max_iter} iterations")
    return to_density(mu)
