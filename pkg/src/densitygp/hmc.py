"""
Hamiltonian Monte Carlo over the covariance hyperparameters.

Sampling happens in q = (log delta2, log alpha); the potential is the negative
log posterior in those coordinates, Jacobian included, so every draw maps
back to strictly positive parameters.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np
import pandas as pd

from .errors import AllRejected, NonFiniteGradient, NumericalError, PreconditionError
from .inference import Objective, PriorConfig, log_prior, log_prior_grad

logger = logging.getLogger(__name__)

TARGET_ACCEPT = (0.6, 0.9)


@dataclass(frozen=True)
class HMCConfig:
    n_samples: int = 1000
    n_leapfrog: int = 20
    step_size: float = 0.05
    burn_in: int = 200
    thinning: int = 2
    seed: int = 0
    tune: bool = True
    tune_rounds: int = 12
    tune_draws: int = 30
    min_accept: float = 0.01

    def __post_init__(self):
        if not self.step_size > 0:
            raise PreconditionError(f"step size must be positive, got {self.step_size}")
        for name in ('n_samples', 'n_leapfrog', 'thinning', 'tune_draws'):
            if int(getattr(self, name)) < 1:
                raise PreconditionError(f"{name} must be >= 1")
        if not 0 <= self.burn_in < self.n_samples:
            raise PreconditionError(f"burn_in must be in [0, n_samples), got {self.burn_in}")


@dataclass(frozen=True)
class HMCChain:
    # retained draws after burn-in and thinning
    samples: np.ndarray
    energies: np.ndarray
    accepted: np.ndarray
    iterations: np.ndarray
    accept_rate: float
    step_size: float

    @property
    def estimate(self) -> np.ndarray:
        """Posterior mean of the retained draws."""
        return self.samples.mean(axis=0)


class LogSpacePosterior:
    """Potential energy -log p(q | y) for q = log(delta2, alpha)."""

    def __init__(self, objective: Objective, priors: PriorConfig = PriorConfig()):
        self.objective = objective
        self.priors = priors

    def potential(self, q: np.ndarray) -> float:
        theta = np.exp(q)
        return float(self.objective.eval(*theta) - log_prior(*theta, self.priors) - np.sum(q))

    def grad_potential(self, q: np.ndarray) -> np.ndarray:
        theta = np.exp(q)
        grad = np.asarray(self.objective.grad(*theta)) - np.asarray(log_prior_grad(*theta, self.priors))
        return grad * theta - 1.0


def hamiltonian(q: np.ndarray, s: np.ndarray, potential: Callable[[np.ndarray], float]) -> float:
    """Potential plus kinetic energy 1/2 |s|^2."""
    s = np.asarray(s, dtype=float)
    return float(potential(np.asarray(q, dtype=float)) + 0.5 * s @ s)


def _checked(grad: np.ndarray) -> np.ndarray:
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient("potential gradient is not finite along the trajectory")
    return grad


def leapfrog(q: np.ndarray, s: np.ndarray, n_steps: int, step_size: float,
             grad_potential: Callable[[np.ndarray], np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Half kick, n_steps drifts with full kicks in between, final half kick."""
    if n_steps < 1 or not step_size > 0:
        raise PreconditionError("leapfrog needs n_steps >= 1 and a positive step size")
    q = np.array(q, dtype=float)
    s = np.array(s, dtype=float)
    s = s - 0.5 * step_size * _checked(grad_potential(q))
    for k in range(n_steps):
        q = q + step_size * s
        grad = _checked(grad_potential(q))
        if k < n_steps - 1:
            s = s - step_size * grad
    s = s - 0.5 * step_size * grad
    return q, s


def hmc_chain(potential: Callable[[np.ndarray], float],
              grad_potential: Callable[[np.ndarray], np.ndarray],
              q0, cfg: HMCConfig) -> HMCChain:
    """Generic HMC in working coordinates with Metropolis correction."""
    rng = np.random.default_rng(cfg.seed)
    q = np.array(q0, dtype=float)
    u_current = potential(q)
    draws, energies, flags = [], [], []

    for _ in range(cfg.n_samples):
        s = rng.standard_normal(q.size)
        e_old = u_current + 0.5 * s @ s
        threshold = rng.uniform()
        accept = False
        try:
            q_new, s_new = leapfrog(q, s, cfg.n_leapfrog, cfg.step_size, grad_potential)
            u_new = potential(q_new)
            e_new = u_new + 0.5 * s_new @ s_new
            if np.isfinite(e_new):
                delta = e_new - e_old
                accept = delta <= 0 or threshold < np.exp(-delta)
        except NumericalError as exc:
            logger.debug(f"trajectory rejected: {type(exc).__name__}")
        if accept:
            q, u_current = q_new, u_new
            energies.append(e_new)
        else:
            energies.append(e_old)
        draws.append(q.copy())
        flags.append(accept)

    flags = np.array(flags, dtype=bool)
    accept_rate = float(flags.mean())
    if accept_rate < cfg.min_accept:
        raise AllRejected(f"acceptance rate {accept_rate:.3f} with step size {cfg.step_size:g}")
    kept = np.arange(cfg.burn_in, cfg.n_samples, cfg.thinning)
    return HMCChain(np.array(draws)[kept], np.array(energies)[kept], flags[kept], kept,
                    accept_rate, cfg.step_size)


def tune_step_size(potential, grad_potential, q0, cfg: HMCConfig) -> Tuple[float, np.ndarray]:
    """Short pre-runs that shrink or grow the step until acceptance is in TARGET_ACCEPT.

    Returns the step size and the last state of the final pre-run.
    """
    step = cfg.step_size
    q = np.array(q0, dtype=float)
    low, high = TARGET_ACCEPT
    for round_index in range(cfg.tune_rounds):
        trial = replace(cfg, n_samples=cfg.tune_draws, burn_in=0, thinning=1, step_size=step,
                        seed=int(np.random.SeedSequence([cfg.seed, round_index]).generate_state(1)[0]),
                        min_accept=0.0)
        chain = hmc_chain(potential, grad_potential, q, trial)
        q = chain.samples[-1]
        logger.debug(f"tuning round {round_index}: step {step:.4g}, acceptance {chain.accept_rate:.2f}")
        if low <= chain.accept_rate <= high:
            break
        step = step * 0.5 if chain.accept_rate < low else step * 1.5
    return step, q


def hmc_sample(obj: Objective, priors: PriorConfig = PriorConfig(),
               cfg: HMCConfig = HMCConfig()) -> HMCChain:
    """Sample (delta2, alpha) from the hyperparameter posterior.

    The chain starts at the prior medians; samples are returned in the
    original (positive) parameters.
    """
    posterior = LogSpacePosterior(obj, priors)
    q0 = np.log(priors.medians())
    step = cfg.step_size
    if cfg.tune:
        step, q0 = tune_step_size(posterior.potential, posterior.grad_potential, q0, cfg)
        logger.info(f"HMC step size tuned to {step:.4g}")
    chain = hmc_chain(posterior.potential, posterior.grad_potential, q0, replace(cfg, step_size=step))
    logger.info(f"HMC acceptance rate {chain.accept_rate:.2f} over {cfg.n_samples} draws")
    return replace(chain, samples=np.exp(chain.samples))


def chain_frame(chain: HMCChain) -> pd.DataFrame:
    return pd.DataFrame({
        'iteration': chain.iterations,
        'delta2': chain.samples[:, 0],
        'alpha': chain.samples[:, 1],
        'energy': chain.energies,
        'accepted': chain.accepted,
    })


def write_chain_csv(chain: HMCChain, path) -> None:
    chain_frame(chain).to_csv(path, index=False)
