"""
Fit / predict / evaluate orchestration shared by the CLI and the benchmark runner.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .classification import (ClassifyTrainSet, laplace_map, laplace_nlml,
                             negative_log_predictive, predict_class_batch)
from .config import RunConfig
from .covariance import MaternParams
from .density import DensityOnGrid
from .errors import NumericalError, OneClassOnly, PreconditionError, UsageError
from .hmc import hmc_sample
from .inference import default_init, make_objective, optimize_hyperparameters, select_nu
from .metrics import accuracy_auc, rmse
from .regression import (RegressionTrainSet, fit_regression, nlml_regression,
                         predict_regression_batch)
from .serialization import TrainedModel

logger = logging.getLogger(__name__)

TASKS = ('regress', 'classify')
# repetition-table columns that are bookkeeping, not metrics
ID_COLUMNS = ('repetition', 'seed', 'n_train', 'n_test', 'error', 'stalled')


def derive_seed(*words: int) -> int:
    return int(np.random.SeedSequence([int(w) for w in words]).generate_state(1)[0])


def make_train_set(task: str, densities: Sequence[DensityOnGrid], responses,
                   noise_var: float = 1e-4):
    if task == 'regress':
        return RegressionTrainSet.from_densities(densities, responses, noise_var)
    if task == 'classify':
        return ClassifyTrainSet.from_densities(densities, responses)
    raise UsageError(f"task must be one of {TASKS}, got {task!r}")


@dataclass(frozen=True)
class FitReport:
    task: str
    params: Dict[str, Any]
    optimizer: str
    nlml_initial: float
    nlml_final: float
    nlml_trace: Tuple[float, ...]
    n_iter: int
    converged: bool
    jitter_used: float
    nu_scores: Dict[float, float] = field(default_factory=dict)
    hmc: Optional[Dict[str, Any]] = None
    wall_seconds: float = 0.0
    stalled: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'task': self.task,
            'params': self.params,
            'optimizer': self.optimizer,
            'nlml_initial': self.nlml_initial,
            'nlml_final': self.nlml_final,
            'nlml_trace': list(self.nlml_trace),
            'n_iter': self.n_iter,
            'converged': self.converged,
            'stalled': self.stalled,
            'jitter_used': self.jitter_used,
            'nu_scores': {str(nu): score for nu, score in self.nu_scores.items()},
            'hmc': self.hmc,
            'timing': {'wall_seconds': self.wall_seconds},
        }


def _training_nlml(train, params: MaternParams, fitted) -> float:
    if isinstance(train, RegressionTrainSet):
        return nlml_regression(train, params)
    return laplace_nlml(fitted, train)


def fit_model(task: str, densities: Sequence[DensityOnGrid], responses,
              config: RunConfig = RunConfig()) -> Tuple[TrainedModel, FitReport]:
    """Choose nu, estimate (delta2, alpha) and factorize the final model."""
    started = time.perf_counter()
    train = make_train_set(task, densities, responses, config.noise_var)

    nu_scores: Dict[float, float] = {}
    nu = config.nu_candidates[0]
    if len(config.nu_candidates) > 1:
        selection = select_nu(train, config.nu_candidates, folds=min(config.folds, train.size),
                              seed=config.seed, form=config.kernel_form, tol=config.tol,
                              max_iter=config.max_iter)
        nu, nu_scores = selection.nu, selection.scores
        logger.info(f"🎯 Selected nu={nu}")

    hmc_info = None
    if config.optimizer == 'grad':
        params, result = optimize_hyperparameters(train, nu, config.kernel_form, tol=config.tol,
                                                  max_iter=config.max_iter)
        nlml_initial, trace, n_iter, converged = (result.initial_value, result.trace,
                                                  result.n_iter, result.converged)
        stalled = result.stalled
    else:
        objective = make_objective(train, nu, config.kernel_form)
        nlml_initial = float(objective.eval(*default_init(train)))
        hmc_cfg = replace(config.hmc, seed=derive_seed(config.seed, config.hmc.seed))
        chain = hmc_sample(objective, config.priors, hmc_cfg)
        delta2, alpha = chain.estimate
        params = MaternParams(delta2, alpha, nu, config.kernel_form)
        trace, n_iter, converged, stalled = (), config.hmc.n_samples, True, False
        hmc_info = {
            'accept_rate': chain.accept_rate,
            'step_size': chain.step_size,
            'n_retained': int(chain.samples.shape[0]),
            'posterior_std': chain.samples.std(axis=0).tolist(),
        }

    if task == 'regress':
        fitted = fit_regression(train, params)
    else:
        fitted = laplace_map(train, params)
    nlml_final = _training_nlml(train, params, fitted)

    report = FitReport(task, params.to_dict(), config.optimizer, float(nlml_initial), float(nlml_final),
                       tuple(trace), int(n_iter), bool(converged), fitted.jitter_used, nu_scores,
                       hmc_info, time.perf_counter() - started, stalled)
    logger.info(f"✅ Fitted {task} model: delta2={params.delta2:.4g}, alpha={params.alpha:.4g}, "
                f"NLML {nlml_initial:.4f} -> {nlml_final:.4f}")
    return TrainedModel(task, params, train, fitted), report


def predict_model(model: TrainedModel, densities: Sequence[DensityOnGrid]) -> pd.DataFrame:
    if model.task == 'regress':
        mean, variance = predict_regression_batch(model.fitted, model.train, densities)
        return pd.DataFrame({'mean': mean, 'variance': variance})
    mean, variance, prob = predict_class_batch(model.fitted, model.train, densities)
    return pd.DataFrame({
        'latent_mean': mean,
        'latent_variance': variance,
        'prob_plus': prob,
        'predicted': np.where(prob >= 0.5, 1, -1),
    })


def evaluate_model(model: TrainedModel, densities: Sequence[DensityOnGrid], responses) -> Dict[str, float]:
    """Task metrics on held-out data plus the model's training NLML."""
    predictions = predict_model(model, densities)
    nlml = _training_nlml(model.train, model.params, model.fitted)
    if model.task == 'regress':
        return {'rmse': rmse(predictions['mean'].to_numpy(), responses), 'nlml': nlml}

    prob = predictions['prob_plus'].to_numpy()
    try:
        acc, area = accuracy_auc(prob, responses)
    except OneClassOnly as exc:
        logger.warning(f"⚠️ {exc}; AUC reported as NaN")
        acc, area = exc.accuracy, float('nan')
    return {
        'accuracy': acc,
        'auc': area,
        'nlml': nlml,
        'neg_log_predictive': negative_log_predictive(prob, responses),
    }


def train_test_split(n: int, fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    n_train = int(round(fraction * n))
    if not 1 <= n_train < n:
        raise PreconditionError(f"split fraction {fraction} leaves an empty side for n={n}")
    order = np.random.default_rng(seed).permutation(n)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def _run_one(args) -> Dict[str, Any]:
    task, densities, responses, config, repetition = args
    seed = derive_seed(config.seed, repetition)
    train_idx, test_idx = train_test_split(len(densities), config.split_fraction, seed)
    row = {'repetition': repetition, 'seed': seed, 'n_train': len(train_idx), 'n_test': len(test_idx),
           'error': ''}
    try:
        model, report = fit_model(task, [densities[i] for i in train_idx], responses[train_idx],
                                  replace(config, seed=seed))
        row.update({'nu': model.params.nu, 'delta2': model.params.delta2, 'alpha': model.params.alpha,
                    'nlml_initial': report.nlml_initial, 'stalled': int(report.stalled)})
        row.update(evaluate_model(model, [densities[i] for i in test_idx], responses[test_idx]))
    except NumericalError as exc:
        logger.warning(f"⚠️ Repetition {repetition} failed: {type(exc).__name__}: {exc}")
        row['error'] = type(exc).__name__
    return row


def run_repetitions(task: str, densities: Sequence[DensityOnGrid], responses,
                    config: RunConfig = RunConfig()) -> pd.DataFrame:
    """Random split / fit / evaluate, one row per repetition, ordered by index."""
    responses = np.asarray(responses)
    if len(densities) != responses.shape[0]:
        raise PreconditionError(f"{len(densities)} densities vs {responses.shape[0]} responses")
    jobs = [(task, tuple(densities), responses, config, r) for r in range(config.repetitions)]
    logger.info(f"🚀 Running {config.repetitions} repetitions of {task} with {config.workers} worker(s)")
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows: List[Dict[str, Any]] = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(job) for job in jobs]
    return pd.DataFrame(rows)


def summarize(frame: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation of every metric column over successful repetitions."""
    ok = frame[frame['error'] == ''] if 'error' in frame else frame
    metrics = [c for c in ok.columns if c not in ID_COLUMNS and pd.api.types.is_numeric_dtype(ok[c])]
    summary = ok[metrics].agg(['mean', 'std']).T
    summary['count'] = ok[metrics].count()
    summary['formatted'] = [f"{m:.4f} ± {s:.4f}" for m, s in zip(summary['mean'], summary['std'])]
    return summary
