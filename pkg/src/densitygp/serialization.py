"""
Trained models and their JSON model files.

Floats go through ``json`` (shortest round-trip repr), so a saved model loads
back bit-for-bit and predicts exactly as before saving.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from .classification import ClassifyTrainSet, LaplaceState
from .covariance import MaternParams
from .dataio import read_json, write_json
from .errors import DatasetFileError, TaskMismatch
from .geometry import EmbeddedFeature
from .regression import FittedRegression, RegressionTrainSet

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainedModel:
    task: str
    params: MaternParams
    train: Union[RegressionTrainSet, ClassifyTrainSet]
    fitted: Union[FittedRegression, LaplaceState]

    @property
    def grid_size(self) -> int:
        return self.train.features[0].grid_size

    def require_task(self, task: str) -> None:
        if task != self.task:
            raise TaskMismatch(f"model was trained for {self.task!r}, not {task!r}")


def _matrix(values) -> list:
    return np.asarray(values, dtype=float).tolist()


def model_to_dict(model: TrainedModel) -> Dict[str, Any]:
    data = {
        'format_version': FORMAT_VERSION,
        'task': model.task,
        'params': model.params.to_dict(),
        'grid_size': model.grid_size,
        'features': [_matrix(f.vec) for f in model.train.features],
    }
    fitted = model.fitted
    if model.task == 'regress':
        data['responses'] = _matrix(model.train.targets)
        data['noise_var'] = model.train.noise_var
        data['fitted'] = {
            'chol': _matrix(fitted.chol),
            'weights': _matrix(fitted.weights),
            'jitter_used': fitted.jitter_used,
        }
    else:
        data['responses'] = [int(v) for v in model.train.labels]
        data['fitted'] = {
            'Zhat': _matrix(fitted.Zhat),
            'W': _matrix(fitted.W),
            'chol_B': _matrix(fitted.chol_B),
            'weights': _matrix(fitted.weights),
            'log_posterior': fitted.log_posterior,
            'n_iter': fitted.n_iter,
            'jitter_used': fitted.jitter_used,
        }
    return data


def model_from_dict(data: Dict[str, Any], source: str = '<memory>') -> TrainedModel:
    version = data.get('format_version')
    if version != FORMAT_VERSION:
        raise DatasetFileError(source, f"unsupported model format_version {version!r}")
    try:
        task = data['task']
        params = MaternParams(**data['params'])
        features = tuple(EmbeddedFeature(np.array(v, dtype=float)) for v in data['features'])
        fitted = data['fitted']
        if task == 'regress':
            train = RegressionTrainSet(features, np.array(data['responses'], dtype=float), data['noise_var'])
            model_fit = FittedRegression(params, np.array(fitted['chol']), np.array(fitted['weights']),
                                         train.noise_var, fitted['jitter_used'])
        elif task == 'classify':
            train = ClassifyTrainSet(features, np.array(data['responses'], dtype=int))
            model_fit = LaplaceState(params, np.array(fitted['Zhat']), np.array(fitted['W']),
                                     np.array(fitted['chol_B']), np.array(fitted['weights']),
                                     fitted['log_posterior'], fitted['n_iter'], fitted['jitter_used'])
        else:
            raise DatasetFileError(source, f"unknown task {task!r}")
    except (KeyError, TypeError) as exc:
        raise DatasetFileError(source, f"malformed model file ({exc!r})") from None
    return TrainedModel(task, params, train, model_fit)


def save_model(model: TrainedModel, path: Union[str, Path]) -> None:
    write_json(model_to_dict(model), path)
    logger.debug(f"Saved {model.task} model to {path}")


def load_model(path: Union[str, Path]) -> TrainedModel:
    return model_from_dict(read_json(path), str(path))
