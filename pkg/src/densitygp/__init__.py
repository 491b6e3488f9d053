"""
densitygp: Gaussian-process regression and classification with probability
densities on [0, 1] as inputs, using the Fisher-Rao geometry of the
square-root representation.
"""

from .classification import (ClassifyTrainSet, LaplaceState, laplace_map, nlml_classification,
                             nlml_classification_grad, predict_class)
from .covariance import ALLOWED_NU, CovMatrix, MaternParams, build_cov, matern_k
from .density import DensityOnGrid, SampleBatch, kde_estimate, normalize
from .errors import DataError, DensityGPError, NumericalError, UsageError
from .geometry import (embed, exp_map, frechet_mean, geodesic_distance, log_map,
                       parallel_transport, to_sphere)
from .hmc import HMCConfig, hmc_sample
from .inference import PriorConfig, gradient_descent, select_nu
from .regression import (RegressionTrainSet, fit_regression, nlml_regression,
                         nlml_regression_grad, predict_regression)

__version__ = '1.0.0'

__all__ = [
    'ALLOWED_NU', 'ClassifyTrainSet', 'CovMatrix', 'DataError', 'DensityGPError', 'DensityOnGrid',
    'HMCConfig', 'LaplaceState', 'MaternParams', 'NumericalError', 'PriorConfig',
    'RegressionTrainSet', 'SampleBatch', 'UsageError', 'build_cov', 'embed', 'exp_map',
    'fit_regression', 'frechet_mean', 'geodesic_distance', 'gradient_descent', 'hmc_sample',
    'kde_estimate', 'laplace_map', 'log_map', 'matern_k', 'nlml_classification',
    'nlml_classification_grad', 'nlml_regression', 'nlml_regression_grad', 'normalize',
    'parallel_transport', 'predict_class', 'predict_regression', 'select_nu', 'to_sphere',
]
