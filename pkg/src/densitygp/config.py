"""
Run configuration.

Resolution order is defaults < json5 config file < explicit CLI flags; the
resolved RunConfig is embedded in every report.
"""

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import json5

from .covariance import ALLOWED_NU, KERNEL_FORMS
from .density import DEFAULT_GRID_SIZE, MIN_GRID_SIZE
from .errors import DensityGPError, UsageError
from .hmc import HMCConfig
from .inference import PriorConfig
from .regression import DEFAULT_NOISE_VAR

logger = logging.getLogger(__name__)

OPTIMIZERS = ('grad', 'hmc')


@dataclass(frozen=True)
class RunConfig:
    grid_size: int = DEFAULT_GRID_SIZE
    noise_var: float = DEFAULT_NOISE_VAR
    nu_candidates: Tuple[float, ...] = ALLOWED_NU
    kernel_form: str = 'linear'
    optimizer: str = 'grad'
    priors: PriorConfig = field(default_factory=PriorConfig)
    hmc: HMCConfig = field(default_factory=HMCConfig)
    seed: int = 0
    split_fraction: float = 0.75
    repetitions: int = 20
    folds: int = 5
    workers: int = 1
    tol: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        object.__setattr__(self, 'nu_candidates', tuple(float(nu) for nu in self.nu_candidates))
        if self.grid_size < MIN_GRID_SIZE:
            raise UsageError(f"grid_size must be >= {MIN_GRID_SIZE}, got {self.grid_size}")
        if not self.noise_var > 0:
            raise UsageError(f"noise_var must be positive, got {self.noise_var}")
        if not self.nu_candidates:
            raise UsageError("nu_candidates must not be empty")
        bad = [nu for nu in self.nu_candidates if nu not in ALLOWED_NU]
        if bad:
            raise UsageError(f"unsupported nu candidates {bad}; allowed {ALLOWED_NU}")
        if self.kernel_form not in KERNEL_FORMS:
            raise UsageError(f"kernel_form must be one of {KERNEL_FORMS}, got {self.kernel_form!r}")
        if self.optimizer not in OPTIMIZERS:
            raise UsageError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if not 0.0 < self.split_fraction < 1.0:
            raise UsageError(f"split_fraction must be in (0, 1), got {self.split_fraction}")
        if self.repetitions < 1:
            raise UsageError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.folds < 2:
            raise UsageError(f"folds must be >= 2, got {self.folds}")
        if self.workers < 1:
            raise UsageError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'RunConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        values = dict(data)
        if 'priors' in values:
            values['priors'] = _nested(PriorConfig, values['priors'], 'priors')
        if 'hmc' in values:
            values['hmc'] = _nested(HMCConfig, values['hmc'], 'hmc')
        try:
            return cls(**values)
        except DensityGPError as exc:
            raise UsageError(str(exc)) from None
        except TypeError as exc:
            raise UsageError(f"invalid config value: {exc}") from None

    def with_overrides(self, **overrides) -> 'RunConfig':
        """Replace every field whose override is not None."""
        data = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            if key in ('priors', 'hmc') and isinstance(value, Mapping):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        return RunConfig.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['nu_candidates'] = list(self.nu_candidates)
        return data


def _nested(cls, value, name: str):
    if isinstance(value, cls):
        return value
    if not isinstance(value, Mapping):
        raise UsageError(f"config key '{name}' must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(value) - known)
    if unknown:
        raise UsageError(f"unknown keys in '{name}': {', '.join(unknown)}")
    try:
        current = cls()
        return replace(current, **value)
    except DensityGPError as exc:
        raise UsageError(f"{name}: {exc}") from None


def load_config(path: Optional[str]) -> RunConfig:
    """Read a json5 config file; no path gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise UsageError(f"{path}: cannot read config ({exc.strerror or exc})") from None
    try:
        data = json5.loads(text)
    except ValueError as exc:
        raise UsageError(f"{path}: invalid json5 ({exc})") from None
    if not isinstance(data, Mapping):
        raise UsageError(f"{path}: top level must be an object")
    logger.debug(f"Loaded config from {path}")
    return RunConfig.from_dict(data)
