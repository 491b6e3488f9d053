import pytest

from densitygp.config import RunConfig, load_config
from densitygp.covariance import ALLOWED_NU
from densitygp.errors import UsageError
from densitygp.hmc import HMCConfig
from densitygp.inference import PriorConfig


def test_defaults():
    config = load_config(None)
    assert config == RunConfig()
    assert config.grid_size == 512
    assert config.noise_var == 1e-4
    assert config.nu_candidates == ALLOWED_NU
    assert config.optimizer == 'grad'


def test_json5_file_with_comments(tmp_path):
    path = tmp_path / 'run.json5'
    path.write_text("""
    {
      // smaller grid for quick runs
      grid_size: 256,
      nu_candidates: [1.5, 2.5],
      priors: {b_delta2: 2.0},
      hmc: {n_samples: 500, burn_in: 100,},
    }
    """)
    config = load_config(str(path))
    assert config.grid_size == 256
    assert config.nu_candidates == (1.5, 2.5)
    assert config.priors == PriorConfig(b_delta2=2.0)
    assert config.hmc == HMCConfig(n_samples=500, burn_in=100)


def test_flags_override_the_file(tmp_path):
    path = tmp_path / 'run.json5'
    path.write_text("{seed: 3, folds: 4}")
    config = load_config(str(path)).with_overrides(seed=9, folds=None)
    assert config.seed == 9
    assert config.folds == 4


def test_unknown_key_is_a_usage_error():
    with pytest.raises(UsageError):
        RunConfig.from_dict({'grid': 64})


def test_unknown_nested_key_is_a_usage_error():
    with pytest.raises(UsageError):
        RunConfig.from_dict({'hmc': {'leapfrog': 3}})


@pytest.mark.parametrize('data', [
    {'split_fraction': 1.0}, {'nu_candidates': [1.0]}, {'optimizer': 'adam'},
    {'kernel_form': 'cubic'}, {'noise_var': 0.0}, {'hmc': {'step_size': -1.0}},
])
def test_invalid_values_are_usage_errors(data):
    with pytest.raises(UsageError):
        RunConfig.from_dict(data)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(UsageError):
        load_config(str(tmp_path / 'absent.json5'))
    bad = tmp_path / 'bad.json5'
    bad.write_text("{grid_size: }")
    with pytest.raises(UsageError):
        load_config(str(bad))


def test_dict_round_trip():
    config = RunConfig(grid_size=64, nu_candidates=(0.5,), optimizer='hmc', seed=5)
    assert RunConfig.from_dict(config.to_dict()) == config
