import numpy as np
import pandas as pd
import pytest

from conftest import beta_density
from densitygp import pipeline
from densitygp.config import RunConfig
from densitygp.covariance import MaternParams
from densitygp.datasets import gen_classification_beta
from densitygp.errors import NotPSD, PreconditionError, UsageError
from densitygp.hmc import HMCConfig
from densitygp.inference import OptimizeResult
from densitygp.pipeline import (derive_seed, evaluate_model, fit_model, make_train_set,
                                predict_model, run_repetitions, summarize, train_test_split)

QUICK = RunConfig(grid_size=128, nu_candidates=(2.5,), max_iter=30)


def test_fit_report_records_the_descent(regression_data):
    densities, targets = regression_data
    model, report = fit_model('regress', densities, targets, QUICK)
    assert report.nlml_final <= report.nlml_initial
    assert report.params['nu'] == 2.5
    assert model.params.nu == 2.5
    data = report.to_dict()
    assert set(data['timing']) == {'wall_seconds'}
    assert 'wall_seconds' not in data
    assert data['stalled'] is False


def test_fit_selects_nu_by_cross_validation(regression_data):
    densities, targets = regression_data
    config = QUICK.with_overrides(nu_candidates=(0.5, 2.5), folds=4)
    model, report = fit_model('regress', densities, targets, config)
    assert model.params.nu in (0.5, 2.5)
    assert set(report.nu_scores) == {0.5, 2.5}


def test_fit_with_hmc(regression_data):
    densities, targets = regression_data
    config = QUICK.with_overrides(optimizer='hmc', hmc={'n_samples': 40, 'burn_in': 10, 'n_leapfrog': 5,
                                                        'step_size': 0.05, 'tune': False})
    model, report = fit_model('regress', densities, targets, config)
    assert report.optimizer == 'hmc'
    assert report.hmc['n_retained'] == 15
    assert model.params.delta2 > 0 and model.params.alpha > 0


def test_predict_columns(regression_data, classification_data):
    densities, targets = regression_data
    model, _ = fit_model('regress', densities, targets, QUICK)
    assert list(predict_model(model, densities[:2]).columns) == ['mean', 'variance']

    densities, labels = classification_data
    model, _ = fit_model('classify', densities, labels, QUICK)
    frame = predict_model(model, [beta_density(2.0, 5.0), beta_density(5.0, 2.0)])
    assert list(frame.columns) == ['latent_mean', 'latent_variance', 'prob_plus', 'predicted']
    assert list(frame['predicted']) == [1, -1]


def test_evaluate_classification(classification_data):
    densities, labels = classification_data
    model, _ = fit_model('classify', densities, labels, QUICK)
    metrics = evaluate_model(model, densities, labels)
    assert metrics['accuracy'] == 1.0
    assert metrics['auc'] == 1.0
    assert set(metrics) == {'accuracy', 'auc', 'nlml', 'neg_log_predictive'}


def test_one_class_test_set_reports_nan_auc(classification_data):
    densities, labels = classification_data
    model, _ = fit_model('classify', densities, labels, QUICK)
    metrics = evaluate_model(model, densities[:3], labels[:3])
    assert metrics['accuracy'] == 1.0
    assert np.isnan(metrics['auc'])


def test_unknown_task():
    with pytest.raises(UsageError):
        make_train_set('cluster', [], [])


def test_split_is_a_partition():
    train, test = train_test_split(20, 0.75, seed=3)
    assert len(train) == 15 and len(test) == 5
    assert sorted(np.concatenate([train, test])) == list(range(20))


def test_split_needs_both_sides():
    with pytest.raises(PreconditionError):
        train_test_split(2, 0.9, seed=0)


def test_derived_seeds_are_stable():
    assert derive_seed(1, 2) == derive_seed(1, 2)
    assert derive_seed(1, 2) != derive_seed(1, 3)


def test_repetitions_are_reproducible():
    data = gen_classification_beta(n_per_class=6, seed=1, grid_size=128)
    config = QUICK.with_overrides(repetitions=2)
    first = run_repetitions('classify', data.densities, data.labels, config)
    second = run_repetitions('classify', data.densities, data.labels, config)
    assert list(first['repetition']) == [0, 1]
    pd.testing.assert_frame_equal(first, second)


def test_failed_repetition_is_recorded(regression_data, monkeypatch):
    densities, targets = regression_data

    def failing_fit(*args, **kwargs):
        raise NotPSD("singular")

    monkeypatch.setattr(pipeline, 'fit_model', failing_fit)
    frame = run_repetitions('regress', densities, targets, QUICK.with_overrides(repetitions=2))
    assert list(frame['error']) == ['NotPSD', 'NotPSD']


def test_summary_skips_failed_rows():
    frame = pd.DataFrame({
        'repetition': [0, 1, 2], 'seed': [1, 2, 3], 'n_train': [6, 6, 6], 'n_test': [2, 2, 2],
        'error': ['', '', 'NotPSD'], 'rmse': [0.1, 0.3, np.nan],
    })
    summary = summarize(frame)
    assert list(summary.index) == ['rmse']
    assert summary.loc['rmse', 'mean'] == pytest.approx(0.2)
    assert summary.loc['rmse', 'count'] == 2
    assert summary.loc['rmse', 'formatted'].startswith('0.2000 ± ')


def test_hmc_config_reaches_the_sampler():
    assert QUICK.with_overrides(hmc={'n_samples': 600}).hmc == HMCConfig(n_samples=600)


def test_indistinguishable_classes_give_even_odds():
    train = gen_classification_beta(n_per_class=8, param_shift=0.0, seed=4, grid_size=128)
    test = gen_classification_beta(n_per_class=4, param_shift=0.0, seed=5, grid_size=128)
    model, _ = fit_model('classify', train.densities, train.labels, QUICK)
    prob = predict_model(model, test.densities)['prob_plus']
    assert abs(prob.mean() - 0.5) < 0.2


def test_stalled_fits_show_in_the_repetition_table(regression_data, monkeypatch):
    densities, targets = regression_data

    def stalled_optimizer(train, nu, form, tol, max_iter):
        return MaternParams(0.8, 0.3, nu, form), OptimizeResult(0.8, 0.3, 1.0, 2.0, 4, False, float('nan'),
                                                                stalled=True)

    monkeypatch.setattr(pipeline, 'optimize_hyperparameters', stalled_optimizer)
    _, report = fit_model('regress', densities, targets, QUICK)
    assert report.stalled and report.to_dict()['stalled']
    frame = run_repetitions('regress', densities, targets, QUICK.with_overrides(repetitions=2))
    assert list(frame['stalled']) == [1, 1]
    assert 'stalled' not in summarize(frame).index
