import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose
from scipy.stats import beta

from conftest import beta_density
from densitygp.density import (DensityOnGrid, SampleBatch, integrate, kde_estimate, l1_distance,
                               normalize, silverman_bandwidth, uniform_density, uniform_grid)
from densitygp.errors import (AllZero, DataError, DegenerateSamples, NegativeInput,
                              PreconditionError)

positive_vectors = arrays(np.float64, st.integers(3, 200), elements=st.floats(0.01, 10.0))


def test_uniform_density_integrates_to_one():
    assert integrate(uniform_density(512).values) == pytest.approx(1.0, abs=1e-14)


def test_integrate_linear_function_is_exact():
    # trapezoid rule is exact for linear integrands
    assert integrate(uniform_grid(17)) == pytest.approx(0.5, abs=1e-15)


@given(positive_vectors)
@settings(max_examples=50, deadline=None)
def test_normalize_gives_unit_integral(values):
    p = normalize(values)
    assert integrate(p.values) == pytest.approx(1.0, abs=1e-12)
    assert np.all(p.values > 0)


@given(positive_vectors, st.floats(0.1, 100.0))
@settings(max_examples=50, deadline=None)
def test_normalize_ignores_scale(values, scale):
    assert_allclose(normalize(scale * values).values, normalize(values).values, rtol=1e-12)


def test_normalize_is_idempotent():
    p = beta_density(2.0, 5.0)
    assert_allclose(normalize(p.values).values, p.values, rtol=1e-12, atol=1e-15)


def test_normalize_clamps_roundoff_negatives():
    values = np.ones(10)
    values[3] = -1e-13
    p = normalize(values)
    assert p.values[3] > 0


def test_normalize_rejects_negative_values():
    values = np.ones(10)
    values[3] = -1e-3
    with pytest.raises(NegativeInput):
        normalize(values)


def test_normalize_rejects_all_zero():
    with pytest.raises(AllZero):
        normalize(np.zeros(10))


def test_normalize_rejects_non_finite():
    values = np.ones(10)
    values[0] = np.nan
    with pytest.raises(DataError):
        normalize(values)


def test_density_on_grid_validates_mass():
    with pytest.raises(DataError):
        DensityOnGrid(np.full(10, 2.0))


def test_density_values_are_read_only():
    p = uniform_density(8)
    with pytest.raises(ValueError):
        p.values[0] = 3.0


def test_uniform_grid_needs_three_points():
    with pytest.raises(PreconditionError):
        uniform_grid(2)


def test_l1_distance_of_a_density_to_itself_is_zero():
    p = beta_density(2.0, 5.0)
    assert l1_distance(p, p) == 0.0
    assert l1_distance(p, uniform_density(p.grid_size)) > 0.1


def test_sample_batch_rejects_draws_outside_unit_interval():
    with pytest.raises(DataError):
        SampleBatch(np.array([0.1, 0.5, 1.2]))


def test_silverman_bandwidth_rejects_identical_draws():
    with pytest.raises(DegenerateSamples):
        silverman_bandwidth(np.full(50, 0.3))


def test_silverman_bandwidth_falls_back_to_std_when_iqr_is_zero():
    draws = np.array([0.5] * 20 + [0.1, 0.9])
    h = silverman_bandwidth(draws)
    assert h == pytest.approx(0.9 * np.std(draws, ddof=1) * draws.size ** -0.2)


def test_kde_recovers_beta_density(rng):
    draws = rng.beta(2.0, 5.0, size=5000)
    p = kde_estimate(SampleBatch(draws), grid_size=256)
    truth = normalize(beta.pdf(uniform_grid(256), 2.0, 5.0))
    assert integrate(p.values) == pytest.approx(1.0, abs=1e-10)
    assert l1_distance(p, truth) < 0.15


def test_kde_keeps_mass_near_boundary(rng):
    # reflection stops the estimate from dropping at 0 for mass piled at the edge
    draws = rng.uniform(0.0, 0.2, size=2000)
    p = kde_estimate(SampleBatch(draws), grid_size=201)
    assert p.values[0] > 0.5 * p.values[10]


def test_kde_explicit_bandwidth_must_be_positive(rng):
    with pytest.raises(PreconditionError):
        kde_estimate(SampleBatch(rng.uniform(size=20)), bandwidth=0.0)


def test_kde_rejects_identical_non_dyadic_draws():
    with pytest.raises(DegenerateSamples):
        kde_estimate(SampleBatch(np.full(50, 0.3)), 64)
