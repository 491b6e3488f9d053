import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.special import gamma, kv

from conftest import beta_density
from densitygp.covariance import (ALLOWED_NU, JitterPolicy, MaternParams, build_cov,
                                  cov_from_distances, cov_grad_matrices, cross_distances,
                                  matern_k, matern_k_grad, pairwise_distances)
from densitygp.errors import NotPSD, PreconditionError, UnsupportedNu
from densitygp.geometry import embed, embed_all, l2_norm


def bessel_matern(t, params):
    """General Matern form delta2 2^(1-nu)/Gamma(nu) x^nu K_nu(x) at the same argument."""
    nu = params.nu
    if params.form == 'sqrt':
        x = 2.0 * np.sqrt(nu * t) / params.alpha
    else:
        x = 2.0 * np.sqrt(nu) * t / params.alpha
    return params.delta2 * 2.0 ** (1.0 - nu) / gamma(nu) * x ** nu * kv(nu, x)


@pytest.mark.parametrize('nu', ALLOWED_NU)
@pytest.mark.parametrize('form', ['linear', 'sqrt'])
def test_closed_form_matches_bessel_form(nu, form):
    params = MaternParams(1.7, 0.8, nu, form)
    t = np.linspace(0.01, 3.0, 40)
    assert_allclose(matern_k(t, params), bessel_matern(t, params), rtol=1e-10)


@pytest.mark.parametrize('nu', ALLOWED_NU)
def test_covariance_at_zero_is_delta2(nu):
    assert matern_k(0.0, MaternParams(2.3, 0.5, nu)) == pytest.approx(2.3)


def test_exponential_kernel_at_half():
    params = MaternParams(1.0, 2.0, 0.5)
    t = 0.7
    assert matern_k(t, params) == pytest.approx(np.exp(-2.0 * np.sqrt(0.5) * t / 2.0))


@given(st.sampled_from(ALLOWED_NU), st.floats(0.0, 5.0), st.floats(1e-3, 5.0))
@settings(max_examples=60, deadline=None)
def test_covariance_decreases_with_distance(nu, t, dt):
    params = MaternParams(1.0, 0.7, nu)
    assert matern_k(t + dt, params) <= matern_k(t, params)


@pytest.mark.parametrize('nu', ALLOWED_NU)
@pytest.mark.parametrize('form', ['linear', 'sqrt'])
def test_kernel_gradient_matches_finite_differences(nu, form):
    params = MaternParams(1.3, 0.6, nu, form)
    t = np.array([0.05, 0.3, 0.9, 2.0])
    d_delta2, d_alpha = matern_k_grad(t, params)
    h = 1e-6
    fd_delta2 = (matern_k(t, params.with_values(1.3 + h, 0.6)) - matern_k(t, params.with_values(1.3 - h, 0.6))) / (2 * h)
    fd_alpha = (matern_k(t, params.with_values(1.3, 0.6 + h)) - matern_k(t, params.with_values(1.3, 0.6 - h))) / (2 * h)
    assert_allclose(d_delta2, fd_delta2, rtol=1e-6, atol=1e-10)
    assert_allclose(d_alpha, fd_alpha, rtol=1e-6, atol=1e-10)


def test_unsupported_nu_is_rejected():
    with pytest.raises(UnsupportedNu):
        MaternParams(1.0, 1.0, 1.0)


@pytest.mark.parametrize('delta2,alpha', [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
def test_parameters_must_be_positive(delta2, alpha):
    with pytest.raises(PreconditionError):
        MaternParams(delta2, alpha)


def test_unknown_kernel_form_is_rejected():
    with pytest.raises(PreconditionError):
        MaternParams(1.0, 1.0, 2.5, 'cubic')


def test_negative_distance_is_rejected():
    with pytest.raises(PreconditionError):
        matern_k(-0.1, MaternParams(1.0, 1.0))


def test_pairwise_distances_are_l2_distances_of_features(regression_data):
    densities, _ = regression_data
    features = embed_all(densities)
    d = pairwise_distances(features)
    assert_allclose(d, d.T, atol=0.0)
    assert np.all(np.diag(d) == 0.0)
    assert d[0, 3] == pytest.approx(l2_norm(features[0].vec - features[3].vec), rel=1e-10)


def test_cross_distances_shape(regression_data):
    densities, _ = regression_data
    features = embed_all(densities)
    d = cross_distances(features[:5], features[5:])
    assert d.shape == (5, 3)
    assert d[1, 2] == pytest.approx(l2_norm(features[1].vec - features[7].vec), rel=1e-10)


def test_covariance_matrix_is_symmetric_with_delta2_diagonal(regression_data):
    densities, _ = regression_data
    cov = build_cov(embed_all(densities), MaternParams(2.0, 0.5, 2.5))
    assert_allclose(cov.entries, cov.entries.T, atol=0.0)
    assert np.all(np.diag(cov.entries) == 2.0)
    assert cov.jitter_used == 0.0


@pytest.mark.parametrize('nu', [0.5, 1.5])
def test_distinct_densities_give_positive_definite_covariance(nu):
    rng = np.random.default_rng(2024)
    for _ in range(50):
        n = int(rng.integers(5, 31))
        params = rng.uniform(1.5, 8.0, size=(n, 2))
        features = [embed(beta_density(a, b, 64)) for a, b in params]
        d = pairwise_distances(features)
        alpha = 0.25 * float(np.median(d[np.triu_indices(n, k=1)]))
        cov = cov_from_distances(d, MaternParams(1.0, alpha, nu))
        assert cov.jitter_used == 0.0
        assert np.linalg.eigvalsh(cov.entries).min() > 0.0


def test_duplicate_densities_need_jitter():
    p = beta_density(2.0, 5.0)
    cov = build_cov(embed_all([p, p]), MaternParams(1.0, 0.5, 2.5))
    assert cov.jitter_used == pytest.approx(1e-10)
    np.linalg.cholesky(cov.effective)


def test_jitter_beyond_the_cap_raises():
    p = beta_density(2.0, 5.0)
    with pytest.raises(NotPSD):
        build_cov(embed_all([p, p]), MaternParams(1.0, 0.5, 2.5), JitterPolicy(start=1e-10, maximum=1e-12))


def test_covariance_gradient_matrices_match_kernel_gradient(regression_data):
    densities, _ = regression_data
    d = pairwise_distances(embed_all(densities))
    params = MaternParams(1.5, 0.4, 1.5)
    d_delta2, d_alpha = cov_grad_matrices(d, params)
    assert d_delta2.shape == d.shape
    assert d_alpha[2, 5] == pytest.approx(matern_k_grad(d[2, 5], params)[1])
    assert np.all(np.diag(d_alpha) == 0.0)
