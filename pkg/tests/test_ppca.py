import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from lowrank import PpcaModel, ppca_fit, ppca_log_likelihood
from lowrank.ppca import sample_ppca


@pytest.fixture(scope="module")
def model_data():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((20, 3)) * [4.0, 3.0, 2.0]
    mean = rng.standard_normal(20)
    return A, sample_ppca(A, 1.0, 5000, seed=1, mean=mean)


def top_eigvecs(D, r):
    S = np.cov(D, bias=True)
    w, V = scipy.linalg.eigh(S)
    return w[::-1], V[:, ::-1][:, :r]


def test_fit_shapes_and_mean(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    assert model.A_hat.shape == (20, 3) and model.r == 3
    np.testing.assert_allclose(model.mean, D.mean(axis=1))
    assert not model.below_noise_floor


def test_span_matches_true_loadings(model_data):
    A, D = model_data
    model = ppca_fit(D, 3)
    assert np.max(scipy.linalg.subspace_angles(model.A_hat, A)) <= 0.05


def test_span_matches_eigen_oracle(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    _, U = top_eigvecs(D, 3)
    assert np.max(scipy.linalg.subspace_angles(model.A_hat, U)) <= 1e-8


def test_noise_variance_is_trailing_average(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    assert model.noise_variance == np.sum(model.eigenvalues[3:]) / 17
    w, _ = top_eigvecs(D, 3)
    assert model.noise_variance == pytest.approx(np.mean(w[3:]), rel=1e-12)


def test_loading_norms(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    w, _ = top_eigvecs(D, 3)
    np.testing.assert_allclose(np.linalg.norm(model.A_hat, axis=0) ** 2, w[:3] - model.noise_variance, rtol=1e-10)


def test_rotation_invariance(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    Q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((3, 3)))
    rotated = PpcaModel(model.A_hat @ Q, model.noise_precision, model.mean)
    np.testing.assert_allclose(rotated.covariance(), model.covariance(), atol=1e-10)
    assert ppca_log_likelihood(rotated, D) == pytest.approx(ppca_log_likelihood(model, D), rel=1e-12)


def test_near_noiseless_limit():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((10, 2))
    D = A @ rng.standard_normal((2, 2000)) + 1e-6 * rng.standard_normal((10, 2000))
    model = ppca_fit(D, 2)
    assert model.noise_variance < 1e-11
    assert np.max(scipy.linalg.subspace_angles(model.A_hat, A)) < 1e-5


def test_exact_low_rank_data():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((6, 2))
    D = A @ rng.standard_normal((2, 500))
    model = ppca_fit(D, 2)
    assert model.noise_variance <= 1e-12 * model.eigenvalues[0]
    _, U = top_eigvecs(D, 2)
    assert np.max(scipy.linalg.subspace_angles(model.A_hat, U)) <= 1e-8


def test_constant_data_rejected():
    with pytest.raises(ValueError):
        ppca_fit(np.ones((4, 10)), 1)


@pytest.mark.parametrize("r", [0, 5, 20, 2.0])
def test_rank_argument_errors(r):
    D = np.random.default_rng(0).standard_normal((5, 30))
    with pytest.raises(ValueError):
        ppca_fit(D, r)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 8), st.integers(1, 7))
def test_leading_eigenvalues_never_below_trailing_mean(seed, m, r):
    # sorted eigenvalues make lambda_r >= mean of the tail, so the floor is met up to ties
    r = min(r, m - 1)
    D = np.random.default_rng(seed).standard_normal((m, 3 * m))
    model = ppca_fit(D, r)
    assert np.all(model.eigenvalues[:r] >= model.noise_variance * (1 - 1e-12))
    assert np.all(np.isfinite(model.A_hat))


def test_loglik_standard_normal_at_origin():
    m = 4
    d = np.arange(m, dtype=float)
    model = PpcaModel(np.zeros((m, 1)), 1.0, d)
    assert ppca_log_likelihood(model, d[:, None]) == pytest.approx(-0.5 * m * np.log(2 * np.pi))


def test_loglik_matches_scipy(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    from scipy.stats import multivariate_normal

    ref = multivariate_normal(model.mean, model.covariance()).logpdf(D[:, :200].T).sum()
    assert ppca_log_likelihood(model, D[:, :200]) == pytest.approx(ref, rel=1e-10)


def test_loglik_doubles_on_duplication(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    once = ppca_log_likelihood(model, D)
    assert ppca_log_likelihood(model, np.hstack([D, D])) == pytest.approx(2 * once, rel=1e-12)


def test_mle_beats_perturbations(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    best = ppca_log_likelihood(model, D)
    rng = np.random.default_rng(7)
    for _ in range(100):
        A = model.A_hat + 1e-2 * rng.standard_normal(model.A_hat.shape)
        beta = model.noise_precision * np.exp(1e-2 * rng.standard_normal())
        assert ppca_log_likelihood(PpcaModel(A, beta, model.mean), D) <= best


def test_loglik_dimension_mismatch(model_data):
    _, D = model_data
    model = ppca_fit(D, 3)
    with pytest.raises(ValueError):
        ppca_log_likelihood(model, D[:5])


@pytest.mark.parametrize("beta", [0.0, -1.0, np.inf])
def test_model_rejects_bad_precision(beta):
    with pytest.raises(ValueError):
        PpcaModel(np.zeros((2, 1)), beta, np.zeros(2))


def test_sampler_deterministic():
    A = np.ones((3, 1))
    np.testing.assert_array_equal(sample_ppca(A, 2.0, 10, seed=9), sample_ppca(A, 2.0, 10, seed=9))
