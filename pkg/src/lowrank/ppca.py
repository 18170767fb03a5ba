"""Probabilistic PCA: closed-form maximum-likelihood fit and log-likelihood.

Data points are the *columns* of the data matrix (``m`` features by ``n``
points).  The model is ``d = A b + mean + e`` with ``b ~ N(0, I_r)`` and
``e ~ N(0, beta^{-1} I_m)``, so ``d ~ N(mean, A A^T + beta^{-1} I)``.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

__all__ = ["PpcaModel", "ppca_fit", "ppca_log_likelihood", "sample_ppca"]


@dataclass(frozen=True)
class PpcaModel:
    """Fitted PPCA parameters.

    Attributes
    ----------
    A_hat : ndarray, shape (m, r)
        Loading matrix ``U_r (Lambda_r - beta^{-1} I)^{1/2}`` (rotation ``Q = I``).
    noise_precision : float
        ``beta``; the noise variance is ``1 / beta``.
    mean : ndarray, shape (m,)
    eigenvalues : ndarray, shape (m,)
        Sample-covariance eigenvalues in nonincreasing order (empty for a
        hand-built model).
    below_noise_floor : bool
        True when some of the top ``r`` eigenvalues do not exceed the noise
        variance; those loading columns are clamped to zero.
    """

    A_hat: np.ndarray
    noise_precision: float
    mean: np.ndarray
    eigenvalues: np.ndarray = None
    below_noise_floor: bool = False

    def __post_init__(self):
        if not self.noise_precision > 0 or not np.isfinite(self.noise_precision):
            raise ValueError(f"noise precision must be positive and finite, got {self.noise_precision}")
        if self.eigenvalues is None:
            object.__setattr__(self, "eigenvalues", np.empty(0))

    @property
    def r(self):
        return self.A_hat.shape[1]

    @property
    def noise_variance(self):
        return 1.0 / self.noise_precision

    def covariance(self):
        m = self.A_hat.shape[0]
        return self.A_hat @ self.A_hat.T + self.noise_variance * np.eye(m)


def ppca_fit(data, r):
    """Maximum-likelihood PPCA with latent dimension `r`.

    Uses the eigen-decomposition of the centred, ``1/n``-normalised sample
    covariance: the noise variance is the mean of the ``m - r`` trailing
    eigenvalues and the loadings are the top-r eigenvectors scaled by
    ``sqrt(lambda_i - noise_variance)``.
    """
    D = as_matrix(data, "data")
    m, n = D.shape
    if not isinstance(r, (int, np.integer)) or not 1 <= r < min(m, n):
        raise ValueError(f"need 1 <= r < min(m, n) = {min(m, n)}, got {r!r}")
    mean = D.mean(axis=1)
    Dc = D - mean[:, None]
    S = (Dc @ Dc.T) / n
    w, U = np.linalg.eigh(S)
    w, U = w[::-1], U[:, ::-1]
    w = np.maximum(w, 0.0)
    noise_var = float(w[r:].sum() / (m - r))
    if noise_var <= 0:
        raise ValueError("data lie in an r-dimensional affine subspace; noise variance is zero")
    scale = w[:r] - noise_var
    below = bool(np.any(scale <= 0))
    # fix the sign of each eigenvector so the fit is deterministic
    lead = np.argmax(np.abs(U[:, :r]) > 1e-12, axis=0)
    signs = np.sign(U[lead, np.arange(r)])
    A_hat = U[:, :r] * signs * np.sqrt(np.maximum(scale, 0.0))
    return PpcaModel(A_hat, 1.0 / noise_var, mean, w, below)


def ppca_log_likelihood(model, data):
    """Sum over columns of ``log N(d_i | mean, A A^T + beta^{-1} I)``."""
    D = as_matrix(data, "data")
    m, n = D.shape
    if model.A_hat.shape[0] != m or model.mean.shape != (m,):
        raise ValueError(f"model dimension {model.A_hat.shape[0]} does not match data rows {m}")
    w, V = np.linalg.eigh(model.covariance())
    if w[0] <= 0:
        raise np.linalg.LinAlgError("model covariance is not positive definite")
    proj = V.T @ (D - model.mean[:, None])
    mahal = float(np.sum(proj * proj / w[:, None]))
    return -0.5 * (n * m * np.log(2 * np.pi) + n * float(np.sum(np.log(w))) + mahal)


def sample_ppca(A, noise_precision, n, seed, mean=None):
    """Draw `n` columns from the PPCA generative model."""
    A = as_matrix(A, "A")
    m, r = A.shape
    rng = np.random.Generator(np.random.PCG64(seed))
    B = rng.standard_normal((r, n))
    E = rng.standard_normal((m, n)) / np.sqrt(noise_precision)
    X = A @ B + E
    if mean is not None:
        X += np.asarray(mean, dtype=float)[:, None]
    return X
