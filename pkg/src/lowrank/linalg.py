"""Dense linear-algebra primitives shared by every solver.

Matrices are plain 2-D ``float64`` numpy arrays. Every function returns a new
array and never writes into its inputs.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdFactors",
    "ObservationMask",
    "as_matrix",
    "svd",
    "numerical_rank",
    "truncate_rank",
    "nuclear_norm",
    "svt",
    "soft_threshold",
    "hard_threshold_entries",
    "project_omega",
    "project_omega_complement",
    "relative_distance",
]

# singular values below RANK_RTOL * sigma_1 count as zero when reporting rank
RANK_RTOL = 1e-12


def as_matrix(M, name="matrix"):
    """Return `M` as a finite 2-D float64 array (copying only if needed)."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return A


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``M = U @ diag(s) @ V.T``.

    ``V`` holds the right singular vectors as columns (n x k), not ``V^T``.
    """

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    @property
    def k(self):
        return self.s.shape[0]

    def reconstruct(self, rank=None):
        r = self.k if rank is None else rank
        return (self.U[:, :r] * self.s[:r]) @ self.V[:, :r].T


def svd(M):
    """Thin SVD with a deterministic sign convention.

    The first entry of each left singular vector that is not numerically
    zero is made nonnegative; the matching right singular vector is flipped
    with it.  LAPACK non-convergence surfaces as ``numpy.linalg.LinAlgError``.
    """
    A = as_matrix(M)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    V = Vt.T
    if U.size:
        mag = np.abs(U)
        # index of the first entry above noise level in each column
        lead = np.argmax(mag > 1e-12 * mag.max(axis=0, initial=0.0), axis=0)
        signs = np.sign(U[lead, np.arange(U.shape[1])])
        signs[signs == 0] = 1.0
        U = U * signs
        V = V * signs
    return SvdFactors(U, s, V)


def numerical_rank(M, rtol=RANK_RTOL):
    s = np.linalg.svd(as_matrix(M), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def truncate_rank(M, r):
    """Best rank-`r` approximation of `M` in Frobenius norm (Eckart-Young)."""
    A = as_matrix(M)
    if not isinstance(r, (int, np.integer)) or r < 0 or r > min(A.shape):
        raise ValueError(f"rank {r!r} out of range for shape {A.shape}")
    if r == 0:
        return np.zeros_like(A)
    return svd(A).reconstruct(int(r))


def nuclear_norm(M):
    return float(np.sum(np.linalg.svd(as_matrix(M), compute_uv=False)))


def _svt(Z, lam):
    # returns the thresholded matrix and its (shrunk) singular values
    F = svd(Z)
    s = np.maximum(F.s - lam, 0.0)
    k = int(np.count_nonzero(s))
    X = (F.U[:, :k] * s[:k]) @ F.V[:, :k].T
    return X, s[:k]


def svt(Z, lam):
    """Singular value thresholding, the proximal map of ``lam * ||X||_*``.

    Returns ``sum_i max(sigma_i - lam, 0) u_i v_i^T``, the unique minimiser of
    ``0.5 * ||Z - X||_F^2 + lam * ||X||_*``.
    """
    if lam < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam}")
    return _svt(as_matrix(Z), lam)[0]


def soft_threshold(M, lam):
    """Entrywise shrinkage ``sign(x) * max(|x| - lam, 0)``."""
    if lam < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam}")
    A = as_matrix(M)
    return np.sign(A) * np.maximum(np.abs(A) - lam, 0.0)


def hard_threshold_entries(M, k):
    """Keep the `k` largest-magnitude entries of `M`, zero the rest.

    Ties are broken in favour of the smaller column-major (Fortran) index.
    """
    A = as_matrix(M)
    if k < 0 or k > A.size:
        raise ValueError(f"cardinality {k} out of range for {A.size} entries")
    out = np.zeros_like(A)
    if k == 0:
        return out
    flat = A.ravel(order="F")
    # stable sort on -|x| keeps column-major order among equal magnitudes
    keep = np.argsort(-np.abs(flat), kind="stable")[:k]
    out_flat = np.zeros_like(flat)
    out_flat[keep] = flat[keep]
    return out_flat.reshape(A.shape, order="F")


class ObservationMask:
    """The set of observed entries of an ``rows x cols`` matrix.

    Stored as a read-only boolean array; ``mask.observed[i, j]`` is True when
    entry ``(i, j)`` is observed.
    """

    __slots__ = ("_observed",)

    def __init__(self, observed):
        obs = np.array(observed, dtype=bool)
        if obs.ndim != 2 or 0 in obs.shape:
            raise ValueError(f"mask must be a nonempty 2-D array, got shape {obs.shape}")
        obs.setflags(write=False)
        self._observed = obs

    @classmethod
    def from_indices(cls, rows, cols, indices):
        obs = np.zeros((rows, cols), dtype=bool)
        seen = set()
        for i, j in indices:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"index {(i, j)} out of bounds for {rows}x{cols}")
            if (i, j) in seen:
                raise ValueError(f"duplicate index {(i, j)}")
            seen.add((i, j))
            obs[i, j] = True
        return cls(obs)

    @classmethod
    def full(cls, rows, cols):
        return cls(np.ones((rows, cols), dtype=bool))

    @property
    def observed(self):
        return self._observed

    @property
    def shape(self):
        return self._observed.shape

    @property
    def rows(self):
        return self._observed.shape[0]

    @property
    def cols(self):
        return self._observed.shape[1]

    def __len__(self):
        return int(np.count_nonzero(self._observed))

    def indices(self):
        """Observed ``(i, j)`` pairs in row-major order."""
        return [tuple(map(int, ij)) for ij in np.argwhere(self._observed)]

    def complement(self):
        return ObservationMask(~self._observed)

    def oversampling_ratio(self, r):
        m, n = self.shape
        return len(self) / ((m + n - r) * r)

    def __eq__(self, other):
        return isinstance(other, ObservationMask) and np.array_equal(
            self._observed, other._observed
        )

    def __hash__(self):
        return hash((self.shape, self._observed.tobytes()))

    def __repr__(self):
        return f"ObservationMask({self.rows}x{self.cols}, observed={len(self)})"


def _mask_array(mask, shape):
    obs = mask.observed if isinstance(mask, ObservationMask) else np.asarray(mask, dtype=bool)
    if obs.shape != shape:
        raise ValueError(f"mask shape {obs.shape} does not match matrix shape {shape}")
    return obs


def project_omega(M, mask):
    """Keep the observed entries of `M` and zero everything else."""
    A = as_matrix(M)
    return np.where(_mask_array(mask, A.shape), A, 0.0)


def project_omega_complement(M, mask):
    A = as_matrix(M)
    return np.where(_mask_array(mask, A.shape), 0.0, A)


def relative_distance(estimate, truth):
    """``||estimate - truth||_F / ||truth||_F``."""
    X = as_matrix(estimate, "estimate")
    T = as_matrix(truth, "truth")
    if X.shape != T.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {T.shape}")
    denom = np.linalg.norm(T)
    if denom == 0:
        raise ValueError("truth has zero Frobenius norm")
    return float(np.linalg.norm(X - T) / denom)
