# Building blocks: SVD, rank truncation, singular value thresholding and
# entrywise thresholding.  Every solver in the package is a loop over these.

import numpy as np

from lowrank import hard_threshold_entries, nuclear_norm, soft_threshold, svd, svt, truncate_rank

rng = np.random.default_rng(0)
M = rng.standard_normal((8, 6))

# thin SVD with a fixed sign convention, so repeated calls agree bit for bit
F = svd(M)
print("singular values:", np.round(F.s, 3))
print("reconstruction error:", np.linalg.norm(F.reconstruct() - M))

# best rank-2 approximation; the squared error is the energy of the dropped singular values
M2 = truncate_rank(M, 2)
print("rank-2 error^2:", np.linalg.norm(M - M2) ** 2, "tail energy:", np.sum(F.s[2:] ** 2))

# SVT shrinks every singular value by lam and drops the ones that go negative
lam = 1.0
X = svt(M, lam)
print("after svt:", np.round(np.linalg.svd(X, compute_uv=False), 3))
print("nuclear norm before/after:", round(nuclear_norm(M), 3), round(nuclear_norm(X), 3))

# entrywise versions: soft threshold (l1 prox) and keep-the-k-largest
v = np.array([[3.0, -0.5, 1.2], [-2.0, 0.1, 0.0]])
print(soft_threshold(v, 1.0))
print(hard_threshold_entries(v, 2))
