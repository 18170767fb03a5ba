# Probabilistic PCA: closed-form fit, and what the fitted model says about the data.

import numpy as np
import scipy.linalg

from lowrank import ppca_fit, ppca_log_likelihood
from lowrank.ppca import sample_ppca

rng = np.random.default_rng(0)
A = rng.standard_normal((20, 3)) * [4.0, 3.0, 2.0]
D = sample_ppca(A, noise_precision=1.0, n=5000, seed=1)  # columns are points

model = ppca_fit(D, 3)
print("noise variance:", round(model.noise_variance, 4), "(true 1.0)")
print("largest principal angle to the true loadings:",
      np.max(scipy.linalg.subspace_angles(model.A_hat, A)))

# the likelihood keeps rising with r, but slowly once r passes the true dimension
for r in range(1, 7):
    ll = ppca_log_likelihood(ppca_fit(D, r), D)
    print(f"r={r}  log-likelihood per point {ll / D.shape[1]:.4f}")
