"""Robust PCA: split ``D`` into a low-rank part ``X`` and a sparse part ``E``.

``pcp_ialm`` solves principal component pursuit exactly (equality
constraint), ``spcp_bcd`` its quadratic-penalty relaxation for noisy data,
and ``godec`` the rank/cardinality-constrained least-squares problem.
"""

import math

import numpy as np

from .base import RpcaProblem, RpcaSolution, SolverConfig, SolverTrace
from .linalg import _svt, hard_threshold_entries, soft_threshold, truncate_rank

__all__ = ["default_lambda", "pcp_ialm", "spcp_bcd", "godec", "RPCA_SOLVERS", "solve_rpca"]

DEFAULT_CONFIG = SolverConfig()


def default_lambda(shape):
    """``1 / sqrt(max(m, n))``, the usual weight on ``||E||_1``."""
    return 1.0 / math.sqrt(max(shape))


def _check_problem(problem):
    if not isinstance(problem, RpcaProblem):
        raise TypeError(f"expected RpcaProblem, got {type(problem).__name__}")


def _lambda(config, shape):
    lam = default_lambda(shape) if config.lam is None else config.lam
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    return lam


def _start(D, config):
    # recorded starting estimate: rank-r SVD of D when the rank is known
    if config.rank is None:
        return np.zeros_like(D)
    if config.rank > min(D.shape):
        raise ValueError(f"rank {config.rank} exceeds min{D.shape}")
    return truncate_rank(D, config.rank)


def pcp_ialm(problem, config=DEFAULT_CONFIG, truth=None, callback=None):
    """Principal component pursuit by the inexact augmented Lagrangian method.

    Solves ``min ||X||_* + lam ||E||_1  s.t.  X + E = D`` from
    ``E = Y = 0``, one ``X`` sweep (SVT with threshold ``1/mu``) and one
    ``E`` sweep (soft threshold ``lam/mu``) per dual ascent step
    ``Y <- Y + mu (D - X - E)``.  ``lam`` defaults to ``1/sqrt(max(m, n))``;
    ``mu`` starts at ``1/sigma_1(D)`` and grows by ``config.mu_growth`` (up
    to ``config.mu_max``) whenever the residual fails to shrink by 0.9.
    Stops when ``||D - X - E||_F / ||D||_F < tol``.

    ``callback(iteration, state)`` sees ``X``, ``E``, ``Y``, ``Y_prev`` and
    the ``mu`` used for that dual step.
    """
    _check_problem(problem)
    D = problem.data
    lam = _lambda(config, D.shape)
    normD = np.linalg.norm(D)

    trace = SolverTrace(truth)
    X = _start(D, config)
    E = np.zeros_like(D)
    trace.record(0, np.linalg.svd(X, compute_uv=False).sum() + lam * np.abs(E).sum(), X)
    if normD == 0:
        trace.converged = True
        return RpcaSolution(np.zeros_like(D), np.zeros_like(D), trace)

    mu = 1.0 / np.linalg.norm(D, 2) if config.mu is None else config.mu
    Y = np.zeros_like(D)
    prev_res = np.inf
    for it in range(1, config.max_iters + 1):
        X, s = _svt(D - E + Y / mu, 1.0 / mu)
        E = soft_threshold(D - X + Y / mu, lam / mu)
        R = D - X - E
        Y_prev, Y = Y, Y + mu * R
        res = np.linalg.norm(R)
        trace.record(it, float(s.sum()) + lam * float(np.abs(E).sum()), X)
        if callback is not None:
            callback(it, {"X": X, "E": E, "Y": Y, "Y_prev": Y_prev, "mu": mu})
        if res / normD < config.tol:
            trace.converged = True
            break
        if res > 0.9 * prev_res:
            mu = min(mu * config.mu_growth, config.mu_max)
        prev_res = res
    return RpcaSolution(X, E, trace)


def default_spcp_mu(shape, sigma):
    """Fidelity weight for SPCP given the noise level (1 when unknown)."""
    if not sigma:
        return 1.0
    return 1.0 / (math.sqrt(2.0 * max(shape)) * sigma)


def _spcp_objective(s, E, R, lam, mu):
    return float(s.sum()) + lam * float(np.abs(E).sum()) + 0.5 * mu * float(np.vdot(R, R))


def spcp_bcd(problem, config=DEFAULT_CONFIG, truth=None):
    """Stable PCP by block coordinate descent.

    Minimises ``||X||_* + lam ||E||_1 + mu/2 ||X + E - D||_F^2`` by exact
    alternation ``X <- svt(D - E, 1/mu)``, ``E <- soft_threshold(D - X, lam/mu)``
    starting from ``E = 0``; the objective never increases.  ``mu`` defaults
    to ``1 / (sqrt(2 max(m, n)) sigma)`` when ``config.sigma`` is given, else 1.
    Stops when the relative change of ``(X, E)`` drops below ``tol``.
    """
    _check_problem(problem)
    D = problem.data
    lam = _lambda(config, D.shape)
    mu = default_spcp_mu(D.shape, config.sigma) if config.mu is None else config.mu

    trace = SolverTrace(truth)
    X = _start(D, config)
    E = np.zeros_like(D)
    R = X - D
    trace.record(0, _spcp_objective(np.linalg.svd(X, compute_uv=False), E, R, lam, mu), X)
    for it in range(1, config.max_iters + 1):
        X_new, s = _svt(D - E, 1.0 / mu)
        E_new = soft_threshold(D - X_new, lam / mu)
        num = math.hypot(np.linalg.norm(X_new - X), np.linalg.norm(E_new - E))
        den = max(1.0, math.hypot(np.linalg.norm(X), np.linalg.norm(E)))
        X, E = X_new, E_new
        trace.record(it, _spcp_objective(s, E, X + E - D, lam, mu), X)
        if num / den < config.tol:
            trace.converged = True
            break
    return RpcaSolution(X, E, trace)


def godec(problem, config=DEFAULT_CONFIG, truth=None):
    """GoDec: ``min ||D - X - E||_F^2  s.t. rank(X) <= r, ||E||_0 <= k``.

    Alternates the exact rank-r projection ``X <- truncate_rank(D - E, r)``
    and ``E <- hard_threshold_entries(D - X, k)`` from ``E = 0``.  Needs
    ``config.rank`` and ``config.cardinality``.  Stops when the objective
    changes by less than ``tol`` relative to its previous value, or falls
    below ``(tol ||D||_F)^2``.
    """
    _check_problem(problem)
    D = problem.data
    r, k = config.rank, config.cardinality
    if r is None or not 1 <= r <= min(D.shape):
        raise ValueError(f"godec needs 1 <= rank <= {min(D.shape)}, got {r}")
    if k is None or not 0 <= k <= D.size:
        raise ValueError(f"godec needs 0 <= cardinality <= {D.size}, got {k}")

    trace = SolverTrace(truth)
    X = truncate_rank(D, r)
    E = np.zeros_like(D)
    f = float(np.linalg.norm(D - X) ** 2)
    trace.record(0, f, X)
    floor = (config.tol * np.linalg.norm(D)) ** 2
    for it in range(1, config.max_iters + 1):
        X = truncate_rank(D - E, r)
        E = hard_threshold_entries(D - X, k)
        f_new = float(np.linalg.norm(D - X - E) ** 2)
        trace.record(it, f_new, X)
        done = f_new <= floor or abs(f - f_new) <= config.tol * f
        f = f_new
        if done:
            trace.converged = True
            break
    return RpcaSolution(X, E, trace)


RPCA_SOLVERS = {"pcp": pcp_ialm, "spcp": spcp_bcd, "godec": godec}


def solve_rpca(name, problem, config=DEFAULT_CONFIG, truth=None):
    try:
        solver = RPCA_SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown RPCA solver {name!r}; choose from {sorted(RPCA_SOLVERS)}")
    return solver(problem, config, truth)
