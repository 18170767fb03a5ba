"""Matrix completion solvers.

Nuclear-norm methods (``soft_impute``, ``apg_mcn``, ``ialm_mc``) and
factorization methods (``als_complete``, ``mmmf_complete``, ``svp_complete``).
All of them take an :class:`~lowrank.base.McProblem` and a
:class:`~lowrank.base.SolverConfig`, optionally the ground truth (used only
to fill the ``relative_distance`` column of the trace), and stop when the
relative change of the iterate drops below ``config.tol``.
"""

import math

import numpy as np
import scipy.linalg

from .base import FactorPair, McProblem, SolverConfig, SolverTrace
from .linalg import _svt, nuclear_norm, svd, truncate_rank

__all__ = [
    "soft_impute",
    "apg_mcn",
    "ialm_mc",
    "als_complete",
    "mmmf_complete",
    "svp_complete",
    "lambda_ladder",
    "MC_SOLVERS",
    "solve_mc",
]

DEFAULT_CONFIG = SolverConfig()

# default target lambda for the nuclear-norm solvers, relative to sigma_1(P_Omega(D))
DEFAULT_LAM_RATIO = 3e-5
# continuation: starting point, ratio between rungs, and stopping tol on intermediate rungs
LADDER_START = 0.5
LADDER_RATIO = 0.25
LADDER_TOL = 1e-6

ALS_RIDGE = 1e-10


def _check_problem(problem):
    if not isinstance(problem, McProblem):
        raise TypeError(f"expected McProblem, got {type(problem).__name__}")
    if len(problem.mask) == 0:
        raise ValueError("observation mask is empty; nothing to complete")


def _check_rank(config, shape, required=True):
    r = config.rank
    if r is None:
        if required:
            raise ValueError("this solver needs config.rank")
        return None
    if r > min(shape):
        raise ValueError(f"rank {r} exceeds min{shape}")
    return r


def _rel_change(new, old):
    return np.linalg.norm(new - old) / max(1.0, np.linalg.norm(old))


def _spectral_norm(M):
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def _initial_guess(D, rank):
    if rank is None:
        return np.zeros_like(D)
    return truncate_rank(D, rank)


def _misfit(X, D, obs):
    R = np.where(obs, X - D, 0.0)
    return 0.5 * float(np.vdot(R, R))


def lambda_ladder(start, target, ratio=None):
    """Geometric sequence from `start` down to `target` (inclusive).

    A zero target is reached through a last rung at ``DEFAULT_LAM_RATIO * start``.
    """
    ratio = LADDER_RATIO if ratio is None else ratio
    floor = target if target > 0 else DEFAULT_LAM_RATIO * start
    rungs = []
    lam = start
    while lam > floor:
        rungs.append(lam)
        lam *= ratio
    rungs.append(floor)
    if target == 0:
        rungs.append(0.0)
    return rungs


def soft_impute(problem, config=DEFAULT_CONFIG, truth=None):
    """SOFT-IMPUTE: ``X <- svt(P_Omega(D) + P_Omega_perp(X), lam)``.

    Proximal gradient with unit step on
    ``0.5 * ||P_Omega(X - D)||_F^2 + lam * ||X||_*``.  With
    ``config.continuation`` (the default) the threshold walks down a
    geometric ladder from ``0.5 * sigma_1(P_Omega(D))`` to the target,
    warm-starting each rung from the previous one.  The target ``lam``
    defaults to ``DEFAULT_LAM_RATIO * sigma_1(P_Omega(D))``.  The recorded
    objective uses the threshold of the current rung.

    Returns the estimate and its trace; ``config.max_iters`` caps the total
    iteration count over all rungs.
    """
    _check_problem(problem)
    D = problem.observed_values
    obs = problem.mask.observed
    rank = _check_rank(config, D.shape, required=False)
    sigma1 = _spectral_norm(D)
    lam = DEFAULT_LAM_RATIO * sigma1 if config.lam is None else config.lam

    trace = SolverTrace(truth)
    X = _initial_guess(D, rank)
    if config.continuation and LADDER_START * sigma1 > lam:
        ladder = lambda_ladder(LADDER_START * sigma1, lam)
    else:
        ladder = [lam]
    trace.record(0, _misfit(X, D, obs) + ladder[0] * nuclear_norm(X), X)

    it = 0
    for stage, lam_k in enumerate(ladder):
        last = stage == len(ladder) - 1
        stage_tol = config.tol if last else max(config.tol, LADDER_TOL)
        while it < config.max_iters:
            it += 1
            X_new, s = _svt(np.where(obs, D, X), lam_k)
            change = _rel_change(X_new, X)
            X = X_new
            trace.record(it, _misfit(X, D, obs) + lam_k * float(s.sum()), X)
            if change < stage_tol:
                trace.converged = last
                break
        if it >= config.max_iters:
            break
    return X, trace


def apg_mcn(problem, config=DEFAULT_CONFIG, truth=None, callback=None):
    """Accelerated proximal gradient for ``0.5||P_Omega(X - D)||^2 + lam||X||_*``.

    The smooth part has a 1-Lipschitz gradient, so the step is fixed at 1.
    Momentum follows the Nesterov ``t`` sequence and is restarted whenever a
    step would increase the objective: the step is then redone as a plain
    proximal-gradient step from the current iterate with ``t`` reset to 1.
    ``lam`` defaults to ``DEFAULT_LAM_RATIO * sigma_1(P_Omega(D))`` and, with
    ``config.continuation``, is approached through the same warm-started
    ladder as :func:`soft_impute` (momentum restarts on every rung).

    The recorded objective uses the threshold in force at that iteration and
    never increases.  ``callback(iteration, state)`` receives a dict with
    keys ``X``, ``t``, ``t_prev``, ``beta`` (momentum used), ``lam`` and
    ``restarted``.
    """
    _check_problem(problem)
    D = problem.observed_values
    obs = problem.mask.observed
    sigma1 = _spectral_norm(D)
    lam = DEFAULT_LAM_RATIO * sigma1 if config.lam is None else config.lam
    if not lam > 0:
        raise ValueError(f"apg_mcn needs lam > 0, got {lam}")
    rank = _check_rank(config, D.shape, required=False)

    if config.continuation and LADDER_START * sigma1 > lam:
        ladder = lambda_ladder(LADDER_START * sigma1, lam)
    else:
        ladder = [lam]

    def objective(X, s, lam_k):
        return _misfit(X, D, obs) + lam_k * float(s.sum())

    trace = SolverTrace(truth)
    X = _initial_guess(D, rank)
    trace.record(0, _misfit(X, D, obs) + ladder[0] * nuclear_norm(X), X)

    it = 0
    for stage, lam_k in enumerate(ladder):
        last = stage == len(ladder) - 1
        stage_tol = config.tol if last else max(config.tol, LADDER_TOL)
        X_prev = X
        t = t_prev = 1.0
        F = np.inf
        while it < config.max_iters:
            it += 1
            beta = (t_prev - 1.0) / t
            Y = X + beta * (X - X_prev) if beta else X
            X_new, s = _svt(Y - np.where(obs, Y - D, 0.0), lam_k)
            F_new = objective(X_new, s, lam_k)
            restarted = False
            if F_new > F and beta:
                restarted = True
                X_prev = X
                t = t_prev = 1.0
                X_new, s = _svt(X - np.where(obs, X - D, 0.0), lam_k)
                F_new = objective(X_new, s, lam_k)
            t_prev, t = t, (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
            change = _rel_change(X_new, X)
            X_prev, X, F = X, X_new, F_new
            trace.record(it, F, X)
            if callback is not None:
                callback(it, {"X": X, "t": t, "t_prev": t_prev, "beta": beta,
                              "lam": lam_k, "restarted": restarted})
            if change < stage_tol:
                trace.converged = last
                break
        if it >= config.max_iters:
            break
    return X, trace


def ialm_mc(problem, config=DEFAULT_CONFIG, truth=None):
    """Inexact ALM for ``min ||X||_* s.t. P_Omega(X) = P_Omega(D)``.

    The constraint is rewritten as ``X = D + E`` with ``E`` supported off
    the mask, and the augmented Lagrangian
    ``||X||_* + <Y, D + E - X> + mu/2 ||D + E - X||_F^2`` is minimised by one
    sweep over ``X`` (SVT) and ``E`` (projection) per dual step.  ``mu``
    starts at ``1 / sigma_1(P_Omega(D))`` and is multiplied by
    ``config.mu_growth`` (capped at ``config.mu_max``) whenever the primal
    residual fails to shrink by a factor 0.9.  Stops when
    ``||D + E - X||_F / ||P_Omega(D)||_F < tol``.
    """
    _check_problem(problem)
    D = problem.observed_values
    obs = problem.mask.observed
    rank = _check_rank(config, D.shape, required=False)
    normD = np.linalg.norm(D)

    trace = SolverTrace(truth)
    X = _initial_guess(D, rank)
    trace.record(0, np.sum(svd(X).s), X)
    if normD == 0:
        trace.converged = True
        return np.zeros_like(D), trace

    mu = 1.0 / _spectral_norm(D) if config.mu is None else config.mu
    E = np.where(obs, 0.0, X)
    Y = np.zeros_like(D)
    prev_res = np.inf
    for it in range(1, config.max_iters + 1):
        X, s = _svt(D + E + Y / mu, 1.0 / mu)
        E = np.where(obs, 0.0, X - Y / mu)
        R = D + E - X
        res = np.linalg.norm(R)
        Y = Y + mu * R
        trace.record(it, float(s.sum()), X)
        if res / normD < config.tol:
            trace.converged = True
            break
        if res > 0.9 * prev_res:
            mu = min(mu * config.mu_growth, config.mu_max)
        prev_res = res
    return X, trace


def _balanced_factors(D, r):
    F = svd(D)
    root = np.sqrt(F.s[:r])
    return F.U[:, :r] * root, F.V[:, :r] * root


def _ls_factor(Z, B, ridge):
    # argmin_A ||Z - A B^T||_F^2 + ridge ||A||_F^2, via the r x r normal equations
    G = B.T @ B
    G[np.diag_indices_from(G)] += ridge
    return scipy.linalg.solve(G, (Z @ B).T, assume_a="pos").T


def als_complete(problem, config=DEFAULT_CONFIG, truth=None):
    """Alternating least squares on the auxiliary-variable split.

    Minimises ``0.5 ||Z - A B^T||_F^2`` subject to
    ``P_Omega(Z) = P_Omega(D)`` by cycling through
    ``A <- argmin``, ``B <- argmin``, ``Z <- A B^T + P_Omega(D - A B^T)``,
    starting from the balanced rank-r SVD of ``P_Omega(D)``.  The recorded
    objective is ``0.5 ||P_Omega(D - A B^T)||_F^2`` and never increases.
    """
    _check_problem(problem)
    D = problem.observed_values
    obs = problem.mask.observed
    r = _check_rank(config, D.shape)

    trace = SolverTrace(truth)
    A, B = _balanced_factors(D, r)
    X = A @ B.T
    trace.record(0, _misfit(X, D, obs), X)
    Z = np.where(obs, D, X)
    for it in range(1, config.max_iters + 1):
        A = _ls_factor(Z, B, ALS_RIDGE)
        B = _ls_factor(Z.T, A, ALS_RIDGE)
        X_new = A @ B.T
        change = _rel_change(X_new, X)
        X = X_new
        Z = np.where(obs, D, X)
        trace.record(it, _misfit(X, D, obs), X)
        if change < config.tol:
            trace.converged = True
            break
    return FactorPair(A, B), trace


def _ridge_rows(D, W, B, lam):
    # row i: argmin_a sum_{j in Omega_i} (D_ij - a.b_j)^2 + lam ||a||^2
    r = B.shape[1]
    G = np.matmul((W[:, :, None] * B[None, :, :]).transpose(0, 2, 1), B)
    G += lam * np.eye(r)
    return np.linalg.solve(G, (D @ B)[:, :, None])[:, :, 0]


def _mmmf_objective(A, B, D, obs, lam):
    return _misfit(A @ B.T, D, obs) + 0.5 * lam * (np.vdot(A, A) + np.vdot(B, B))


def mmmf_complete(problem, config=DEFAULT_CONFIG, truth=None):
    """Maximum margin matrix factorization by alternating ridge regression.

    Minimises ``0.5 ||P_Omega(D - A B^T)||_F^2 + lam/2 (||A||_F^2 + ||B||_F^2)``.
    Each row of ``A`` (then of ``B``) is an independent ridge regression over
    its observed entries, solved exactly, so the objective never increases.
    """
    _check_problem(problem)
    lam = config.lam
    if lam is None or not lam > 0:
        raise ValueError(f"mmmf_complete needs lam > 0, got {lam}")
    D = problem.observed_values
    obs = problem.mask.observed
    W = obs.astype(float)
    r = _check_rank(config, D.shape)

    trace = SolverTrace(truth)
    A, B = _balanced_factors(D, r)
    X = A @ B.T
    trace.record(0, _mmmf_objective(A, B, D, obs, lam), X)
    for it in range(1, config.max_iters + 1):
        A = _ridge_rows(D, W, B, lam)
        B = _ridge_rows(D.T, W.T, A, lam)
        X_new = A @ B.T
        change = _rel_change(X_new, X)
        X = X_new
        trace.record(it, _mmmf_objective(A, B, D, obs, lam), X)
        if change < config.tol:
            trace.converged = True
            break
    return FactorPair(A, B), trace


def svp_complete(problem, config=DEFAULT_CONFIG, truth=None):
    """Singular value projection: ``X <- truncate_rank(X - eta P_Omega(X - D), r)``.

    Projected gradient on ``0.5 ||P_Omega(X - D)||_F^2`` over rank-r
    matrices; the step ``eta`` is ``config.mu`` (default 1).
    """
    _check_problem(problem)
    D = problem.observed_values
    obs = problem.mask.observed
    r = _check_rank(config, D.shape)
    eta = 1.0 if config.mu is None else config.mu

    trace = SolverTrace(truth)
    X = truncate_rank(D, r)
    trace.record(0, _misfit(X, D, obs), X)
    for it in range(1, config.max_iters + 1):
        X_new = truncate_rank(X - eta * np.where(obs, X - D, 0.0), r)
        change = _rel_change(X_new, X)
        X = X_new
        trace.record(it, _misfit(X, D, obs), X)
        if change < config.tol:
            trace.converged = True
            break
    return X, trace


MC_SOLVERS = {
    "soft-impute": soft_impute,
    "apg": apg_mcn,
    "ialm": ialm_mc,
    "als": als_complete,
    "mmmf": mmmf_complete,
    "svp": svp_complete,
}


def solve_mc(name, problem, config=DEFAULT_CONFIG, truth=None):
    """Run the completion solver registered as `name`; always returns ``(X, trace)``."""
    try:
        solver = MC_SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown completion solver {name!r}; choose from {sorted(MC_SOLVERS)}")
    out, trace = solver(problem, config, truth)
    if isinstance(out, FactorPair):
        out = out.product()
    return out, trace
