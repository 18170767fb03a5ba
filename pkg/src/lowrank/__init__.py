"""Low-rank matrix recovery: completion, robust PCA, probabilistic PCA.

Solvers operate on plain ``float64`` numpy arrays.  See :mod:`lowrank.bench`
for the synthetic comparison harness and :mod:`lowrank.images` for the
inpainting and background-subtraction recipes.
"""

from .base import FactorPair, McProblem, RpcaProblem, RpcaSolution, SolverConfig, SolverTrace
from .completion import (
    MC_SOLVERS,
    als_complete,
    apg_mcn,
    ialm_mc,
    mmmf_complete,
    soft_impute,
    solve_mc,
    svp_complete,
)
from .linalg import (
    ObservationMask,
    SvdFactors,
    hard_threshold_entries,
    nuclear_norm,
    numerical_rank,
    project_omega,
    project_omega_complement,
    relative_distance,
    soft_threshold,
    svd,
    svt,
    truncate_rank,
)
from .ppca import PpcaModel, ppca_fit, ppca_log_likelihood
from .rpca import RPCA_SOLVERS, godec, pcp_ialm, solve_rpca, spcp_bcd

__version__ = "0.1.0"
