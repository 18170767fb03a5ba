"""Problem, configuration and trace containers shared by the solvers."""

import time
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple, Optional

import numpy as np

from .linalg import ObservationMask, as_matrix, project_omega, relative_distance

__all__ = [
    "SolverConfig",
    "TraceRecord",
    "SolverTrace",
    "FactorPair",
    "McProblem",
    "RpcaProblem",
    "RpcaSolution",
]


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs for every solver.

    Fields left as ``None`` take a solver-specific default documented on each
    solver.  ``mu`` is the penalty for augmented-Lagrangian solvers, the
    fidelity weight for SPCP and the step size for SVP.
    """

    lam: Optional[float] = None
    rank: Optional[int] = None
    mu: Optional[float] = None
    mu_growth: float = 1.5
    mu_max: float = 1e7
    max_iters: int = 500
    tol: float = 1e-7
    seed: int = 0
    cardinality: Optional[int] = None
    sigma: Optional[float] = None
    continuation: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if not self.mu_growth >= 1:
            raise ValueError(f"mu_growth must be >= 1, got {self.mu_growth}")
        if not self.mu_max > 0:
            raise ValueError(f"mu_max must be positive, got {self.mu_max}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.lam is not None and self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.rank is not None and self.rank < 1:
            raise ValueError(f"rank must be a positive integer, got {self.rank}")
        if self.mu is not None and not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.cardinality is not None and self.cardinality < 0:
            raise ValueError(f"cardinality must be nonnegative, got {self.cardinality}")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")

    def with_(self, **changes):
        return replace(self, **changes)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


class TraceRecord(NamedTuple):
    iteration: int
    elapsed_seconds: float
    objective: float
    relative_distance: Optional[float] = None


class SolverTrace:
    """Per-iteration record of a solver run.

    The clock starts when the trace is created, so elapsed times include the
    solver's setup (initial SVD and so on).
    """

    def __init__(self, truth=None, records=None):
        self.truth = None if truth is None else as_matrix(truth, "truth")
        self.records = list(records) if records is not None else []
        self.converged = False
        self._t0 = time.perf_counter()

    def record(self, iteration, objective, estimate=None):
        elapsed = time.perf_counter() - self._t0
        if self.records:
            last = self.records[-1]
            if iteration <= last.iteration:
                raise ValueError("trace iterations must strictly increase")
            elapsed = max(elapsed, last.elapsed_seconds)
        rd = None
        if self.truth is not None and estimate is not None:
            rd = relative_distance(estimate, self.truth)
        self.records.append(TraceRecord(int(iteration), elapsed, float(objective), rd))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def iterations(self):
        return np.array([r.iteration for r in self.records], dtype=int)

    @property
    def elapsed(self):
        return np.array([r.elapsed_seconds for r in self.records])

    @property
    def objectives(self):
        return np.array([r.objective for r in self.records])

    @property
    def relative_distances(self):
        return np.array(
            [np.nan if r.relative_distance is None else r.relative_distance for r in self.records]
        )

    @property
    def final_relative_distance(self):
        return self.records[-1].relative_distance if self.records else None

    def __repr__(self):
        return f"SolverTrace(n_records={len(self.records)}, converged={self.converged})"


@dataclass
class FactorPair:
    """Factors ``A`` (m x r) and ``B`` (n x r) of ``X = A @ B.T``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = as_matrix(self.A, "A")
        self.B = as_matrix(self.B, "B")
        if self.A.shape[1] != self.B.shape[1] or self.A.shape[1] < 1:
            raise ValueError(f"incompatible factor shapes {self.A.shape}, {self.B.shape}")

    @property
    def rank(self):
        return self.A.shape[1]

    def product(self):
        return self.A @ self.B.T


@dataclass(frozen=True)
class McProblem:
    """Matrix completion data: observed values (zero off the mask) and the mask."""

    observed_values: np.ndarray
    mask: ObservationMask

    def __post_init__(self):
        D = as_matrix(self.observed_values, "observed_values")
        if not isinstance(self.mask, ObservationMask):
            object.__setattr__(self, "mask", ObservationMask(self.mask))
        # entries outside the mask carry no information; store them as zeros
        object.__setattr__(self, "observed_values", project_omega(D, self.mask))

    @classmethod
    def from_full(cls, D, mask=None):
        """Wrap a full matrix; with no mask every entry counts as observed."""
        D = np.asarray(D, dtype=float)
        if mask is None:
            mask = ObservationMask.full(*D.shape)
        return cls(D, mask)

    @property
    def shape(self):
        return self.observed_values.shape


@dataclass(frozen=True)
class RpcaProblem:
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", as_matrix(self.data, "data"))

    @property
    def shape(self):
        return self.data.shape


@dataclass
class RpcaSolution:
    low_rank: np.ndarray
    sparse: np.ndarray
    trace: SolverTrace = field(repr=False)
