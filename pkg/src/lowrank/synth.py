"""Seeded generators for synthetic low-rank recovery instances.

Randomness comes from numpy's PCG64 bit generator.  Gaussian draws use
numpy's ziggurat sampler (``Generator.standard_normal``).  Each
``(seed, instance, purpose)`` triple maps to its own stream through
``numpy.random.SeedSequence``, so drawing one component never shifts
another.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base import McProblem, RpcaProblem
from .linalg import ObservationMask

__all__ = [
    "SyntheticSpec",
    "BenchInstance",
    "substream_seed",
    "gen_lowrank",
    "gen_mask",
    "sampling_probability",
    "gen_outliers",
    "add_noise",
    "make_instance",
]

# stable purpose codes for substream derivation; never renumber
PURPOSES = {"lowrank": 0, "mask": 1, "outliers": 2, "noise": 3}


def substream_seed(seed, instance, purpose):
    """64-bit seed for the stream owned by ``(seed, instance, purpose)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(instance), PURPOSES[purpose]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def gen_lowrank(m, r, seed):
    """``X* = A B^T`` with standard normal ``m x r`` factors, scaled so ``||X*||_F^2 = m^2``."""
    if not 1 <= r <= m:
        raise ValueError(f"need 1 <= r <= m, got r={r}, m={m}")
    rng = _rng(seed)
    A = rng.standard_normal((m, r))
    B = rng.standard_normal((m, r))
    X = A @ B.T
    return X * (m / np.linalg.norm(X))


def sampling_probability(m, rate, r, mode="oversampling"):
    """Per-entry observation probability for an ``m x m`` mask.

    ``oversampling`` mode turns an over-sampling ratio into
    ``OS * (2m - r) * r / m^2``; ``density`` mode uses `rate` directly.
    """
    if mode == "oversampling":
        if rate < 1:
            raise ValueError(f"over-sampling ratio must be >= 1, got {rate}")
        p = rate * (2 * m - r) * r / (m * m)
    elif mode == "density":
        p = rate
    else:
        raise ValueError(f"unknown mask mode {mode!r}")
    if not 0 <= p <= 1:
        raise ValueError(
            f"implied sampling probability {p:.4g} is outside [0, 1] (m={m}, r={r}, rate={rate})"
        )
    return p


def gen_mask(m, rate, r, seed, mode="oversampling"):
    """Bernoulli observation mask; entry ``(i, j)`` is observed with the implied probability."""
    p = sampling_probability(m, rate, r, mode)
    return ObservationMask(_rng(seed).random((m, m)) < p)


def gen_outliers(m, rho, seed):
    """Sparse gross errors: Bernoulli(rho) support, values uniform on (-10, 10)."""
    if not 0 <= rho <= 1:
        raise ValueError(f"outlier fraction must be in [0, 1], got {rho}")
    rng = _rng(seed)
    support = rng.random((m, m)) < rho
    values = rng.uniform(-10.0, 10.0, size=(m, m))
    return np.where(support, values, 0.0)


def add_noise(M, sigma, seed):
    if sigma < 0:
        raise ValueError(f"noise level must be nonnegative, got {sigma}")
    M = np.asarray(M, dtype=float)
    if sigma == 0:
        return M.copy()
    return M + sigma * _rng(seed).standard_normal(M.shape)


@dataclass(frozen=True)
class SyntheticSpec:
    """One synthetic problem setting.

    Exactly one of ``os`` (matrix completion) or ``rho`` (robust PCA) is set.
    """

    m: int
    r: int
    os: Optional[float] = None
    rho: Optional[float] = None
    sigma: float = 0.0
    seed: int = 0
    repeats: int = 5

    def __post_init__(self):
        if (self.os is None) == (self.rho is None):
            raise ValueError("set exactly one of os (completion) or rho (robust PCA)")
        if not 1 <= self.r <= self.m / 4:
            raise ValueError(f"need 1 <= r <= m/4, got r={self.r}, m={self.m}")
        if self.os is not None:
            sampling_probability(self.m, self.os, self.r)
        if self.rho is not None and not 0 <= self.rho <= 1:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")

    @property
    def family(self):
        return "mc" if self.os is not None else "rpca"


@dataclass(frozen=True)
class BenchInstance:
    truth: np.ndarray
    problem: object
    spec: SyntheticSpec
    instance_index: int
    outliers: Optional[np.ndarray] = None


def make_instance(spec, index=0):
    """Build instance `index` of `spec`; a pure function of ``(spec, index)``."""
    X = gen_lowrank(spec.m, spec.r, substream_seed(spec.seed, index, "lowrank"))
    noisy = add_noise(X, spec.sigma, substream_seed(spec.seed, index, "noise"))
    if spec.family == "mc":
        mask = gen_mask(spec.m, spec.os, spec.r, substream_seed(spec.seed, index, "mask"))
        return BenchInstance(X, McProblem(noisy, mask), spec, index)
    E = gen_outliers(spec.m, spec.rho, substream_seed(spec.seed, index, "outliers"))
    return BenchInstance(X, RpcaProblem(noisy + E), spec, index, outliers=E)
