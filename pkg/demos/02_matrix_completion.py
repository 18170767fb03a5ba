# Matrix completion on a planted low-rank matrix: six solvers, one instance.

import time

import numpy as np

from lowrank import McProblem, SolverConfig, solve_mc
from lowrank.linalg import relative_distance
from lowrank.synth import SyntheticSpec, make_instance

# 200 x 200, rank 10, six times as many observations as degrees of freedom
spec = SyntheticSpec(m=200, r=10, os=6, seed=0)
inst = make_instance(spec)
mask = inst.problem.mask
print(f"observed {len(mask)} of {200 * 200} entries, OS = {mask.oversampling_ratio(spec.r):.3f}")

# zero filling is the trivial baseline
print("zero fill:", relative_distance(inst.problem.observed_values, inst.truth))

# factorization methods need the rank; mmmf also needs a (small) weight
configs = {
    "soft-impute": SolverConfig(),
    "apg": SolverConfig(),
    "ialm": SolverConfig(),
    "als": SolverConfig(rank=10),
    "mmmf": SolverConfig(rank=10, lam=1e-4),
    "svp": SolverConfig(rank=10),
}
for name, cfg in configs.items():
    t0 = time.perf_counter()
    X, trace = solve_mc(name, inst.problem, cfg, inst.truth)
    dt = time.perf_counter() - t0
    print(f"{name:12s} iters={len(trace) - 1:4d}  rel.dist={trace.final_relative_distance:.2e}  {dt:.2f}s")

# a hand-made problem: a rank-1 table with a few holes
table = np.outer([1.0, 2.0, 3.0, 4.0], [1.0, 0.5, 2.0])
seen = np.ones(table.shape, bool)
seen[0, 2] = seen[3, 0] = False
X, _ = solve_mc("als", McProblem(table, seen), SolverConfig(rank=1))
print(np.round(X, 4))
