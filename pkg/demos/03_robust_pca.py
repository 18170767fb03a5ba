# Robust PCA: separate a low-rank matrix from sparse gross errors.

import numpy as np

from lowrank import SolverConfig, godec, pcp_ialm, spcp_bcd
from lowrank.synth import SyntheticSpec, make_instance

spec = SyntheticSpec(m=200, r=10, rho=0.1, seed=0)
inst = make_instance(spec)
planted = inst.outliers != 0
print(f"{planted.mean():.3f} of the entries are corrupted, values in (-10, 10)")

# PCP needs no rank; lam defaults to 1/sqrt(200)
sol = pcp_ialm(inst.problem, SolverConfig(), inst.truth)
found = np.abs(sol.sparse) > 1e-6
print(f"pcp   rel.dist={sol.trace.final_relative_distance:.2e}  iters={len(sol.trace) - 1}")
print(f"      support precision={np.mean(planted[found]):.4f} recall={np.mean(found[planted]):.4f}")

# GoDec is told the rank and the number of outliers
k = int(planted.sum())
sol = godec(inst.problem, SolverConfig(rank=10, cardinality=k), inst.truth)
print(f"godec rel.dist={sol.trace.final_relative_distance:.2e}  iters={len(sol.trace) - 1}")

# with dense noise on top, the exact-fit PCP model no longer holds; SPCP trades fit for shrinkage
noisy = make_instance(SyntheticSpec(m=200, r=10, rho=0.1, sigma=0.1, seed=0))
for name, run in (("pcp", pcp_ialm), ("spcp", spcp_bcd)):
    sol = run(noisy.problem, SolverConfig(sigma=0.1), noisy.truth)
    print(f"noisy {name:5s} rel.dist={sol.trace.final_relative_distance:.2e}")
