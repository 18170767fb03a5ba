# The benchmark harness: a named preset, averaged error-versus-time curves, CSV and SVG.

import tempfile
from pathlib import Path

import numpy as np

from lowrank import bench

# fig2a at m=100 (rank scaled to 2), two repeats to keep it quick
spec = bench.preset_spec("fig2a", scale=100, seed=0, repeats=2)
solvers = bench.preset_solvers("fig2a", spec)
print(spec)
print("solvers:", list(solvers))

report = bench.run_benchmark(spec, solvers)
for name in report.solvers:
    print(f"{name:6s} final rel.dist {np.mean(report.final_distances(name)):.2e}"
          f"  mean time {np.mean(report.total_times(name)):.3f}s")

out = Path(tempfile.mkdtemp())
(out / "fig2a.csv").write_bytes(bench.emit_csv(report))
(out / "fig2a.svg").write_bytes(bench.emit_plot(report))
print("wrote", sorted(p.name for p in out.iterdir()), "to", out)

# the CSV parses back to exactly the recorded traces
rows = bench.read_csv((out / "fig2a.csv").read_bytes())
print(all(rows[k] == report.traces[k].records for k in report.traces))
