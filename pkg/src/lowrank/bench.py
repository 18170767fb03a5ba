"""Synthetic benchmark: relative error against the planted matrix as a function of time.

A :class:`~lowrank.synth.SyntheticSpec` fixes the problem family and its
parameters; :func:`run_benchmark` generates ``spec.repeats`` instances,
runs every requested solver on each, and averages the
relative-distance-versus-time traces on a shared logarithmic time grid.
Reports serialise to CSV (:func:`emit_csv`, :func:`read_csv`) and to an SVG
line chart on log10/log10 axes (:func:`emit_plot`).
"""

import csv
import io
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .base import SolverConfig, TraceRecord
from .completion import MC_SOLVERS, solve_mc
from .rpca import RPCA_SOLVERS, solve_rpca
from .synth import SyntheticSpec, make_instance, sampling_probability

__all__ = [
    "PRESETS",
    "preset_spec",
    "preset_solvers",
    "BenchReport",
    "run_benchmark",
    "CSV_HEADER",
    "emit_csv",
    "read_csv",
    "emit_plot",
]

GRID_POINTS = 64
CSV_HEADER = ["solver", "instance", "iter", "elapsed_seconds", "objective", "relative_distance"]

_MC_NOISELESS = ("soft-impute", "apg", "ialm", "als", "svp")
_MC_NOISY = ("soft-impute", "apg", "als", "svp")

# settings of the 1000 x 1000 comparison; r is rescaled with m (see preset_spec)
PRESETS = {
    "fig1a": dict(os=6, r=20, sigma=0.0, solvers=_MC_NOISELESS),
    "fig1b": dict(os=6, r=50, sigma=0.0, solvers=_MC_NOISELESS),
    "fig1c": dict(os=6, r=50, sigma=0.1, solvers=_MC_NOISY),
    "fig1d": dict(os=3, r=50, sigma=0.0, solvers=_MC_NOISELESS),
    "fig2a": dict(rho=0.1, r=20, sigma=0.0, solvers=("pcp", "godec")),
    "fig2b": dict(rho=0.1, r=50, sigma=0.0, solvers=("pcp", "godec")),
    "fig2c": dict(rho=0.1, r=50, sigma=0.1, solvers=("spcp", "godec")),
    "fig2d": dict(rho=0.3, r=50, sigma=0.0, solvers=("pcp", "godec")),
}
FULL_SIZE = 1000


def preset_spec(name, scale=200, seed=0, repeats=5):
    """SyntheticSpec for a named preset at matrix size `scale`.

    The rank is scaled by ``scale / 1000`` (rounded, at least 1).  This keeps
    the sampling probability implied by the over-sampling ratio equal to the
    one at full size.
    """
    try:
        p = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    r = max(1, round(p["r"] * scale / FULL_SIZE))
    return SyntheticSpec(
        m=scale, r=r, os=p.get("os"), rho=p.get("rho"), sigma=p["sigma"], seed=seed, repeats=repeats
    )


def noisy_completion_lambda(spec):
    """Regularisation for noisy completion, roughly the spectral norm of the observed noise."""
    p = sampling_probability(spec.m, spec.os, spec.r)
    return spec.sigma * 2.0 * math.sqrt(p * spec.m)


def preset_solvers(name, spec=None):
    """Solver label -> SolverConfig for a preset (instance-specific fields left unset)."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    labels = PRESETS[name]["solvers"]
    spec = spec or preset_spec(name)
    configs = {}
    for label in labels:
        cfg = SolverConfig()
        if spec.family == "mc" and spec.sigma > 0 and label in ("soft-impute", "apg"):
            cfg = cfg.with_(lam=noisy_completion_lambda(spec))
        configs[label] = cfg
    return configs


@dataclass
class BenchReport:
    """Traces per ``(solver, instance)`` cell plus averaged curves.

    ``curves[solver]`` holds the mean relative distance on ``grid`` (seconds).
    Failed cells are listed in ``failures`` with the error message.  For
    completion specs ``realized_os[instance]`` is the over-sampling ratio of
    the generated mask (the requested one holds only in expectation).
    """

    spec: SyntheticSpec
    traces: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    grid: np.ndarray = field(default_factory=lambda: np.empty(0))
    curves: dict = field(default_factory=dict)
    realized_os: dict = field(default_factory=dict)

    @property
    def solvers(self):
        names = {s for s, _ in self.traces} | {s for s, _ in self.failures}
        return sorted(names)

    def final_distances(self, solver):
        return [
            self.traces[(s, i)].final_relative_distance
            for (s, i) in sorted(self.traces)
            if s == solver
        ]

    def total_times(self, solver):
        return [self.traces[(s, i)].elapsed[-1] for (s, i) in sorted(self.traces) if s == solver]


def _instance_config(label, cfg, inst):
    spec = inst.spec
    changes = {}
    if cfg.rank is None:
        changes["rank"] = spec.r
    if label == "godec" and cfg.cardinality is None:
        changes["cardinality"] = int(np.count_nonzero(inst.outliers))
    if label == "spcp" and cfg.sigma is None and spec.sigma > 0:
        changes["sigma"] = spec.sigma
    return cfg.with_(**changes) if changes else cfg


def _step_values(times, values, grid):
    # last value carried forward; before the first record, the first value
    idx = np.searchsorted(times, grid, side="right") - 1
    return values[np.maximum(idx, 0)]


def _average_curves(report, points=GRID_POINTS):
    positive = [t for tr in report.traces.values() for t in tr.elapsed if t > 0]
    if not positive:
        return
    t_lo, t_hi = min(positive), max(positive)
    if t_hi <= t_lo:
        t_hi = t_lo * 10
    report.grid = np.logspace(math.log10(t_lo), math.log10(t_hi), points)
    by_solver = {}
    for (solver, _), tr in sorted(report.traces.items()):
        vals = tr.relative_distances
        by_solver.setdefault(solver, []).append(_step_values(tr.elapsed, vals, report.grid))
    report.curves = {s: np.mean(v, axis=0) for s, v in by_solver.items()}


def run_benchmark(spec, solvers, grid_points=GRID_POINTS):
    """Run every solver on every instance of `spec` and average the traces.

    Parameters
    ----------
    spec : SyntheticSpec
    solvers : mapping of str to SolverConfig
        Keys are registered solver names (completion solvers for ``os``
        specs, RPCA solvers for ``rho`` specs).  Unset ``rank`` is filled with
        the true rank, GoDec's ``cardinality`` with the true outlier count and
        SPCP's ``sigma`` with the true noise level.
    grid_points : int
        Size of the logarithmic time grid used for averaging.

    Returns
    -------
    BenchReport
        A solver that raises on an instance is recorded in
        ``report.failures`` and the remaining cells still run.
    """
    registry = MC_SOLVERS if spec.family == "mc" else RPCA_SOLVERS
    for label in solvers:
        if label not in registry:
            raise ValueError(f"solver {label!r} does not apply to {spec.family} problems")
    report = BenchReport(spec)
    for index in range(spec.repeats):
        inst = make_instance(spec, index)
        if spec.family == "mc":
            report.realized_os[index] = inst.problem.mask.oversampling_ratio(spec.r)
        for label, cfg in solvers.items():
            cfg = _instance_config(label, cfg, inst)
            try:
                if spec.family == "mc":
                    _, trace = solve_mc(label, inst.problem, cfg, inst.truth)
                else:
                    trace = solve_rpca(label, inst.problem, cfg, inst.truth).trace
            except (ValueError, ArithmeticError, np.linalg.LinAlgError) as err:
                report.failures[(label, index)] = f"{type(err).__name__}: {err}"
                continue
            report.traces[(label, index)] = trace
    _average_curves(report, grid_points)
    return report


def _fmt(x):
    return "" if x is None else format(float(x), ".17g")


def emit_csv(report):
    """UTF-8 CSV bytes, one row per trace record, sorted by (solver, instance, iter)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for (solver, inst) in sorted(report.traces):
        for rec in report.traces[(solver, inst)].records:
            w.writerow(
                [solver, inst, rec.iteration, _fmt(rec.elapsed_seconds), _fmt(rec.objective),
                 _fmt(rec.relative_distance)]
            )
    return buf.getvalue().encode("utf-8")


def read_csv(data):
    """Parse :func:`emit_csv` output into ``{(solver, instance): [TraceRecord, ...]}``."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    out = {}
    for row in rows:
        solver, inst, it, el, obj, rd = row
        out.setdefault((solver, int(inst)), []).append(
            TraceRecord(int(it), float(el), float(obj), float(rd) if rd else None)
        )
    return out


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]
_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 150, 20, 50
_FLOOR = 1e-16


def _decade_ticks(lo, hi):
    a, b = math.floor(lo), math.ceil(hi)
    if b <= a:
        b = a + 1
    return list(range(a, b + 1))


def emit_plot(report):
    """SVG line chart: log10 time (s) on x, log10 relative distance on y, one polyline per solver."""
    if not report.curves or report.grid.size == 0:
        raise ValueError("report has no successful traces to plot")
    lx = np.log10(report.grid)
    series = {s: np.log10(np.maximum(c, _FLOOR)) for s, c in sorted(report.curves.items())}
    xt = _decade_ticks(lx.min(), lx.max())
    ys = np.concatenate(list(series.values()))
    yt = _decade_ticks(ys.min(), ys.max())
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def px(x):
        return _LEFT + (x - xt[0]) / (xt[-1] - xt[0]) * pw

    def py(y):
        return _TOP + (yt[-1] - y) / (yt[-1] - yt[0]) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xt:
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{_TOP + ph}" x2="{x:.2f}" y2="{_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text class="xtick" x="{x:.2f}" y="{_TOP + ph + 18}" text-anchor="middle">{t}</text>')
    for t in yt:
        y = py(t)
        out.append(f'<line x1="{_LEFT - 5}" y1="{y:.2f}" x2="{_LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text class="ytick" x="{_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">{t}</text>')
    out.append(
        f'<text x="{_LEFT + pw / 2:.2f}" y="{_H - 10}" text-anchor="middle">log10 time (s)</text>'
    )
    out.append(
        f'<text x="15" y="{_TOP + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {_TOP + ph / 2:.2f})">log10 relative distance</text>'
    )
    for k, (name, ly) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(lx, ly))
        out.append(
            f'<polyline data-series="{escape(name)}" fill="none" stroke="{color}" '
            f'stroke-width="1.5" points="{pts}"/>'
        )
        ly_text = _TOP + 15 + 18 * k
        out.append(
            f'<line x1="{_W - _RIGHT + 10}" y1="{ly_text - 4}" x2="{_W - _RIGHT + 30}" '
            f'y2="{ly_text - 4}" stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(f'<text x="{_W - _RIGHT + 35}" y="{ly_text}">{escape(name)}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
