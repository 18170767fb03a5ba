"""Command-line entry point: ``lowrank <subcommand> ...``.

Exit status is 0 on success, 1 when a solver or an input file fails and 2 on
usage errors.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, images
from .base import McProblem, RpcaProblem, SolverConfig
from .completion import MC_SOLVERS, solve_mc
from .ppca import ppca_fit, ppca_log_likelihood
from .rpca import RPCA_SOLVERS, solve_rpca

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _add_solver_flags(p):
    g = p.add_argument_group("solver parameters")
    g.add_argument("--lam", type=float, help="regularisation weight")
    g.add_argument("--rank", type=int, help="target rank (factorization solvers, initial guess)")
    g.add_argument("--mu", type=float, help="penalty / fidelity weight / step size")
    g.add_argument("--mu-growth", type=float, default=1.5)
    g.add_argument("--mu-max", type=float, default=1e7)
    g.add_argument("--max-iters", type=int, default=500)
    g.add_argument("--tol", type=float, default=1e-7)
    g.add_argument("--cardinality", type=int, help="outlier budget k for godec")
    g.add_argument("--sigma", type=float, help="noise level (spcp default mu)")
    g.add_argument(
        "--no-continuation", dest="continuation", action="store_false",
        help="disable lambda continuation in soft-impute and apg",
    )


def _config(args):
    try:
        return SolverConfig(
            lam=args.lam, rank=args.rank, mu=args.mu, mu_growth=args.mu_growth,
            mu_max=args.mu_max, max_iters=args.max_iters, tol=args.tol, seed=args.seed,
            cardinality=args.cardinality, sigma=args.sigma, continuation=args.continuation,
        )
    except ValueError as err:
        raise UsageError(str(err)) from None


def load_matrix(path):
    """Read a matrix from ``.npy``, ``.csv``/``.txt`` (comma separated) or ``.pgm``."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        return np.asarray(np.load(path), dtype=float)
    if suffix in (".csv", ".txt"):
        return np.atleast_2d(np.loadtxt(path, delimiter=","))
    if suffix == ".pgm":
        return images.read_pgm(path.read_bytes()).astype(float)
    raise UsageError(f"unsupported matrix format {suffix!r} (use .npy, .csv or .pgm)")


def save_matrix(path, M):
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        np.save(path, M)
    elif suffix in (".csv", ".txt"):
        np.savetxt(path, M, delimiter=",", fmt="%.17g")
    elif suffix == ".pgm":
        path.write_bytes(images.write_pgm(np.clip(np.rint(M), 0, 255)))
    else:
        raise UsageError(f"unsupported output format {suffix!r}")


def _mask_from(path, shape):
    M = load_matrix(path)
    if M.shape != shape:
        raise UsageError(f"mask shape {M.shape} does not match input shape {shape}")
    return M != 0


def cmd_bench(args):
    scale = 1000 if args.full_size else args.scale
    try:
        spec = bench.preset_spec(args.preset, scale=scale, seed=args.seed, repeats=args.repeats)
    except ValueError as err:
        raise UsageError(str(err)) from None
    solvers = bench.preset_solvers(args.preset, spec)
    if args.solvers:
        wanted = args.solvers.split(",")
        unknown = set(wanted) - set(solvers)
        if unknown:
            raise UsageError(f"solvers {sorted(unknown)} are not part of preset {args.preset}")
        solvers = {k: solvers[k] for k in wanted}
    report = bench.run_benchmark(spec, solvers)
    for (solver, inst), msg in sorted(report.failures.items()):
        print(f"warning: {solver} failed on instance {inst}: {msg}", file=sys.stderr)
    Path(args.out).write_bytes(bench.emit_csv(report))
    if args.plot:
        Path(args.plot).write_bytes(bench.emit_plot(report))
    if report.realized_os:
        realized = np.array(list(report.realized_os.values()))
        print(f"over-sampling ratio: requested {spec.os:g}, realized {realized.min():.4f}..{realized.max():.4f}")
    for solver in sorted(report.curves):
        finals = report.final_distances(solver)
        print(f"{solver}: mean final relative distance {np.mean(finals):.3e} over {len(finals)} runs")
    return EXIT_FAILURE if report.failures and not report.traces else EXIT_OK


def cmd_complete(args):
    D = load_matrix(args.input)
    observed = _mask_from(args.mask, D.shape)
    X, trace = solve_mc(args.solver, McProblem(D, observed), _config(args))
    save_matrix(args.out, X)
    print(f"{args.solver}: {len(trace) - 1} iterations, converged={trace.converged}")
    return EXIT_OK


def cmd_rpca(args):
    D = load_matrix(args.input)
    sol = solve_rpca(args.solver, RpcaProblem(D), _config(args))
    save_matrix(args.out_low, sol.low_rank)
    if args.out_sparse:
        save_matrix(args.out_sparse, sol.sparse)
    print(f"{args.solver}: {len(sol.trace) - 1} iterations, converged={sol.trace.converged}")
    return EXIT_OK


def cmd_inpaint(args):
    config = _config(args)
    reader = images.read_ppm if args.color else images.read_pgm
    img = reader(Path(args.input).read_bytes())
    mask = images.read_pgm(Path(args.mask).read_bytes())
    out = images.inpaint(img, mask, solver=args.solver, config=config)
    writer = images.write_ppm if args.color else images.write_pgm
    Path(args.out).write_bytes(writer(out))
    return EXIT_OK


def cmd_bgsub(args):
    config = _config(args)
    paths = sorted(Path(args.frames).glob("*.pgm"))
    if len(paths) < 2:
        raise UsageError(f"need at least two .pgm frames in {args.frames}")
    frames = [images.read_pgm(p.read_bytes()) for p in paths]
    bg, fg = images.background_subtract(frames, config)
    for out_dir, stack in ((args.out_bg, bg), (args.out_fg, fg)):
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        for p, frame in zip(paths, stack):
            (Path(out_dir) / p.name).write_bytes(images.write_pgm(frame))
    return EXIT_OK


def cmd_ppca(args):
    data = load_matrix(args.input)
    model = ppca_fit(data, args.rank)
    ll = ppca_log_likelihood(model, data)
    if args.out:
        np.savez(args.out, A_hat=model.A_hat, noise_precision=model.noise_precision,
                 mean=model.mean, eigenvalues=model.eigenvalues)
    print(f"noise variance {model.noise_variance:.6g}, log-likelihood {ll:.6g}")
    if model.below_noise_floor:
        print("warning: some leading eigenvalues do not exceed the noise variance", file=sys.stderr)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lowrank", description="Low-rank matrix recovery solvers, benchmarks and image recipes."
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.set_defaults(func=func)
        return p

    p = add("bench", cmd_bench, "run a synthetic comparison preset and write a CSV report")
    p.add_argument("--preset", required=True, choices=sorted(bench.PRESETS))
    p.add_argument("--scale", type=int, default=200, help="matrix size m (default 200)")
    p.add_argument("--full-size", action="store_true", help="use m = 1000")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--solvers", help="comma-separated subset of the preset's solvers")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--plot", help="optional SVG output path")

    p = add("complete", cmd_complete, "complete a partially observed matrix")
    p.add_argument("--input", required=True, help=".npy, .csv or .pgm")
    p.add_argument("--mask", required=True, help="same shape; nonzero = observed")
    p.add_argument("--solver", default="soft-impute", choices=sorted(MC_SOLVERS))
    p.add_argument("--out", required=True)
    _add_solver_flags(p)

    p = add("rpca", cmd_rpca, "split a matrix into low-rank and sparse parts")
    p.add_argument("--input", required=True)
    p.add_argument("--solver", default="pcp", choices=sorted(RPCA_SOLVERS))
    p.add_argument("--out-low", required=True)
    p.add_argument("--out-sparse")
    _add_solver_flags(p)

    p = add("inpaint", cmd_inpaint, "restore missing pixels of a PGM image")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True, help="PGM, 0 = missing, 255 = observed")
    p.add_argument("--solver", default="soft-impute", choices=sorted(MC_SOLVERS))
    p.add_argument("--out", required=True)
    p.add_argument("--color", action="store_true", help="input/output are PPM colour images")
    _add_solver_flags(p)

    p = add("bgsub", cmd_bgsub, "background subtraction on a directory of PGM frames")
    p.add_argument("--frames", required=True)
    p.add_argument("--out-bg", required=True)
    p.add_argument("--out-fg", required=True)
    _add_solver_flags(p)

    p = add("ppca", cmd_ppca, "fit probabilistic PCA (columns are data points)")
    p.add_argument("--input", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--out", help="optional .npz output")
    return parser


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as err:
        print(f"lowrank {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, OSError) as err:
        print(f"lowrank {args.command}: failed: {err}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
