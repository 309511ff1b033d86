"""
Entry point for the rwrc-lab CLI.

Usage:
    rwrc-lab run --config FILE --out DIR   Run an experiment file (JSON or YAML)
    rwrc-lab schema                        Print the experiment JSON schema
    rwrc-lab <kind> [flags] --out DIR      Run one experiment built from flags
    rwrc-lab --help                        Show help message
    rwrc-lab --version                     Show version and exit

Exit Codes:
    0 - Success
    1 - Runtime or solver failure (non-convergence, invalid parameters)
    2 - Configuration or schema error (error.json names the offending field)
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional

if TYPE_CHECKING:
    from rwrc_lab.config import LabSettings

from rwrc_lab import __version__

# Exit codes
EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def _floats(text: str) -> List[float]:
    """Comma-separated floats, e.g. ``0.8,1,1.25``."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _ints(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _add_common(parser: argparse.ArgumentParser, seeded: bool) -> None:
    parser.add_argument("--out", help="Output directory (default: settings output_dir or ./results)")
    parser.add_argument("--threads", type=int, help="Worker threads for ensemble loops")
    if seeded:
        parser.add_argument("--seed", type=int, required=True, help="Seed of every random stream")


def _add_box(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("geometry")
    group.add_argument("--d", type=int, default=1, help="Lattice dimension (default: 1)")
    group.add_argument("--alpha", type=float, default=1.0, help="Spatial scale α (default: 1)")
    group.add_argument(
        "--domain",
        type=_floats,
        help="Interval lo,hi of G, used on every axis (default: 0,1)",
    )
    group.add_argument("--cube", type=int, help="Use Q_n = [-n, n]^d at α = 1 instead of αG")


def _add_model(parser: argparse.ArgumentParser, tail_only: bool = False) -> None:
    group = parser.add_argument_group("conductance law")
    if not tail_only:
        group.add_argument("--model", choices=["tail", "elliptic", "constant"], default="tail")
    group.add_argument("--eta", type=float, help="Tail exponent η")
    group.add_argument("--D", type=float, help="Tail constant D")
    group.add_argument("--cap", type=float, help="Almost-sure upper bound M (default: 1)")
    if not tail_only:
        group.add_argument("--lam", type=float, help="Ellipticity constant λ")
        group.add_argument("--value", type=float, help="Constant conductance")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="rwrc-lab",
        description="Numerical laboratory for random walks among random conductances",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exit Codes:
  0   Success
  1   Runtime or solver failure
  2   Configuration or schema error

Environment Variables:
  CONFIG_PATH              Path to YAML settings file
  RWRC_LOG_LEVEL           Logging level: DEBUG, INFO, WARNING, ERROR
  RWRC_LOG_FORMAT          Log format: json or text
  RWRC_THREADS             Default worker threads
  RWRC_OUTPUT_DIR          Default output directory
  RWRC_EIGEN_TOL           Eigen solver residual tolerance

Examples:
  # Run an experiment file
  rwrc-lab run --config chi_d.yaml --out results/chi_d

  # χ^d on Q_8 for p = 2 (matches the principal eigenvalue)
  rwrc-lab chi-d --cube 8 --p 2 --out results/q8

  # Singleton Lifshitz tail
  rwrc-lab lifshitz --cube 0 --eta 1 --D 0.25 --eps 0.8,1,1.25 --n-env 200000 --seed 7 --out results/tail
""",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--settings", help="YAML settings file (sets CONFIG_PATH)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run an experiment file")
    run.add_argument("--config", required=True, help="Experiment file (JSON or YAML)")
    _add_common(run, seeded=False)

    schema = sub.add_parser("schema", help="Print the experiment JSON schema")
    schema.add_argument("--out", help="Write the schema to this file instead of stdout")

    sample = sub.add_parser("sample", help="Sample a conductance field")
    _add_common(sample, seeded=True)
    _add_box(sample)
    _add_model(sample)

    sim = sub.add_parser("simulate", help="Simulate walk paths in one environment")
    _add_common(sim, seeded=True)
    _add_box(sim)
    _add_model(sim)
    sim.add_argument("--horizon", type=float, required=True)
    sim.add_argument("--start", type=_ints, help="Start site, e.g. 0,0")
    sim.add_argument("--reject-exits", action="store_true", help="Reject outward jumps instead of stopping")
    sim.add_argument("--replicas", type=int)

    eigen = sub.add_parser("eigen", help="Lowest Dirichlet eigenpairs in one environment")
    _add_common(eigen, seeded=True)
    _add_box(eigen)
    _add_model(eigen)
    eigen.add_argument("--k", type=int)
    eigen.add_argument("--potential", type=float, help="Constant potential V")
    eigen.add_argument("--laplace-scale", type=float)

    chi_d = sub.add_parser("chi-d", help="χ^d(B) by smoothed projected descent")
    _add_common(chi_d, seeded=False)
    _add_box(chi_d)
    exponent = chi_d.add_mutually_exclusive_group(required=True)
    exponent.add_argument("--p", type=float)
    exponent.add_argument("--eta", type=float)
    _add_solver(chi_d)

    chi_c = sub.add_parser("chi-c", help="χ^c(G) from rescaled χ^d on growing boxes")
    _add_common(chi_c, seeded=False)
    chi_c.add_argument("--d", type=int, default=1)
    chi_c.add_argument("--domain", type=_floats, help="Interval lo,hi of G on every axis (default: 0,1)")
    chi_c.add_argument("--eta", type=float, required=True)
    chi_c.add_argument("--D", type=float)
    chi_c.add_argument("--levels", type=_floats, required=True, help="Scales α, e.g. 16,32,64")
    chi_c.add_argument("--force-p", type=float)
    chi_c.add_argument("--witness-grid", type=_floats)
    _add_solver(chi_c)

    nonexit = sub.add_parser("nonexit", help="Annealed non-exit probabilities over horizons")
    _add_common(nonexit, seeded=True)
    _add_box(nonexit)
    _add_model(nonexit)
    nonexit.add_argument("--horizons", type=_floats, required=True)
    nonexit.add_argument("--n-env", type=int, required=True)
    nonexit.add_argument("--n-walks", type=int)
    nonexit.add_argument("--start", type=_ints)

    lifshitz = sub.add_parser("lifshitz", help="Empirical Lifshitz tail of λ^a(B)")
    _add_common(lifshitz, seeded=True)
    _add_box(lifshitz)
    _add_model(lifshitz, tail_only=True)
    lifshitz.add_argument("--eps", type=_floats, required=True)
    lifshitz.add_argument("--n-env", type=int, required=True)
    lifshitz.add_argument("--chi-d", type=float)

    homog = sub.add_parser("homog", help="Spectral homogenisation on α(0,1)^d")
    _add_common(homog, seeded=True)
    homog.add_argument("--model", choices=["elliptic", "constant"], default="elliptic")
    homog.add_argument("--lam", type=float)
    homog.add_argument("--values", type=_floats, help="Atoms of a discrete elliptic law")
    homog.add_argument("--value", type=float)
    homog.add_argument("--d", type=int, default=1)
    homog.add_argument("--sizes", type=_floats, required=True)
    homog.add_argument("--j-max", type=int)
    homog.add_argument("--n-env", type=int)
    homog.add_argument("--potential", type=float, help="Constant potential V")

    regime = sub.add_parser("regime", help="Classify (η, d) and check the (t, α) window")
    _add_common(regime, seeded=False)
    regime.add_argument("--eta", type=float, required=True)
    regime.add_argument("--d", type=int, required=True)
    regime.add_argument("--t", type=float)
    regime.add_argument("--alpha", type=float)
    regime.add_argument("--threshold", type=float)

    predict = sub.add_parser("predict", help="Leading-order non-exit or Lifshitz predictions")
    _add_common(predict, seeded=False)
    predict.add_argument("--target", choices=["nonexit", "lifshitz"], default="nonexit")
    predict.add_argument("--eta", type=float, required=True)
    predict.add_argument("--D", type=float)
    predict.add_argument("--d", type=int, required=True)
    predict.add_argument("--t", type=float)
    predict.add_argument("--alpha", type=float)
    predict.add_argument("--s", type=float)
    predict.add_argument("--chi-c", type=float)
    predict.add_argument("--chi-d-box", type=float)
    predict.add_argument("--chi-d-zd", type=float)

    slopes = sub.add_parser("compare-slopes", help="Fit a Monte Carlo table against a predictor")
    _add_common(slopes, seeded=False)
    slopes.add_argument("--table", required=True, help="CSV or JSON table (e.g. nonexit.csv)")
    slopes.add_argument("--predictor", choices=["nonexit", "lifshitz", "lifshitz-singleton"], required=True)
    slopes.add_argument("--eta", type=float, required=True)
    slopes.add_argument("--D", type=float, required=True)
    slopes.add_argument("--d", type=int)
    slopes.add_argument("--alpha", type=float)
    slopes.add_argument("--chi", type=float)
    slopes.add_argument("--cap", type=float)

    return parser.parse_args(argv)


def _add_solver(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver")
    group.add_argument("--restarts", type=int)
    group.add_argument("--max-iter", type=int)
    group.add_argument("--smoothing-levels", type=int)
    group.add_argument("--tol", type=float)
    group.add_argument("--seed", type=int, help="Seed of the random starts (default: 0)")


def _compact(data: Dict[str, Any]) -> Dict[str, Any]:
    """Drop unset flags so the model defaults apply."""
    return {key: value for key, value in data.items() if value is not None}


def _box(args: argparse.Namespace) -> Dict[str, Any]:
    if args.cube is not None:
        return {"d": args.d, "alpha": 1.0, "G": [[-args.cube - 0.5, args.cube + 0.5]] * args.d}
    lo, hi = args.domain if args.domain else (0.0, 1.0)
    return {"d": args.d, "alpha": args.alpha, "G": [[lo, hi]] * args.d}


def _model(args: argparse.Namespace, kind: str = "tail") -> Dict[str, Any]:
    kind = getattr(args, "model", kind)
    if kind == "tail":
        return _compact({"kind": "tail", "eta": args.eta, "D": args.D, "cap": args.cap})
    if kind == "elliptic":
        values = getattr(args, "values", None)
        law = "discrete" if values else None
        return _compact({"kind": "elliptic", "lam": args.lam, "law": law, "values": values})
    return _compact({"kind": "constant", "value": args.value})


def build_experiment(args: argparse.Namespace, settings: "LabSettings") -> Dict[str, Any]:
    """The experiment mapping a subcommand's flags describe."""
    command = args.command
    if command == "sample":
        return {"kind": command, "seed": args.seed, "box": _box(args), "model": _model(args)}
    if command == "simulate":
        return _compact(
            {
                "kind": command,
                "seed": args.seed,
                "box": _box(args),
                "model": _model(args),
                "horizon": args.horizon,
                "start": args.start,
                "stop_on_exit": not args.reject_exits,
                "replicas": args.replicas,
            }
        )
    if command == "eigen":
        potential = {"constant": args.potential} if args.potential is not None else None
        return _compact(
            {
                "kind": command,
                "seed": args.seed,
                "box": _box(args),
                "model": _model(args),
                "k": args.k,
                "potential": potential,
                "laplace_scale": args.laplace_scale,
            }
        )
    if command in ("chi-d", "chi-c"):
        solver = {
            "restarts": args.restarts or settings.chi_restarts,
            "max_iter": args.max_iter or settings.chi_max_iter,
            "smoothing_levels": args.smoothing_levels or settings.smoothing_levels,
            "tol": args.tol,
            "seed": args.seed,
        }
        if command == "chi-d":
            return _compact({"kind": command, "box": _box(args), "p": args.p, "eta": args.eta, **solver})
        lo, hi = args.domain if args.domain else (0.0, 1.0)
        return _compact(
            {
                "kind": command,
                "G": [[lo, hi]] * args.d,
                "eta": args.eta,
                "D": args.D,
                "levels": args.levels,
                "force_p": args.force_p,
                "witness_grid": args.witness_grid,
                **solver,
            }
        )
    if command == "nonexit":
        return _compact(
            {
                "kind": command,
                "seed": args.seed,
                "box": _box(args),
                "model": _model(args),
                "horizons": args.horizons,
                "n_env": args.n_env,
                "n_walks": args.n_walks or settings.walks_per_env,
                "start": args.start,
            }
        )
    if command == "lifshitz":
        return _compact(
            {
                "kind": command,
                "seed": args.seed,
                "box": _box(args),
                "model": _model(args),
                "eps": args.eps,
                "n_env": args.n_env,
                "chi_d": args.chi_d,
            }
        )
    if command == "homog":
        potential = {"constant": args.potential} if args.potential is not None else None
        return _compact(
            {
                "kind": command,
                "seed": args.seed,
                "model": _model(args),
                "d": args.d,
                "sizes": args.sizes,
                "j_max": args.j_max,
                "n_env": args.n_env,
                "potential": potential,
            }
        )
    if command == "regime":
        return _compact(
            {
                "kind": command,
                "eta": args.eta,
                "d": args.d,
                "t": args.t,
                "alpha": args.alpha,
                "threshold": args.threshold or settings.window_threshold,
            }
        )
    if command == "predict":
        return _compact(
            {
                "kind": command,
                "target": args.target,
                "eta": args.eta,
                "D": args.D,
                "d": args.d,
                "t": args.t,
                "alpha": args.alpha,
                "s": args.s,
                "chi_c": args.chi_c,
                "chi_d_box": args.chi_d_box,
                "chi_d_Zd": args.chi_d_zd,
            }
        )
    predictor = _compact(
        {
            "kind": args.predictor,
            "eta": args.eta,
            "D": args.D,
            "d": args.d,
            "alpha": args.alpha,
            "chi": args.chi,
            "cap": args.cap,
        }
    )
    return {"kind": "compare-slopes", "table": args.table, "predictor": predictor}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for rwrc-lab.

    Returns:
        Exit code (0=success, 1=runtime failure, 2=configuration error)
    """
    args = parse_args(argv)

    # Import here so that --help and --version work without the numerical stack
    from rwrc_lab.config.loader import ConfigurationError, load_config
    from rwrc_lab.logging import configure_logging, get_logger

    settings_path = args.settings
    # a YAML experiment file may carry its own settings section
    if settings_path is None and args.command == "run":
        experiment = Path(args.config)
        if experiment.suffix in (".yaml", ".yml") and experiment.is_file():
            settings_path = str(experiment)

    try:
        settings = load_config(settings_path)
    except ConfigurationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG_ERROR

    configure_logging(log_format=settings.log_format, log_level=settings.log_level)
    log = get_logger()

    if args.command == "schema":
        import orjson

        from rwrc_lab.experiments import experiment_schema
        from rwrc_lab.utils.files import atomic_write_bytes

        document = orjson.dumps(experiment_schema(), option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2)
        if args.out:
            atomic_write_bytes(args.out, document + b"\n")
        else:
            print(document.decode("utf-8"))
        return EXIT_SUCCESS

    from rwrc_lab.experiments import run_file, run_mapping

    out_dir = args.out or settings.output_dir or "results"
    threads = args.threads or settings.threads
    log.info("starting", version=__version__, command=args.command, out=out_dir)
    try:
        if args.command == "run":
            return run_file(args.config, out_dir, threads, settings)
        return run_mapping(build_experiment(args, settings), out_dir, threads, settings)
    except KeyboardInterrupt:
        log.info("shutdown", reason="keyboard interrupt")
        print("\nInterrupted, exiting...", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
