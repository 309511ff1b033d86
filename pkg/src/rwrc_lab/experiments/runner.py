"""Experiment runner: dispatch on kind, write result files, map errors to exit codes.

Exit codes:
    0 - Success
    1 - Runtime or solver failure (any LabError)
    2 - Configuration or schema error
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Union

import numpy as np
import structlog

from rwrc_lab.conductance.io import field_to_dict
from rwrc_lab.conductance.models import TailModel, constant_field
from rwrc_lab.conductance.profiles import rescaled_field, tail_functional
from rwrc_lab.conductance.sampler import sample_field
from rwrc_lab.config.settings import LabSettings
from rwrc_lab.exceptions import LabError
from rwrc_lab.experiments.config import (
    ChiCExperiment,
    ChiDExperiment,
    CompareSlopesExperiment,
    EigenExperiment,
    ExperimentConfigError,
    HomogExperiment,
    LifshitzExperiment,
    NonexitExperiment,
    PredictExperiment,
    PredictorSpec,
    RegimeExperiment,
    SampleExperiment,
    SimulateExperiment,
    load_experiment,
    parse_experiment,
)
from rwrc_lab.experiments.output import ResultWriter, config_hash, to_jsonable, versions
from rwrc_lab.experiments.slopes import (
    Predictor,
    TablePoint,
    compare_slopes,
    lifshitz_line,
    load_table,
    nonexit_line,
    points_from_records,
    singleton_oracle_line,
)
from rwrc_lab.homogenise.spectral import spectral_convergence_experiment
from rwrc_lab.lattice import LatticeBox, box_from_spec
from rwrc_lab.reports import SummaryGenerator
from rwrc_lab.scaling import (
    ScalingParams,
    admissible_alpha,
    beta,
    classify_regime,
    gamma,
    lifshitz_alpha,
    lifshitz_predictor,
    nonexit_predictor,
)
from rwrc_lab.spectrum.eigen import dense_eigen, lowest_eigenpairs, principal_eigen
from rwrc_lab.spectrum.lifshitz import lifshitz_mc, lifshitz_singleton_oracle
from rwrc_lab.spectrum.operator import assemble
from rwrc_lab.spectrum.rescaled import discretise_potential
from rwrc_lab.utils.streams import derive_seed
from rwrc_lab.varprob.continuum import solve_chi_c
from rwrc_lab.varprob.params import RegimeParams
from rwrc_lab.varprob.solver import solve_chi_d
from rwrc_lab.walker.montecarlo import nonexit_mc
from rwrc_lab.walker.simulate import simulate

log = structlog.get_logger()

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2

# One seed per horizon of a non-exit grid
NONEXIT_GRID_STREAM = 11

Rows = List[Dict[str, Any]]


@dataclass(frozen=True)
class RunContext:
    """Execution settings that never change the numbers a run produces."""

    writer: ResultWriter
    threads: int = 1
    eigen_tol: float = 1e-10
    eigen_max_iter: int = 500
    dense_threshold: int = 200

    @classmethod
    def from_settings(cls, writer: ResultWriter, settings: Optional[LabSettings], threads: Optional[int]) -> "RunContext":
        if settings is None:
            return cls(writer=writer, threads=threads or 1)
        return cls(
            writer=writer,
            threads=threads or settings.threads,
            eigen_tol=settings.eigen_tol,
            eigen_max_iter=settings.eigen_max_iter,
            dense_threshold=settings.dense_threshold,
        )


@dataclass
class Outcome:
    """Result mapping and CSV tables of one run; ``primary`` names the table slope fits read."""

    result: Dict[str, Any]
    tables: Dict[str, Rows] = field(default_factory=dict)
    primary: Optional[str] = None


def _site_columns(box: LatticeBox) -> List[Dict[str, int]]:
    return [{f"z{i}": int(c) for i, c in enumerate(site)} for site in box.sites]


def _run_sample(config: SampleExperiment, ctx: RunContext) -> Outcome:
    box = box_from_spec(config.box)
    env = sample_field(box, config.model, config.seed)
    ctx.writer.write_json("field.json", field_to_dict(env))
    touching = env.touching_weights()
    result: Dict[str, Any] = {
        "sites": box.size,
        "halo_shape": list(box.halo_shape),
        "touching_edges": int(touching.size),
        "min_weight": float(touching.min()),
        "max_weight": float(touching.max()),
        "mean_weight": float(touching.mean()),
    }
    if isinstance(config.model, TailModel):
        result["tail_functional"] = tail_functional(rescaled_field(env, 1.0), eta=config.model.eta)
    return Outcome(result)


def _run_simulate(config: SimulateExperiment, ctx: RunContext) -> Outcome:
    box = box_from_spec(config.box)
    env = sample_field(box, config.model, config.seed)
    replicas: Rows = []
    jumps: Rows = []
    occupation = np.zeros(box.size)
    for r in range(config.replicas):
        path, local = simulate(env, config.start, config.horizon, config.stop_on_exit, config.seed, r)
        occupation += local.local_times
        replicas.append(
            {
                "replica": r,
                "jumps": path.jumps,
                "exited": path.exited,
                "exit_time": path.exit_time,
                "rejected": path.rejected,
                "elapsed": local.elapsed,
                "support": int(local.support().shape[0]),
            }
        )
        for time, site in zip(path.jump_times.tolist(), path.sites.tolist()):
            jumps.append({"replica": r, "time": time, **{f"z{i}": c for i, c in enumerate(site)}})
    occupation /= config.replicas
    local_rows = [{**cols, "mean_local_time": float(v)} for cols, v in zip(_site_columns(box), occupation)]
    result = {
        "sites": box.size,
        "replicas": config.replicas,
        "exit_fraction": float(np.mean([row["exited"] for row in replicas])),
        "mean_jumps": float(np.mean([row["jumps"] for row in replicas])),
        "mean_elapsed": float(np.mean([row["elapsed"] for row in replicas])),
        "rejected": int(sum(row["rejected"] for row in replicas)),
    }
    return Outcome(result, {"replicas": replicas, "jumps": jumps, "local_times": local_rows})


def _run_eigen(config: EigenExperiment, ctx: RunContext) -> Outcome:
    box = box_from_spec(config.box)
    env = sample_field(box, config.model, config.seed)
    V = config.potential.build() if config.potential else None
    op = assemble(env, box, discretise_potential(V, box), config.laplace_scale)
    if config.k == 1:
        pairs = [principal_eigen(op, ctx.eigen_tol, ctx.eigen_max_iter)]
    else:
        pairs = lowest_eigenpairs(op, config.k, ctx.eigen_tol)
    result: Dict[str, Any] = {
        "sites": box.size,
        "eigenvalues": [pair.eigenvalue for pair in pairs],
        "residuals": [pair.residual for pair in pairs],
        "iterations": [pair.iterations for pair in pairs],
    }
    if box.size <= ctx.dense_threshold:
        dense = dense_eigen(op)[0][: len(pairs)]
        result["dense_eigenvalues"] = dense.tolist()
        result["dense_max_abs_diff"] = float(np.max(np.abs(dense - result["eigenvalues"])))
    vectors = [
        {**cols, **{f"v{j}": float(pair.eigenvector[i]) for j, pair in enumerate(pairs)}}
        for i, cols in enumerate(_site_columns(box))
    ]
    return Outcome(result, {"eigenvectors": vectors})


def _run_chi_d(config: ChiDExperiment, ctx: RunContext) -> Outcome:
    box = box_from_spec(config.box)
    p = config.exponent
    solved = solve_chi_d(box, p, config.solver_config())
    result: Dict[str, Any] = {
        "sites": box.size,
        "p": p,
        "value": solved.value,
        "restarts": solved.restarts,
        "restart_values": solved.restart_values,
        "spread": solved.spread,
        "best_restart": solved.best_restart,
        "smoothing": solved.smoothing,
        "residual": solved.residual,
        "converged": solved.converged,
    }
    if p == 2.0:
        oracle = principal_eigen(assemble(constant_field(box), box), ctx.eigen_tol, ctx.eigen_max_iter)
        result["oracle"] = oracle.eigenvalue
        result["oracle_relative_error"] = abs(solved.value - oracle.eigenvalue) / oracle.eigenvalue
    minimizer = [{**cols, "value": float(v)} for cols, v in zip(_site_columns(box), solved.minimizer)]
    return Outcome(result, {"minimizer": minimizer})


def _run_chi_c(config: ChiCExperiment, ctx: RunContext) -> Outcome:
    params = RegimeParams(eta=config.eta, D=config.D)
    solved = solve_chi_c(
        config.G,
        params,
        config.levels,
        config.solver_config(),
        force_p=config.force_p,
        witness_grid=config.witness_grid,
    )
    result: Dict[str, Any] = {
        "exponent": solved.exponent,
        "p": solved.p,
        "K": params.K,
        "extrapolated": solved.extrapolated,
        "trend": solved.trend,
        "relative_change": solved.relative_change,
        "zero_infimum": solved.zero_infimum,
        "witness": asdict(solved.witness) if solved.witness is not None else None,
    }
    return Outcome(result, {"levels": [asdict(level) for level in solved.levels]})


def _run_nonexit(config: NonexitExperiment, ctx: RunContext) -> Outcome:
    box = box_from_spec(config.box)
    rows: Rows = []
    for index, horizon in enumerate(config.horizons):
        estimate = nonexit_mc(
            config.model,
            box,
            horizon,
            config.n_env,
            config.n_walks,
            derive_seed(config.seed, NONEXIT_GRID_STREAM, index),
            start=config.start,
            threads=ctx.threads,
        )
        rows.append(
            {
                "t": float(horizon),
                "estimate": estimate.estimate,
                "ci_low": estimate.ci_low,
                "ci_high": estimate.ci_high,
                "stderr": estimate.stderr,
                "n_exit": estimate.n_exit,
                "one_sided": estimate.one_sided,
            }
        )
    result: Dict[str, Any] = {
        "sites": box.size,
        "n_env": config.n_env,
        "n_walks": config.n_walks,
        "horizons": len(rows),
    }
    if isinstance(config.model, TailModel):
        result["regime"] = classify_regime(config.model.eta, box.d).regime.value
    return Outcome(result, {"nonexit": rows}, primary="nonexit")


def _run_lifshitz(config: LifshitzExperiment, ctx: RunContext) -> Outcome:
    box = box_from_spec(config.box)
    table = lifshitz_mc(
        config.model,
        box,
        config.eps,
        config.n_env,
        config.seed,
        chi_d=config.chi_d,
        threads=ctx.threads,
        dense_threshold=ctx.dense_threshold,
        tol=ctx.eigen_tol,
    )
    records = table.as_records()
    singleton = box.size == 1 and box.d == 1
    if singleton:
        for record in records:
            record["exact"] = lifshitz_singleton_oracle(config.model, record["eps"])
    result = {
        "sites": box.size,
        "n_env": config.n_env,
        "chi_d": config.chi_d,
        "singleton_oracle": singleton,
        "min_eigenvalue": float(table.eigenvalues.min()),
        "median_eigenvalue": float(np.median(table.eigenvalues)),
    }
    return Outcome(result, {"lifshitz": records}, primary="lifshitz")


def _run_homog(config: HomogExperiment, ctx: RunContext) -> Outcome:
    V = config.potential.build() if config.potential else None
    solved = spectral_convergence_experiment(
        config.model,
        V,
        config.j_max,
        config.sizes,
        config.n_env,
        config.seed,
        d=config.d,
        threads=ctx.threads,
        tol=ctx.eigen_tol,
    )
    c_eff = solved.c_eff
    result = {
        "extrapolated": solved.extrapolated,
        "continuum": solved.continuum,
        "c_eff": c_eff.c_eff,
        "c_eff_ci": [c_eff.ci_low, c_eff.ci_high],
        "c_eff_stderr": 2.0 * c_eff.stderr,
        "c_eff_oracle": c_eff.oracle,
        "distances": solved.distances,
        "gaps": solved.gaps,
        "origin_positive": solved.origin_positive,
    }
    eigenvalues = [
        {"alpha": alpha, "j": j + 1, "value": value}
        for alpha, row in zip(solved.sizes, solved.eigenvalues)
        for j, value in enumerate(row)
    ]
    ratios = [
        {"alpha": a, "ratio": r, "stderr": s} for a, r, s in zip(c_eff.sizes, c_eff.ratios, c_eff.stderrs)
    ]
    return Outcome(result, {"eigenvalues": eigenvalues, "c_eff": ratios})


def _run_regime(config: RegimeExperiment, ctx: RunContext) -> Outcome:
    classification = classify_regime(config.eta, config.d)
    result: Dict[str, Any] = {
        "regime": classification.regime.value,
        "d1_caveat": classification.d1_caveat,
        "facts": classification.facts,
    }
    if config.t is not None and config.alpha is not None:
        window = admissible_alpha(config.t, config.alpha, config.eta, config.d, threshold=config.threshold)
        result.update(
            beta=beta(config.t, config.alpha, config.eta, config.d),
            gamma=gamma(config.t, config.alpha, config.eta, config.d),
            window={
                "upper_ratio": window.upper_ratio,
                "lower_ratio": window.lower_ratio,
                "threshold": window.threshold,
                "passed": window.passed,
            },
        )
    return Outcome(result)


def _missing(config: Any, *names: str) -> List[str]:
    return [name for name in names if getattr(config, name) is None]


def _run_predict(config: PredictExperiment, ctx: RunContext) -> Outcome:
    if config.target == "lifshitz":
        if config.s is None or config.chi_c is None:
            raise ExperimentConfigError("target 'lifshitz' needs s and chi_c", paths=_missing(config, "s", "chi_c"))
        prediction = lifshitz_predictor(config.eta, config.D, config.s, config.chi_c, config.d)
        result: Dict[str, Any] = {
            "target": "lifshitz",
            "exponent": prediction.exponent,
            "constant": prediction.constant,
            "s": prediction.s,
        }
        if config.t is not None:
            result["alpha"] = lifshitz_alpha(config.t, config.s, config.d, config.eta)
        return Outcome(result)

    if config.t is None or config.alpha is None:
        raise ExperimentConfigError("target 'nonexit' needs t and alpha", paths=_missing(config, "t", "alpha"))
    params = ScalingParams(eta=config.eta, D=config.D, d=config.d, t=config.t, alpha=config.alpha, s=config.s)
    prediction = nonexit_predictor(params, config.chi_c, config.chi_d_box, config.chi_d_Zd)
    return Outcome(
        {
            "target": "nonexit",
            "regime": prediction.regime.value,
            "scale": prediction.scale,
            "lower": prediction.lower,
            "upper": prediction.upper,
            "beta": params.beta,
            "gamma": params.gamma,
            "K": params.K,
        }
    )


def build_predictor(spec: PredictorSpec, points: List[TablePoint]) -> Predictor:
    """The predictor line a :class:`PredictorSpec` names."""
    model = TailModel(eta=spec.eta, D=spec.D, cap=spec.cap)
    if spec.kind == "lifshitz-singleton":
        return singleton_oracle_line(model, [pt.x for pt in points if pt.estimate > 0])
    if spec.chi is None:
        raise ExperimentConfigError(f"predictor '{spec.kind}' needs chi", paths=["predictor.chi"])
    if spec.kind == "lifshitz":
        return lifshitz_line(model, spec.chi)
    return nonexit_line(spec.eta, spec.D, spec.d, spec.chi, spec.alpha or 1.0)


def _run_compare_slopes(config: CompareSlopesExperiment, ctx: RunContext) -> Outcome:
    tables: Dict[str, Rows] = {}
    if config.table is not None:
        points = load_table(config.table)
    else:
        if config.dataset is None:
            raise ExperimentConfigError("give exactly one of 'table' and 'dataset'", paths=["table", "dataset"])
        dataset = HANDLERS[config.dataset.kind](config.dataset, ctx)
        if dataset.primary is None:
            raise ExperimentConfigError(
                f"dataset kind '{config.dataset.kind}' produces no table", paths=["dataset.kind"]
            )
        rows = dataset.tables[dataset.primary]
        tables["dataset"] = rows
        points = points_from_records(rows)
    fit = compare_slopes(points, build_predictor(config.predictor, points))
    result = asdict(fit)
    result.pop("scale")
    result["slope_ci"] = list(fit.slope_ci)
    tables["fit"] = [
        {"x": pt.x, "u": u, "estimate": pt.estimate, "ci_low": pt.ci_low, "ci_high": pt.ci_high}
        for pt, u in zip([pt for pt in points if pt.x > 0 and pt.estimate > 0], fit.scale)
    ]
    return Outcome(result, tables)


HANDLERS: Dict[str, Callable[[Any, RunContext], Outcome]] = {
    "sample": _run_sample,
    "simulate": _run_simulate,
    "eigen": _run_eigen,
    "chi-d": _run_chi_d,
    "chi-c": _run_chi_c,
    "nonexit": _run_nonexit,
    "lifshitz": _run_lifshitz,
    "homog": _run_homog,
    "regime": _run_regime,
    "predict": _run_predict,
    "compare-slopes": _run_compare_slopes,
}


def _fail(writer: ResultWriter, error: LabError, paths: Optional[List[str]] = None) -> int:
    writer.write_error(type(error).__name__, error.message, error.hint, paths)
    print(f"Error: {error}", file=sys.stderr)
    return error.exit_code


def run(
    config: Any,
    out_dir: Union[str, Path],
    threads: Optional[int] = None,
    settings: Optional[LabSettings] = None,
) -> int:
    """Run one validated experiment and write its result files.

    Writes result.json, one CSV per table and summary.txt on success, or
    error.json on failure. ``threads`` only changes the wall-clock time.

    Returns:
        Exit code (0=success, 1=runtime failure, 2=configuration error)
    """
    writer = ResultWriter(out_dir)
    ctx = RunContext.from_settings(writer, settings, threads)
    digest = config_hash(config)
    log.info("experiment_started", kind=config.kind, config_hash=digest, threads=ctx.threads)
    try:
        outcome = HANDLERS[config.kind](config, ctx)
    except LabError as e:
        log.error("experiment_failed", kind=config.kind, error=type(e).__name__, message=e.message)
        return _fail(writer, e, e.paths if isinstance(e, ExperimentConfigError) else None)

    result = to_jsonable(outcome.result)
    tables = {name: to_jsonable(rows) for name, rows in outcome.tables.items()}
    (writer.out_dir / "error.json").unlink(missing_ok=True)
    writer.write_result(config.kind, config, result)
    for name, rows in tables.items():
        writer.write_table(name, rows)
    summary = SummaryGenerator().generate_text(config.kind, digest, versions(), result, tables)
    writer.write_text("summary.txt", summary)
    log.info("experiment_finished", kind=config.kind, files=[p.name for p in writer.written])
    return EXIT_SUCCESS


def run_file(
    path: Union[str, Path],
    out_dir: Union[str, Path],
    threads: Optional[int] = None,
    settings: Optional[LabSettings] = None,
) -> int:
    """Load an experiment file and run it; schema errors exit with code 2."""
    try:
        config = load_experiment(path)
    except ExperimentConfigError as e:
        log.error("experiment_config_invalid", path=str(path), fields=e.paths)
        return _fail(ResultWriter(out_dir), e, e.paths)
    return run(config, out_dir, threads, settings)


def run_mapping(
    data: Mapping[str, Any],
    out_dir: Union[str, Path],
    threads: Optional[int] = None,
    settings: Optional[LabSettings] = None,
) -> int:
    """Validate a mapping (as built by the CLI subcommands) and run it."""
    try:
        config = parse_experiment(dict(data))
    except ExperimentConfigError as e:
        log.error("experiment_config_invalid", fields=e.paths)
        return _fail(ResultWriter(out_dir), e, e.paths)
    return run(config, out_dir, threads, settings)
