"""Log-space slope fits of Monte Carlo tables against leading-order predictors."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Sequence, Union

import numpy as np
import orjson
import structlog

from rwrc_lab.conductance.models import TailModel
from rwrc_lab.exceptions import DomainError, InsufficientDataError
from rwrc_lab.scaling import Regime, ScalingParams, classify_regime, nonexit_predictor
from rwrc_lab.spectrum.lifshitz import lifshitz_singleton_oracle

log = structlog.get_logger()

Z_95 = 1.959963984540054
_X_COLUMNS = ("x", "t", "eps")
_Y_COLUMNS = ("estimate", "frequency")


@dataclass(frozen=True)
class TablePoint:
    """One Monte Carlo estimate with its 95% interval."""

    x: float
    estimate: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class Predictor:
    """Predicted log-estimate = slope·scale(x) (+ a free intercept in the fit).

    Attributes:
        name: Label used in reports.
        scale: The predictor's scale variable u(x).
        slope: Predicted d log(estimate)/du.
    """

    name: str
    scale: Callable[[float], float]
    slope: float


@dataclass(frozen=True)
class SlopeFit:
    """Weighted least-squares fit of log(estimate) = intercept + slope·u.

    Attributes:
        slope: Fitted slope.
        stderr: Standard error of the slope (inflated by the reduced χ² when it exceeds 1).
        intercept: Fitted intercept.
        predicted_slope: The predictor's slope.
        ratio: slope / predicted_slope.
        ratio_ci: 95% interval of the ratio, symmetric in log space.
        n_points: Points used.
        dropped: Rows with x ≤ 0 or without a finite log-estimate.
    """

    predictor: str
    slope: float
    stderr: float
    intercept: float
    predicted_slope: float
    ratio: float
    ratio_ci_low: float
    ratio_ci_high: float
    n_points: int
    dropped: int
    scale: List[float]

    @property
    def slope_ci(self) -> tuple:
        return self.slope - Z_95 * self.stderr, self.slope + Z_95 * self.stderr


def _log_sigma(point: TablePoint) -> float:
    if point.ci_low > 0 and point.ci_high > point.ci_low:
        return (math.log(point.ci_high) - math.log(point.ci_low)) / (2.0 * Z_95)
    return 0.0


def compare_slopes(table: Sequence[TablePoint], predictor: Predictor) -> SlopeFit:
    """Fit the slope of log(estimate) against the predictor's scale variable.

    Weights are 1/σ² with σ the half-width of the CI in log space divided by
    1.96; rows whose interval collapses get the smallest positive σ of the
    table (unit weights when every interval collapses).

    Raises:
        InsufficientDataError: If fewer than three rows have positive x and
            estimate or the scale variable does not vary.
    """
    usable = [pt for pt in table if pt.x > 0 and pt.estimate > 0 and math.isfinite(pt.estimate)]
    if len(usable) < 3:
        raise InsufficientDataError(
            f"compare_slopes needs at least 3 points with positive estimates, got {len(usable)}",
            hint="Lengthen the grid or raise the sample sizes so the tail has hits.",
        )
    u = np.asarray([predictor.scale(pt.x) for pt in usable], dtype=float)
    if np.ptp(u) <= 1e-12 * max(1.0, float(np.abs(u).max())):
        raise InsufficientDataError("degenerate scale grid: the scale variable does not vary")
    y = np.log([pt.estimate for pt in usable])
    sigma = np.asarray([_log_sigma(pt) for pt in usable])
    positive = sigma[sigma > 0]
    floor = float(positive.min()) if positive.size else 1.0
    sigma = np.where(sigma > 0, sigma, floor)
    w = 1.0 / sigma**2

    design = np.stack([np.ones_like(u), u], axis=1)
    normal = design.T @ (w[:, None] * design)
    coeffs = np.linalg.solve(normal, design.T @ (w * y))
    covariance = np.linalg.inv(normal)
    residual = y - design @ coeffs
    dof = len(usable) - 2
    if dof > 0 and positive.size:
        covariance = covariance * max(1.0, float(np.sum(w * residual**2)) / dof)
    elif dof > 0:
        covariance = covariance * float(np.sum(residual**2)) / dof

    slope = float(coeffs[1])
    stderr = float(math.sqrt(max(covariance[1, 1], 0.0)))
    ratio = slope / predictor.slope
    spread = Z_95 * stderr / abs(slope) if slope != 0 else math.inf
    ends = (ratio * math.exp(-spread), ratio * math.exp(spread)) if math.isfinite(spread) else (-math.inf, math.inf)
    fit = SlopeFit(
        predictor=predictor.name,
        slope=slope,
        stderr=stderr,
        intercept=float(coeffs[0]),
        predicted_slope=float(predictor.slope),
        ratio=float(ratio),
        ratio_ci_low=float(min(ends)),
        ratio_ci_high=float(max(ends)),
        n_points=len(usable),
        dropped=len(table) - len(usable),
        scale=u.tolist(),
    )
    log.info(
        "slopes_compared",
        predictor=predictor.name,
        slope=fit.slope,
        predicted=fit.predicted_slope,
        ratio=fit.ratio,
        points=fit.n_points,
    )
    return fit


def nonexit_line(eta: float, D: float, d: int, chi: float, alpha: float = 1.0) -> Predictor:
    """log P(stay up to t) ≈ −K·χ·u(t), u = γ_t (spread-out) or t^{η/(η+1)}.

    The slope comes from :func:`rwrc_lab.scaling.nonexit_predictor`; ``chi``
    is χ^c(G) in the spread-out regime and χ^d(Z^d) otherwise.
    """
    regime = classify_regime(eta, d).regime

    def params(t: float) -> ScalingParams:
        return ScalingParams(eta=eta, D=D, d=d, t=t, alpha=alpha)

    def scale(t: float) -> float:
        return nonexit_predictor(params(t), **_chi_inputs(regime, chi)).scale

    prediction = nonexit_predictor(params(1.0), **_chi_inputs(regime, chi))
    return Predictor(name=f"nonexit-{regime.value}", scale=scale, slope=prediction.upper / prediction.scale)


def _chi_inputs(regime: Regime, chi: float) -> Dict[str, float]:
    if regime is Regime.SPREAD_OUT:
        return {"chi_c": chi}
    if regime is Regime.CRITICAL:
        return {"chi_d_Zd": chi}
    return {"chi_d_box": chi, "chi_d_Zd": chi}


def lifshitz_line(model: TailModel, chi_d: float) -> Predictor:
    """log Pr(λ^a(B) ≤ ε) ≈ −D·χ^d(B)^{η+1}·ε^{−η}."""
    eta = model.eta
    return Predictor(
        name="lifshitz",
        scale=lambda eps: eps ** (-eta),
        slope=-model.D * chi_d ** (eta + 1.0),
    )


def singleton_oracle_line(model: TailModel, eps_grid: Sequence[float]) -> Predictor:
    """Least-squares slope of log Pr(a_1 + a_2 ≤ ε) in ε^{−η} over the grid.

    Raises:
        InsufficientDataError: If the grid has fewer than two distinct points.
        DomainError: If the exact tail vanishes somewhere on the grid.
    """
    eta = model.eta
    grid = sorted(set(float(e) for e in eps_grid))
    if len(grid) < 2:
        raise InsufficientDataError("the oracle line needs at least two distinct eps values")
    exact = np.asarray([lifshitz_singleton_oracle(model, e) for e in grid])
    if np.any(exact <= 0):
        raise DomainError("the exact singleton tail vanishes on the grid")
    u = np.asarray(grid) ** (-eta)
    slope = float(np.polyfit(u, np.log(exact), 1)[0])
    return Predictor(name="lifshitz-singleton-oracle", scale=lambda eps: eps ** (-eta), slope=slope)


def points_from_records(records: Sequence[Mapping[str, Any]]) -> List[TablePoint]:
    """Table points from row mappings with an x column (x, t or eps) and an estimate column.

    Raises:
        DomainError: If the columns are missing.
    """
    if not records:
        return []
    keys = set(records[0].keys())
    x_col = next((c for c in _X_COLUMNS if c in keys), None)
    y_col = next((c for c in _Y_COLUMNS if c in keys), None)
    if x_col is None or y_col is None or not {"ci_low", "ci_high"} <= keys:
        raise DomainError(
            f"table needs one of {_X_COLUMNS}, one of {_Y_COLUMNS}, ci_low and ci_high; got {sorted(keys)}"
        )
    return [
        TablePoint(
            x=float(row[x_col]),
            estimate=float(row[y_col]),
            ci_low=float(row["ci_low"]),
            ci_high=float(row["ci_high"]),
        )
        for row in records
    ]


def load_table(path: Union[str, Path]) -> List[TablePoint]:
    """Read a CSV table or a JSON list of records (or ``{"rows": [...]}``).

    Raises:
        DomainError: If the file is missing or malformed.
    """
    source = Path(path)
    try:
        if source.suffix == ".json":
            data = orjson.loads(source.read_bytes())
            records = data.get("rows", []) if isinstance(data, dict) else data
        else:
            with open(source, newline="") as f:
                records = list(csv.DictReader(f))
    except FileNotFoundError:
        raise DomainError(f"Table file not found: {source}")
    except (orjson.JSONDecodeError, csv.Error) as e:
        raise DomainError(f"Cannot parse table {source}: {e}")
    try:
        return points_from_records(records)
    except (TypeError, ValueError) as e:
        raise DomainError(f"Malformed row in table {source}: {e}")
