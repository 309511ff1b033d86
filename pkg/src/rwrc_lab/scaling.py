"""Scale algebra: β_t, γ_t, regime classification and leading-order predictors.

Predictors return leading-order logarithmic rates only; they are meant to be
compared with Monte Carlo slope fits, never with absolute probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import structlog
from pydantic import BaseModel, ConfigDict, Field, computed_field

from rwrc_lab.exceptions import DomainError, RegimeMismatchError

log = structlog.get_logger()

DEFAULT_WINDOW_THRESHOLD = 0.1
_CRITICAL_TOL = 1e-12


class Regime(str, Enum):
    """Position of η relative to d/2."""

    SPREAD_OUT = "spread-out"
    CRITICAL = "critical"
    CONFINED = "confined"


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")


def beta(t: float, alpha: float, eta: float, d: int) -> float:
    """β_t = (t / α^{d+2})^{1/(1+η)}; logs a warning when β ≤ 1."""
    _check_positive(t=t, alpha=alpha, eta=eta)
    value = (t / alpha ** (d + 2)) ** (1.0 / (1.0 + eta))
    if value <= 1.0:
        log.warning("beta_outside_asymptotic_window", t=t, alpha=alpha, eta=eta, d=d, beta=value)
    return value


def gamma(t: float, alpha: float, eta: float, d: int) -> float:
    """γ_t = t/(α²β_t), equal to β_t^η α^d and to t^{η/(1+η)} α^{(d−2η)/(1+η)}."""
    b = beta(t, alpha, eta, d)
    return t / (alpha**2 * b)


def gamma_forms(t: float, alpha: float, eta: float, d: int) -> Tuple[float, float, float]:
    """The three closed forms of γ_t, for consistency checks."""
    _check_positive(t=t, alpha=alpha, eta=eta)
    b = (t / alpha ** (d + 2)) ** (1.0 / (1.0 + eta))
    return (
        t / (alpha**2 * b),
        b**eta * alpha**d,
        t ** (eta / (1.0 + eta)) * alpha ** ((d - 2.0 * eta) / (1.0 + eta)),
    )


def regime_facts(regime: Regime, d: int) -> Dict[str, object]:
    """Which variational problems vanish and which admit minimisers."""
    return {
        "chi_c_positive": regime is Regime.SPREAD_OUT,
        "chi_c_has_minimiser": regime is Regime.SPREAD_OUT,
        "chi_d_Zd_positive": d > 1,
        "growing_box_scale": "gamma_t" if regime is Regime.SPREAD_OUT else "t^(eta/(eta+1))",
    }


@dataclass(frozen=True)
class RegimeClassification:
    regime: Regime
    eta: float
    d: int
    d1_caveat: bool
    facts: Dict[str, object] = field(default_factory=dict)


def classify_regime(eta: float, d: int) -> RegimeClassification:
    """spread-out iff η > d/2, critical iff η = d/2, confined iff η < d/2.

    In d = 1 the spread-out results are stated for η ≥ 1; smaller η > 1/2 is
    flagged with ``d1_caveat``.
    """
    _check_positive(eta=eta)
    if d < 1:
        raise DomainError(f"d must be at least 1, got {d}")
    half = d / 2.0
    if abs(eta - half) <= _CRITICAL_TOL * max(1.0, half):
        regime = Regime.CRITICAL
    elif eta > half:
        regime = Regime.SPREAD_OUT
    else:
        regime = Regime.CONFINED
    caveat = d == 1 and regime is Regime.SPREAD_OUT and eta < 1.0
    return RegimeClassification(regime, float(eta), int(d), caveat, regime_facts(regime, d))


class ScalingParams(BaseModel):
    """Parameters of a growing-box experiment with the derived scales."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(..., gt=0)
    D: float = Field(..., gt=0)
    d: int = Field(..., ge=1)
    t: float = Field(..., gt=0, description="Time horizon")
    alpha: float = Field(..., gt=0, description="Spatial scale α_t")
    s: Optional[float] = Field(default=None, description="Lifshitz exponent parameter")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def beta(self) -> float:
        return (self.t / self.alpha ** (self.d + 2)) ** (1.0 / (1.0 + self.eta))

    @computed_field  # type: ignore[prop-decorator]
    @property
    def gamma(self) -> float:
        return self.t / (self.alpha**2 * self.beta)

    @property
    def K(self) -> float:
        return (1.0 + 1.0 / self.eta) * (self.D * self.eta) ** (1.0 / (1.0 + self.eta))

    @property
    def regime(self) -> Regime:
        return classify_regime(self.eta, self.d).regime

    def window(self, threshold: float = DEFAULT_WINDOW_THRESHOLD) -> "WindowDiagnostics":
        return admissible_alpha(self.t, self.alpha, self.eta, self.d, threshold=threshold)


@dataclass(frozen=True)
class WindowDiagnostics:
    """Ratios measuring how deep (t, α) sits inside the admissible window.

    Attributes:
        regime: Regime the window refers to.
        upper_ratio: α^{d+2}(log t)^{(1+η)/η}/t (spread-out) or α/t^{η/(d(η+1))}.
        lower_ratio: 1/α, for 1 ≪ α.
        threshold: Pass threshold for both ratios.
    """

    regime: Regime
    upper_ratio: float
    lower_ratio: float
    threshold: float

    @property
    def upper_ok(self) -> bool:
        return self.upper_ratio <= self.threshold

    @property
    def lower_ok(self) -> bool:
        return self.lower_ratio <= self.threshold

    @property
    def passed(self) -> bool:
        return self.upper_ok and self.lower_ok


def admissible_alpha(
    t: float,
    alpha: float,
    eta: float,
    d: int,
    regime: Optional[Regime] = None,
    threshold: float = DEFAULT_WINDOW_THRESHOLD,
) -> WindowDiagnostics:
    """Window ratios for 1 ≪ α^{d+2} ≪ t(log t)^{−(1+η)/η} or 1 ≪ α ≪ t^{η/(d(η+1))}."""
    _check_positive(t=t, alpha=alpha, eta=eta)
    regime = regime or classify_regime(eta, d).regime
    if regime is Regime.SPREAD_OUT:
        if t <= 1:
            raise DomainError(f"t must exceed 1 for the logarithmic window, got {t}")
        upper = alpha ** (d + 2) * math.log(t) ** ((1.0 + eta) / eta) / t
    else:
        upper = alpha / t ** (eta / (d * (eta + 1.0)))
    return WindowDiagnostics(regime, float(upper), 1.0 / alpha, float(threshold))


@dataclass(frozen=True)
class NonExitPrediction:
    """Leading-order log non-exit probability, lower ≤ upper (equal for point predictions).

    Attributes:
        regime: Regime used.
        scale: γ_t (spread-out) or t^{η/(η+1)}.
        lower: Lower log-probability rate.
        upper: Upper log-probability rate.
    """

    regime: Regime
    scale: float
    lower: float
    upper: float

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper


def nonexit_predictor(
    params: ScalingParams,
    chi_c: Optional[float] = None,
    chi_d_box: Optional[float] = None,
    chi_d_Zd: Optional[float] = None,
) -> NonExitPrediction:
    """Predicted log P(walk stays in B_t up to t).

    Spread-out: −γ_t K χ^c(G). Confined: the bracket
    [−Kχ^d(B)·t^{η/(η+1)}, −Kχ^d(Z^d)·t^{η/(η+1)}]. Critical: both ends equal
    −Kχ^d(Z^d)·t^{η/(η+1)}, independent of α.

    Raises:
        RegimeMismatchError: If the χ inputs do not match the regime.
    """
    regime = params.regime
    K = params.K
    if regime is Regime.SPREAD_OUT:
        if chi_c is None or chi_d_Zd is not None:
            raise RegimeMismatchError(
                "spread-out regime needs chi_c (and no chi_d(Z^d))",
                hint="Solve chi-c for eta > d/2 and pass its extrapolated value.",
            )
        value = -params.gamma * K * chi_c
        return NonExitPrediction(regime, params.gamma, value, value)

    if chi_c is not None:
        raise RegimeMismatchError(
            f"chi_c vanishes in the {regime.value} regime; pass chi_d values instead"
        )
    scale = params.t ** (params.eta / (params.eta + 1.0))
    if regime is Regime.CRITICAL:
        if chi_d_Zd is None:
            raise RegimeMismatchError("critical regime needs chi_d(Z^d)")
        value = -K * chi_d_Zd * scale
        return NonExitPrediction(regime, scale, value, value)
    if chi_d_box is None or chi_d_Zd is None:
        raise RegimeMismatchError("confined regime needs chi_d(B) and chi_d(Z^d)")
    return NonExitPrediction(regime, scale, -K * chi_d_box * scale, -K * chi_d_Zd * scale)


def lifshitz_s_interval(eta: float, d: int) -> Tuple[float, float]:
    """Admissible s ∈ (0, |d − 2η|/(d + 2))."""
    return 0.0, abs(d - 2.0 * eta) / (d + 2.0)


def lifshitz_alpha(t: float, s: float, d: int, eta: float) -> float:
    """α_t = t^{s/|d−2η|} for the growing-box Lifshitz tail."""
    _check_positive(t=t)
    if d == 2 * eta:
        raise DomainError("lifshitz_alpha is undefined at eta = d/2")
    return t ** (s / abs(d - 2.0 * eta))


@dataclass(frozen=True)
class LifshitzPrediction:
    """log Pr(λ ≤ ε^{1−s}) ≈ constant·ε^{−exponent}."""

    exponent: float
    constant: float
    s: float


def lifshitz_predictor(eta: float, D: float, s: float, chi_c: float, d: int) -> LifshitzPrediction:
    """Exponent η + s and constant −(χ^c/η)^{η+1}(1−s)^{1−s}(η+s)^{η+s}.

    Raises:
        RegimeMismatchError: If η ≤ d/2.
        DomainError: If s lies outside (0, |d−2η|/(d+2)) or chi_c is not positive.
    """
    _check_positive(eta=eta, D=D, chi_c=chi_c)
    if classify_regime(eta, d).regime is not Regime.SPREAD_OUT:
        raise RegimeMismatchError(f"the growing-box Lifshitz tail needs eta > d/2, got eta={eta}, d={d}")
    lo, hi = lifshitz_s_interval(eta, d)
    if not lo < s < hi:
        raise DomainError(f"s must lie in ({lo}, {hi:.6g}), got {s}")
    constant = -((chi_c / eta) ** (eta + 1.0)) * (1.0 - s) ** (1.0 - s) * (eta + s) ** (eta + s)
    return LifshitzPrediction(exponent=eta + s, constant=constant, s=s)
