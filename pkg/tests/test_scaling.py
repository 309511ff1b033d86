"""Tests for scale algebra, regime classification and predictors."""

import math

import pytest

from rwrc_lab.exceptions import DomainError, RegimeMismatchError
from rwrc_lab.scaling import (
    Regime,
    ScalingParams,
    admissible_alpha,
    beta,
    classify_regime,
    gamma,
    gamma_forms,
    lifshitz_alpha,
    lifshitz_predictor,
    lifshitz_s_interval,
    nonexit_predictor,
)


class TestScales:
    """Test β_t and γ_t."""

    def test_gamma_forms_agree(self) -> None:
        """The three closed forms of γ_t coincide."""
        forms = gamma_forms(1e6, 3.0, 2.0, 1)
        assert forms[1] == pytest.approx(forms[0], rel=1e-12)
        assert forms[2] == pytest.approx(forms[0], rel=1e-12)
        assert gamma(1e6, 3.0, 2.0, 1) == pytest.approx(forms[0])

    def test_beta_value(self) -> None:
        """β_t = (t/α^{d+2})^{1/(1+η)}."""
        assert beta(1e4, 2.0, 1.0, 2) == pytest.approx((1e4 / 16.0) ** 0.5)

    def test_beta_warning(self, capsys) -> None:
        """β ≤ 1 is logged."""
        beta(1.0, 10.0, 1.0, 1)
        assert "beta_outside_asymptotic_window" in capsys.readouterr().out

    def test_non_positive_inputs(self) -> None:
        """t, α and η must be positive."""
        with pytest.raises(DomainError):
            beta(0.0, 1.0, 1.0, 1)
        with pytest.raises(DomainError):
            gamma(1.0, -1.0, 1.0, 1)


class TestClassifyRegime:
    """Test regime classification."""

    @pytest.mark.parametrize(
        "eta,d,regime",
        [
            (1.0, 1, Regime.SPREAD_OUT),
            (0.5, 1, Regime.CRITICAL),
            (0.25, 1, Regime.CONFINED),
            (1.0, 2, Regime.CRITICAL),
            (2.0, 3, Regime.SPREAD_OUT),
            (1.0, 3, Regime.CONFINED),
        ],
    )
    def test_regimes(self, eta: float, d: int, regime: Regime) -> None:
        """η against d/2 decides the regime."""
        assert classify_regime(eta, d).regime is regime

    def test_d1_caveat(self) -> None:
        """1/2 < η < 1 in d = 1 carries the caveat."""
        assert classify_regime(0.75, 1).d1_caveat
        assert not classify_regime(1.5, 1).d1_caveat

    def test_facts(self) -> None:
        """χ^c is positive only in the spread-out regime; χ^d(Z^d) only for d > 1."""
        spread = classify_regime(2.0, 2).facts
        confined = classify_regime(0.2, 1).facts
        assert spread["chi_c_positive"] and spread["chi_d_Zd_positive"]
        assert not confined["chi_c_positive"] and not confined["chi_d_Zd_positive"]

    def test_invalid(self) -> None:
        """η ≤ 0 or d < 1 are rejected."""
        with pytest.raises(DomainError):
            classify_regime(0.0, 1)
        with pytest.raises(DomainError):
            classify_regime(1.0, 0)


class TestScalingParams:
    """Test the parameter model."""

    def test_derived_scales(self) -> None:
        """Computed β, γ and K match the functions."""
        params = ScalingParams(eta=2.0, D=0.5, d=1, t=1e6, alpha=3.0)
        assert params.beta == pytest.approx(beta(1e6, 3.0, 2.0, 1))
        assert params.gamma == pytest.approx(gamma(1e6, 3.0, 2.0, 1))
        assert params.K == pytest.approx(1.5 * 1.0 ** (1 / 3))
        assert params.regime is Regime.SPREAD_OUT

    def test_window(self) -> None:
        """Deep inside the spread-out window both ratios pass."""
        inside = admissible_alpha(1e8, 20.0, 2.0, 1)
        outside = admissible_alpha(1e8, 2.0, 2.0, 1)
        assert inside.passed
        assert not outside.lower_ok
        assert outside.upper_ok
        expected = 20.0**3 * math.log(1e8) ** 1.5 / 1e8
        assert inside.upper_ratio == pytest.approx(expected)

    def test_confined_window(self) -> None:
        """The confined window compares α with t^{η/(d(η+1))}."""
        window = ScalingParams(eta=0.25, D=1.0, d=1, t=1e10, alpha=10.0).window()
        assert window.regime is Regime.CONFINED
        assert window.upper_ratio == pytest.approx(10.0 / 1e10**0.2)

    def test_window_needs_large_t(self) -> None:
        """The logarithmic window needs t > 1."""
        with pytest.raises(DomainError):
            admissible_alpha(0.5, 2.0, 2.0, 1)


class TestNonExitPredictor:
    """Test leading-order non-exit predictors."""

    def test_spread_out(self) -> None:
        """Spread-out: -γ_t K χ^c."""
        params = ScalingParams(eta=2.0, D=1.0, d=1, t=1e6, alpha=4.0)
        prediction = nonexit_predictor(params, chi_c=3.0)
        assert prediction.is_point
        assert prediction.lower == pytest.approx(-params.gamma * params.K * 3.0)
        assert prediction.scale == pytest.approx(params.gamma)

    def test_spread_out_mismatch(self) -> None:
        """Spread-out without χ^c, or with χ^d(Z^d), raises."""
        params = ScalingParams(eta=2.0, D=1.0, d=1, t=1e6, alpha=4.0)
        with pytest.raises(RegimeMismatchError):
            nonexit_predictor(params)
        with pytest.raises(RegimeMismatchError):
            nonexit_predictor(params, chi_c=1.0, chi_d_Zd=1.0)

    def test_confined_bracket(self) -> None:
        """Confined: χ^d(B) ≥ χ^d(Z^d) gives lower ≤ upper."""
        params = ScalingParams(eta=0.5, D=1.0, d=2, t=1e4, alpha=5.0)
        prediction = nonexit_predictor(params, chi_d_box=1.2, chi_d_Zd=0.9)
        scale = 1e4 ** (1 / 3)
        assert prediction.lower == pytest.approx(-params.K * 1.2 * scale)
        assert prediction.upper == pytest.approx(-params.K * 0.9 * scale)
        assert prediction.lower <= prediction.upper

    def test_confined_mismatch(self) -> None:
        """χ^c is rejected outside the spread-out regime."""
        params = ScalingParams(eta=0.5, D=1.0, d=2, t=1e4, alpha=5.0)
        with pytest.raises(RegimeMismatchError):
            nonexit_predictor(params, chi_c=1.0)
        with pytest.raises(RegimeMismatchError):
            nonexit_predictor(params, chi_d_box=1.0)

    def test_critical_independent_of_alpha(self) -> None:
        """Critical: the point prediction does not depend on α."""
        first = nonexit_predictor(ScalingParams(eta=1.0, D=1.0, d=2, t=1e4, alpha=3.0), chi_d_Zd=0.7)
        second = nonexit_predictor(ScalingParams(eta=1.0, D=1.0, d=2, t=1e4, alpha=9.0), chi_d_Zd=0.7)
        assert first.is_point
        assert first.lower == pytest.approx(second.lower)


class TestLifshitzScales:
    """Test growing-box Lifshitz helpers."""

    def test_s_interval(self) -> None:
        """s ranges over (0, |d - 2η|/(d + 2))."""
        assert lifshitz_s_interval(2.0, 1) == (0.0, pytest.approx(1.0))

    def test_alpha(self) -> None:
        """α_t = t^{s/|d - 2η|}."""
        assert lifshitz_alpha(16.0, 0.5, 1, 2.0) == pytest.approx(16.0 ** (0.5 / 3.0))
        with pytest.raises(DomainError):
            lifshitz_alpha(16.0, 0.5, 2, 1.0)

    def test_predictor(self) -> None:
        """Exponent η + s and the closed-form constant."""
        prediction = lifshitz_predictor(2.0, 1.0, 0.25, 3.0, 1)
        assert prediction.exponent == pytest.approx(2.25)
        expected = -(1.5**3) * 0.75**0.75 * 2.25**2.25
        assert prediction.constant == pytest.approx(expected)

    def test_predictor_invalid(self) -> None:
        """s outside the interval or η ≤ d/2 are rejected."""
        with pytest.raises(DomainError):
            lifshitz_predictor(2.0, 1.0, 1.5, 3.0, 1)
        with pytest.raises(RegimeMismatchError):
            lifshitz_predictor(0.5, 1.0, 0.1, 3.0, 2)
