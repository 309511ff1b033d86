"""Tests for Kuhn interpolation and quenched spectral homogenisation."""

import math

import numpy as np
import pytest

from rwrc_lab.conductance import ConstantModel, EllipticModel, constant_field, sample_field
from rwrc_lab.exceptions import DomainError, InsufficientDataError
from rwrc_lab.homogenise import (
    continuum_eigenvalues,
    ellipticity_bracket,
    energy_match_check,
    estimate_c_eff,
    extrapolate,
    extrapolate_with_error,
    interpolation_residual,
    kuhn_interpolate,
    quenched_rate,
    spectral_convergence_experiment,
)
from rwrc_lab.lattice import build_box
from rwrc_lab.utils.streams import stream
from rwrc_lab.varprob import GridFunction


def sine_mode(k: int):
    def f(y: np.ndarray) -> np.ndarray:
        return math.sqrt(2.0) * np.sin(k * math.pi * y[:, 0])

    return f


class TestKuhnInterpolation:
    """Test the piecewise-linear interpolant."""

    def test_site_values(self, path_box) -> None:
        """f(z/α) = α^{d/2} v(z)."""
        v = np.arange(1.0, 6.0)
        f = kuhn_interpolate(v, path_box)
        assert f(np.array([0.5])) == pytest.approx(math.sqrt(6.0) * 3.0)

    def test_linear_between_sites(self, path_box) -> None:
        """Midpoints average neighbouring values; the gradient is the scaled difference."""
        v = np.array([1.0, 4.0, 2.0, 0.5, 3.0])
        f = kuhn_interpolate(v, path_box)
        y = np.array([3.5 / 6.0])
        assert f(y) == pytest.approx(math.sqrt(6.0) * 0.5 * (2.0 + 0.5))
        assert f.gradient(y)[0] == pytest.approx(6.0**1.5 * (0.5 - 2.0))

    def test_zero_outside(self, path_box) -> None:
        """The interpolant vanishes off the covered cells."""
        f = kuhn_interpolate(np.ones(5), path_box)
        assert f(np.array([1.5])) == 0.0

    def test_wrong_length(self, path_box) -> None:
        """v must match the box."""
        with pytest.raises(DomainError):
            kuhn_interpolate(np.ones(4), path_box)

    def test_two_dimensional_vertices(self, square_box) -> None:
        """In d = 2 the interpolant reproduces site values and is continuous at cell corners."""
        v = stream(3, 1).random(square_box.size)
        f = kuhn_interpolate(v, square_box)
        values = f(square_box.sites.astype(float))
        np.testing.assert_allclose(values, v, rtol=1e-12)


class TestEnergyMatch:
    """Test the discrete/continuum energy identity."""

    def test_constant_profile_d1(self, path_box) -> None:
        """Discrete, continuum and simplex energies agree in d = 1."""
        v = stream(0, 1).standard_normal(path_box.size)
        match = energy_match_check(v, 1.0, path_box)
        assert match.residual < 1e-12
        assert match.kuhn == pytest.approx(match.discrete, rel=1e-12)

    def test_varying_profile_d2(self, square_box) -> None:
        """A non-constant profile in d = 2 still matches exactly."""
        v = stream(0, 2).standard_normal(square_box.size)

        def phi(y: np.ndarray, i: int) -> np.ndarray:
            return 1.0 + 0.3 * y[:, 0] + 0.1 * i * y[:, 1] ** 2

        match = energy_match_check(v, phi, square_box)
        assert match.residual < 1e-12
        assert match.kuhn is not None


class TestInterpolationResidual:
    """Test the interpolation correction bound."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_bound_holds(self, square_box, tail_model, seed: int) -> None:
        """‖correction‖² ≤ m^{-1}·Σ a (Δv)² in d = 2."""
        env = sample_field(square_box, tail_model, seed)
        v = stream(seed, 3).standard_normal(square_box.size)
        result = interpolation_residual(v, env)
        assert result.holds
        assert result.lhs > 0

    def test_bound_d1(self, path_box) -> None:
        """The bound holds in d = 1 for a constant field."""
        result = interpolation_residual(np.arange(5.0), constant_field(path_box))
        assert result.holds
        assert result.relative > 0

    def test_m_above_floor(self, path_box) -> None:
        """m larger than the smallest conductance is rejected."""
        with pytest.raises(DomainError):
            interpolation_residual(np.ones(5), constant_field(path_box), m=2.0)


class TestExtrapolate:
    """Test the 1/α extrapolation."""

    def test_linear_exact(self) -> None:
        """Two sizes recover c0 from c0 + c1/α."""
        assert extrapolate([10.0, 20.0], [3.0 + 2.0 / 10, 3.0 + 2.0 / 20]) == pytest.approx(3.0)

    def test_quadratic_exact(self) -> None:
        """Three sizes recover c0 from c0 + c1/α + c2/α²."""
        sizes = [4.0, 8.0, 16.0]
        values = [1.0 - 3.0 / a + 5.0 / a**2 for a in sizes]
        assert extrapolate(sizes, values) == pytest.approx(1.0)

    def test_single_size(self) -> None:
        """One size returns its value."""
        assert extrapolate([8.0], [2.5]) == 2.5

    def test_empty(self) -> None:
        """No sizes raise InsufficientDataError."""
        with pytest.raises(InsufficientDataError):
            extrapolate([], [])

    def test_error_two_sizes(self) -> None:
        """Unequal errors propagate as (x2²σ1² + x1²σ2²)/(x2 − x1)²."""
        sizes, sigma = [10.0, 20.0], [0.3, 0.1]
        x1, x2 = 1 / sizes[0], 1 / sizes[1]
        limit, se = extrapolate_with_error(sizes, [3.2, 3.1], sigma)
        assert limit == pytest.approx(3.0)
        expected = math.sqrt(x2**2 * sigma[0] ** 2 + x1**2 * sigma[1] ** 2) / (x1 - x2)
        assert se == pytest.approx(expected)
        assert se != pytest.approx(sigma[-1])

    def test_noisy_size_downweighted(self) -> None:
        """A size with a large error barely moves the weighted limit."""
        sizes = [8.0, 16.0, 32.0, 64.0]
        values = [1.0 + 2.0 / a for a in sizes]
        values[0] += 0.5
        limit, se = extrapolate_with_error(sizes, values, [10.0, 1e-3, 1e-3, 1e-3])
        assert limit == pytest.approx(1.0, abs=1e-3)
        assert 0 < se < 0.1

    def test_exact_values(self) -> None:
        """Zero errors give a zero standard error."""
        assert extrapolate_with_error([8.0, 16.0], [1.0, 1.0], [0.0, 0.0]) == (pytest.approx(1.0), 0.0)

    def test_error_single_size(self) -> None:
        """One size returns its value and error."""
        assert extrapolate_with_error([8.0], [2.5], [0.2]) == (2.5, pytest.approx(0.2))

    def test_error_mismatched_lengths(self) -> None:
        """Lengths must agree and errors be non-negative."""
        with pytest.raises(DomainError):
            extrapolate_with_error([8.0, 16.0], [1.0, 1.0], [0.1])
        with pytest.raises(DomainError):
            extrapolate_with_error([8.0, 16.0], [1.0, 1.0], [0.1, -0.1])


class TestContinuumEigenvalues:
    """Test eigenvalues of the homogenised operator."""

    def test_closed_form_d1(self) -> None:
        """c_eff = 2, V = 0: π², 4π², 9π²."""
        np.testing.assert_allclose(continuum_eigenvalues(2.0, None, 1, 3), [math.pi**2 * k for k in (1, 4, 9)])

    def test_closed_form_d2(self) -> None:
        """The square has a degenerate second level."""
        values = continuum_eigenvalues(1.0, 2.0, 2, 3)
        np.testing.assert_allclose(values, [0.5 * math.pi**2 * k + 2.0 for k in (2, 5, 5)])

    def test_lattice_path(self) -> None:
        """A callable potential is solved on a fine lattice."""
        values = continuum_eigenvalues(2.0, lambda y: np.full(y.shape[0], 1.0), 1, 1)
        assert values[0] == pytest.approx(math.pi**2 + 1.0, rel=1e-4)

    def test_invalid_c_eff(self) -> None:
        """c_eff must be positive."""
        with pytest.raises(DomainError):
            continuum_eigenvalues(0.0, None, 1, 1)


class TestCEff:
    """Test effective conductivity estimates."""

    def test_constant_law(self) -> None:
        """a ≡ c gives c_eff = 2c exactly."""
        estimate = estimate_c_eff(ConstantModel(value=0.5), 1, [8.0, 16.0], n_env=2, seed=0)
        assert estimate.c_eff == pytest.approx(1.0, rel=1e-9)
        assert estimate.oracle == pytest.approx(1.0)
        np.testing.assert_allclose(estimate.ratios, 0.5, rtol=1e-9)

    def test_no_sizes(self) -> None:
        """An empty size list is rejected."""
        with pytest.raises(InsufficientDataError):
            estimate_c_eff(ConstantModel(), 1, [], n_env=1, seed=0)

    def test_interval_uses_fitted_error(self, elliptic_model) -> None:
        """The interval is 2·(limit ± 1.96·se) with se from the weighted fit."""
        estimate = estimate_c_eff(elliptic_model, 1, [8.0, 16.0], n_env=6, seed=2)
        assert len(estimate.stderrs) == 2
        assert all(s > 0 for s in estimate.stderrs)
        _, se = extrapolate_with_error(estimate.sizes, estimate.ratios, estimate.stderrs)
        assert estimate.stderr == pytest.approx(se)
        assert estimate.ci_high - estimate.ci_low == pytest.approx(4 * 1.959963984540054 * se)
        assert estimate.ci_low < estimate.c_eff < estimate.ci_high

    @pytest.mark.slow
    def test_harmonic_mean_d1(self) -> None:
        """In d = 1 the estimate approaches twice the harmonic mean."""
        model = EllipticModel(lam=0.5)
        estimate = estimate_c_eff(model, 1, [32.0, 64.0, 128.0], n_env=16, seed=4)
        assert estimate.c_eff == pytest.approx(estimate.oracle, rel=0.1)

    @pytest.mark.slow
    def test_two_point_law_oracle(self) -> None:
        """a ∈ {1/2, 3/2} equiprobable: within 2% of 2·H = 1.5 at α = 512 with 32 environments."""
        model = EllipticModel(lam=0.5, law="discrete", values=[0.5, 1.5])
        estimate = estimate_c_eff(model, 1, [512.0], n_env=32, seed=12)
        assert estimate.oracle == pytest.approx(1.5)
        assert estimate.c_eff == pytest.approx(1.5, rel=0.02)


class TestSpectralConvergence:
    """Test the full homogenisation experiment."""

    def test_unit_conductances(self) -> None:
        """a ≡ 1 reproduces the lattice eigenvalues, c_eff = 2 and approaches the reference eigenfunction."""
        result = spectral_convergence_experiment(ConstantModel(), None, 2, [8.0, 16.0], n_env=2, seed=1)
        expected = [a**2 * 2 * (1 - math.cos(math.pi / a)) for a in (8.0, 16.0)]
        np.testing.assert_allclose([row[0] for row in result.eigenvalues], expected, rtol=1e-8)
        assert result.c_eff.c_eff == pytest.approx(2.0, rel=1e-9)
        np.testing.assert_allclose(result.continuum, [math.pi**2, 4 * math.pi**2], rtol=1e-9)
        assert result.distances is not None
        assert result.distances[1] < result.distances[0] < 0.5
        assert result.origin_positive
        assert len(result.gaps) == 2

    def test_unit_distances_decrease(self) -> None:
        """For a ≡ 1 the distance to √2 sin(πx) decreases like 1/α over α ∈ {32, 64, 128}."""
        result = spectral_convergence_experiment(ConstantModel(), None, 1, [32.0, 64.0, 128.0], n_env=1, seed=0)
        distances = result.distances
        assert distances is not None
        assert all(b < a for a, b in zip(distances, distances[1:]))
        assert distances[-1] < 0.35 * distances[0]

    @pytest.mark.slow
    def test_random_distances_decrease(self) -> None:
        """For a two-point elliptic law the mean distance decreases over α ∈ {32, 64, 128}."""
        model = EllipticModel(lam=0.5, law="discrete", values=[0.5, 1.5])
        result = spectral_convergence_experiment(model, None, 1, [32.0, 64.0, 128.0], n_env=16, seed=3)
        distances = result.distances
        assert distances is not None
        assert all(b < a for a, b in zip(distances, distances[1:]))
        assert result.origin_positive

    def test_callable_potential_has_no_distances(self) -> None:
        """Distances are reported only for constant potentials."""
        result = spectral_convergence_experiment(
            ConstantModel(), lambda y: y[:, 0], 1, [8.0], n_env=1, seed=0
        )
        assert result.distances is None
        assert result.gaps == []

    def test_no_sizes(self) -> None:
        """An empty size list is rejected."""
        with pytest.raises(InsufficientDataError):
            spectral_convergence_experiment(ConstantModel(), None, 1, [], n_env=1, seed=0)


class TestQuenchedRate:
    """Test the quenched rate functional."""

    def test_zero_at_grid_minimiser(self) -> None:
        """The discrete principal mode has rate zero."""
        f = GridFunction.from_callable(sine_mode(1), [(0.0, 1.0)], 0.01)
        assert abs(quenched_rate(f, 2.0)) < 1e-6

    def test_second_mode(self) -> None:
        """The second mode costs about c_eff·3π²."""
        f = GridFunction.from_callable(sine_mode(2), [(0.0, 1.0)], 0.01)
        assert quenched_rate(f, 2.0) == pytest.approx(2.0 * 3 * math.pi**2, rel=2e-3)

    def test_requires_normalisation(self) -> None:
        """Unnormalised f and non-positive c_eff are rejected."""
        f = GridFunction.from_callable(lambda y: 2.0 * np.sin(math.pi * y[:, 0]), [(0.0, 1.0)], 0.01)
        with pytest.raises(DomainError):
            quenched_rate(f, 2.0)
        g = GridFunction.from_callable(sine_mode(1), [(0.0, 1.0)], 0.01)
        with pytest.raises(DomainError):
            quenched_rate(g, 0.0)


class TestEllipticityBracket:
    """Test the ellipticity comparison."""

    def test_holds_for_elliptic_field(self, square_box, elliptic_model) -> None:
        """λ λ^{a≡1} ≤ λ^a ≤ λ^{-1} λ^{a≡1}."""
        for seed in range(3):
            bracket = ellipticity_bracket(sample_field(square_box, elliptic_model, seed), None, 0.5)
            assert bracket.holds

    def test_tight_for_unit_field(self, path_box) -> None:
        """With λ = 1 and a ≡ 1 all three coincide."""
        bracket = ellipticity_bracket(constant_field(path_box), path_box, 1.0)
        assert bracket.lower == pytest.approx(bracket.value)
        assert bracket.upper == pytest.approx(bracket.value)

    def test_invalid_lambda(self, path_box) -> None:
        """λ must lie in (0, 1]."""
        with pytest.raises(DomainError):
            ellipticity_bracket(constant_field(path_box), None, 1.5)
