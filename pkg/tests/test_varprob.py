"""Tests for p-energies, χ^d and χ^c solvers, profiles, witnesses and Sobolev checks."""

import math

import numpy as np
import pytest

from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import build_box, centred_cube
from rwrc_lab.varprob import (
    ChiConfig,
    GridFunction,
    RegimeParams,
    aitken,
    chi_d_sequence,
    cutoff,
    cutoff_convergence,
    discrete_sobolev_check,
    discretise_profile,
    eta_from_p,
    exact_witness_exponent,
    optimal_profile,
    p_energy,
    pointwise_cost,
    printed_witness_exponent,
    profile_from_gradient,
    rate_I_c_phi,
    rate_J_c,
    rate_J_d,
    solve_chi_c,
    solve_chi_d,
    transfer,
    witness_d1,
    witness_dge2,
)


def sine(y: np.ndarray) -> np.ndarray:
    return math.sqrt(2.0) * np.sin(math.pi * y[:, 0])


class TestRegimeParams:
    """Test derived tail exponents."""

    def test_p_and_K(self) -> None:
        """η = 1, D = 1 gives p = 1 and K = 2."""
        params = RegimeParams(eta=1.0, D=1.0)
        assert params.p == pytest.approx(1.0)
        assert params.K == pytest.approx(2.0)

    def test_eta_from_p(self) -> None:
        """eta_from_p inverts p = 2η/(1+η)."""
        assert eta_from_p(RegimeParams(eta=3.0, D=1.0).p) == pytest.approx(3.0)


class TestEnergies:
    """Test discrete and continuum energies."""

    def test_single_site(self) -> None:
        """A unit spike has energy 2d."""
        assert p_energy(np.ones(1), 1.3) == pytest.approx(2.0)
        assert p_energy(np.ones((1, 1)), 0.7) == pytest.approx(4.0)

    def test_boxed_vector(self, square_box) -> None:
        """Flat vectors are reshaped to the box grid."""
        g = np.ones(square_box.size)
        # boundary edges only: 2·(4 + 3)
        assert p_energy(g, 2.0, square_box) == pytest.approx(14.0)
        with pytest.raises(DomainError):
            p_energy(np.ones(3), 2.0, square_box)

    def test_invalid_p(self) -> None:
        """p must be positive."""
        with pytest.raises(DomainError):
            p_energy(np.ones(2), 0.0)

    def test_rate_J_d(self) -> None:
        """J^d = K·energy."""
        params = RegimeParams(eta=2.0, D=0.5)
        g = np.array([0.6, 0.8])
        assert rate_J_d(g, params) == pytest.approx(params.K * p_energy(g, params.p))

    def test_grid_function_norm(self) -> None:
        """√2 sin(πx) is L²-normalised on (0, 1)."""
        f = GridFunction.from_callable(sine, [(0.0, 1.0)], 0.01)
        assert f.l2_norm() == pytest.approx(1.0, rel=1e-6)
        assert f.d == 1

    def test_rate_I_c_phi(self) -> None:
        """∫ (f')² = π² for the unit sine mode."""
        f = GridFunction.from_callable(sine, [(0.0, 1.0)], 0.01)
        assert rate_I_c_phi(f, 1.0) == pytest.approx(math.pi**2, rel=1e-3)
        assert rate_I_c_phi(f, 2.0) == pytest.approx(2.0 * rate_I_c_phi(f, 1.0))

    def test_rate_J_c_total_variation(self) -> None:
        """At p = 1 the energy is the total variation 2√2."""
        f = GridFunction.from_callable(sine, [(0.0, 1.0)], 0.01)
        params = RegimeParams(eta=1.0, D=1.0)
        assert rate_J_c(f, params) == pytest.approx(params.K * 2.0 * math.sqrt(2.0), rel=1e-9)

    def test_grid_without_nodes(self) -> None:
        """A spacing leaving no interior node is rejected."""
        with pytest.raises(DomainError):
            GridFunction.from_callable(sine, [(0.0, 1.0)], 0.6)


class TestSolveChiD:
    """Test the discrete variational solver."""

    def test_p2_is_principal_eigenvalue(self, path_box) -> None:
        """At p = 2, χ^d is the Dirichlet eigenvalue 2(1 - cos(π/6))."""
        result = solve_chi_d(path_box, 2.0)
        assert result.value == pytest.approx(2 * (1 - math.cos(math.pi / 6)), rel=1e-9)
        assert np.linalg.norm(result.minimizer) == pytest.approx(1.0)

    def test_p1_flat_minimiser(self, path_box) -> None:
        """At p = 1 on a path the flat vector attains 2/√n."""
        result = solve_chi_d(path_box, 1.0, ChiConfig(restarts=2, max_iter=200))
        assert result.value == pytest.approx(2.0 / math.sqrt(5.0), rel=1e-9)
        assert result.restarts == 2
        assert len(result.restart_values) == 2

    def test_value_is_exact_energy(self, square_box) -> None:
        """The reported value is the energy of the reported minimiser."""
        result = solve_chi_d(square_box, 0.8, ChiConfig(restarts=3, max_iter=300, smoothing_levels=4))
        assert result.value == pytest.approx(p_energy(result.minimizer, 0.8, square_box), rel=1e-12)
        assert result.value == pytest.approx(min(result.restart_values), rel=1e-9)
        assert result.spread >= 0

    def test_singleton(self) -> None:
        """One site: χ^d = 2d for every p."""
        result = solve_chi_d(centred_cube(3, 0), 0.5)
        assert result.value == 6.0

    def test_invalid_p(self, path_box) -> None:
        """p outside (0, 2] is rejected."""
        with pytest.raises(DomainError):
            solve_chi_d(path_box, 2.5)

    def test_deterministic(self, square_box) -> None:
        """Same configuration gives the same result."""
        config = ChiConfig(restarts=3, max_iter=100, smoothing_levels=3, seed=5)
        first = solve_chi_d(square_box, 1.2, config)
        second = solve_chi_d(square_box, 1.2, config)
        assert first.value == second.value
        np.testing.assert_array_equal(first.minimizer, second.minimizer)

    def test_converged_means_stationary(self) -> None:
        """A converged result at p = 1.5 has its residual below a tight tol."""
        tol = 1e-13
        result = solve_chi_d(centred_cube(2, 2), 1.5, ChiConfig(restarts=2, max_iter=400, tol=tol))
        if result.converged:
            assert result.residual <= tol * max(1.0, result.value) * (1 + 1e-9)
        else:
            assert result.residual > 0

    def test_iteration_cap_not_converged(self, square_box, capsys) -> None:
        """Hitting max_iter reports converged=False and logs a warning."""
        config = ChiConfig(restarts=1, max_iter=1, smoothing_levels=1, tol=1e-12)
        result = solve_chi_d(square_box, 1.5, config)
        assert result.converged is False
        assert result.residual > 1e-12
        assert "chi_d_not_converged" in capsys.readouterr().out

    def test_sequence_non_increasing(self) -> None:
        """Growing nested boxes give non-increasing values."""
        boxes = [centred_cube(1, n) for n in (1, 2, 3)]
        config = ChiConfig(restarts=2, max_iter=200, smoothing_levels=3)
        values = [r.value for r in chi_d_sequence(boxes, 1.5, config)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(values, values[1:]))

    def test_transfer(self) -> None:
        """Vectors are zero-extended by coordinates."""
        small, large = centred_cube(1, 0), centred_cube(1, 1)
        np.testing.assert_array_equal(transfer(np.array([2.0]), small, large), [0.0, 2.0, 0.0])
        np.testing.assert_array_equal(transfer(np.array([1.0, 2.0, 3.0]), large, small), [2.0])


class TestOptimalProfile:
    """Test the pointwise optimal conductance profile."""

    def test_identity_residual(self) -> None:
        """Uncapped cells satisfy φ(∂f)² + Dφ^{-η} = K|∂f|^p."""
        f = GridFunction.from_callable(sine, [(0.0, 1.0)], 0.02)
        result = optimal_profile(f, RegimeParams(eta=1.5, D=0.5))
        assert result.residual < 1e-9

    def test_profile_minimises_cost(self) -> None:
        """The profile beats every other value of r."""
        params = RegimeParams(eta=2.0, D=0.7)
        gradient = np.array([0.3])
        best = profile_from_gradient(gradient, params, cap=100.0)
        grid = np.linspace(0.05, 10.0, 400)
        costs = pointwise_cost(grid, np.full(grid.size, 0.3), params)
        assert pointwise_cost(best, gradient, params)[0] <= costs.min() + 1e-12

    def test_cap_applies(self) -> None:
        """Flat gradients hit the cap."""
        params = RegimeParams(eta=1.0, D=1.0)
        np.testing.assert_allclose(profile_from_gradient(np.array([0.0]), params, 50.0), [50.0])
        with pytest.raises(DomainError):
            profile_from_gradient(np.array([1.0]), params, 0.5)

    def test_evaluation(self) -> None:
        """The profile evaluates to its table inside the grid and to the cap outside."""
        f = GridFunction.from_callable(sine, [(0.0, 1.0)], 0.25)
        result = optimal_profile(f, RegimeParams(eta=1.0, D=1.0), cap=10.0)
        inside = result(np.array([[0.1]]), 0)
        assert inside[0] == pytest.approx(result.values[0][0])
        assert result(np.array([[5.0]]), 0)[0] == 10.0


class TestSolveChiC:
    """Test the continuum limit."""

    def test_dirichlet_analogue(self) -> None:
        """With p forced to 2 the scaled values approach π²."""
        result = solve_chi_c([(0.0, 1.0)], RegimeParams(eta=1.0, D=1.0), [4, 8, 16], force_p=2.0)
        assert result.exponent == 2.0
        assert result.trend == "increasing"
        assert [level.sites for level in result.levels] == [3, 7, 15]
        assert result.extrapolated == pytest.approx(math.pi**2, rel=1e-3)
        assert result.relative_change < 0.02

    def test_zero_infimum(self) -> None:
        """η ≤ d/2 is flagged and carries a decaying witness curve."""
        config = ChiConfig(restarts=1, max_iter=50, smoothing_levels=2)
        result = solve_chi_c([(0.0, 1.0)], RegimeParams(eta=0.25, D=1.0), [4], config)
        assert result.zero_infimum
        assert result.extrapolated is None
        assert result.witness is not None
        energies = result.witness.energies
        assert energies == sorted(energies, reverse=True)

    def test_aitken(self) -> None:
        """Geometric convergence is extrapolated exactly."""
        assert aitken([1.5, 1.25, 1.125]) == pytest.approx(1.0)
        assert aitken([2.0, 3.0]) == 3.0


class TestWitnesses:
    """Test the analytic witness families."""

    def test_d1_norm_and_energy(self) -> None:
        """f_r is normalised and the quadrature energy matches the closed form."""
        result = witness_d1(16.0, 0.5, 0.5)
        assert result.norm == pytest.approx(1.0, rel=1e-8)
        assert result.energy == pytest.approx(result.exact_energy, rel=1e-6)
        assert result.bound_exponent == pytest.approx(-0.25)

    def test_d1_decay_rate(self) -> None:
        """The energy decays like r^{3p/2 - 1}."""
        low = witness_d1(64.0, 0.5, 0.5).exact_energy
        high = witness_d1(256.0, 0.5, 0.5).exact_energy
        slope = math.log(high / low) / math.log(4.0)
        assert slope == pytest.approx(-0.25, abs=0.02)

    def test_d1_boundary_case(self) -> None:
        """p = 2/3 is flagged."""
        assert witness_d1(4.0, 0.5, 2.0 / 3.0).boundary_case

    def test_d1_invalid(self) -> None:
        """r must exceed 1/2."""
        with pytest.raises(DomainError):
            witness_d1(0.5, 0.5, 0.5)

    def test_dge2_norm(self) -> None:
        """f_ε is L²-normalised."""
        result = witness_dge2(0.1, 0.75, 2, 0.8)
        assert result.norm == pytest.approx(1.0, rel=1e-6)

    def test_dge2_scaling(self) -> None:
        """The energy scales like ε^{d - p - pd/2}."""
        small = witness_dge2(0.1, 0.75, 2, 0.8).energy
        large = witness_dge2(0.2, 0.75, 2, 0.8).energy
        assert small / large == pytest.approx(0.5**0.4, rel=1e-6)

    def test_exponents(self) -> None:
        """Printed and exact exponents for d = 2, p = 0.8, γ = 0.75."""
        assert printed_witness_exponent(2, 0.8, 0.75) == pytest.approx(0.5)
        assert exact_witness_exponent(2, 0.8) == pytest.approx(0.4)

    def test_dge2_invalid(self) -> None:
        """d = 1 and γ outside (d/4, d/2) are rejected."""
        with pytest.raises(DomainError):
            witness_dge2(0.1, 0.3, 1, 0.5)
        with pytest.raises(DomainError):
            witness_dge2(0.1, 1.2, 2, 0.5)

    def test_discretise_profile_normalised(self) -> None:
        """g^{(n)} of a normalised g is ℓ²-normalised."""
        box = build_box(1, 8.0, [(-0.1, 1.0)])
        values = discretise_profile(sine, 8, box)
        assert float(np.sum(values**2)) == pytest.approx(1.0, rel=1e-8)


class TestSobolev:
    """Test the discrete Sobolev inequality and cutoffs."""

    def test_flat_square(self) -> None:
        """A 3x3 block: 9 ≤ 12²."""
        check = discrete_sobolev_check(np.ones((3, 3)))
        assert check.lhs == pytest.approx(9.0)
        assert check.rhs == pytest.approx(144.0)
        assert check.holds

    def test_invalid_inputs(self) -> None:
        """d = 1 and negative values are rejected."""
        with pytest.raises(DomainError):
            discrete_sobolev_check(np.ones(3))
        with pytest.raises(DomainError):
            discrete_sobolev_check(-np.ones((2, 2)))

    def test_cutoff_values(self) -> None:
        """ξ is 1, linear, then 0."""
        np.testing.assert_allclose(cutoff(np.array([[0.0, 0.0], [1.5, 0.0], [3.0, 0.0]])), [1.0, 0.5, 0.0])

    def test_cutoff_convergence(self) -> None:
        """A large radius leaves g unchanged."""
        table = cutoff_convergence(np.ones((5, 5)), [1, 10], 1.0)
        assert table.rows[-1].energy == pytest.approx(table.reference)
        assert table.rows[-1].renormalisation == pytest.approx(1.0 / 5.0)
