"""Tests for conductance laws, sampling, profiles, events and field files."""

import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from rwrc_lab.conductance import (
    ConductanceField,
    ConstantModel,
    EllipticModel,
    TailModel,
    constant_field,
    draw_conductances,
    event_probability_mc,
    field_from_dict,
    field_to_dict,
    load_field,
    profile_event_check,
    profile_event_logprob_bound,
    rescaled_field,
    sample_field,
    save_field,
    tail_functional,
    unscaled_profile,
)
from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import build_box, centred_cube


class TestTailModel:
    """Test the heavy lower-tail law."""

    def test_p_exponent(self) -> None:
        """p = 2η/(1+η)."""
        assert TailModel(eta=1.0, D=1.0).p == pytest.approx(1.0)
        assert TailModel(eta=3.0, D=1.0).p == pytest.approx(1.5)

    def test_cdf_values(self) -> None:
        """cdf is exp(-D eps^-eta) below the cap and 1 at the cap."""
        model = TailModel(eta=2.0, D=0.5)
        assert model.cdf(0.5) == pytest.approx(math.exp(-0.5 * 0.5 ** -2))
        assert model.cdf(1.0) == 1.0
        assert model.cdf(0.0) == 0.0
        np.testing.assert_allclose(model.cdf(np.array([0.25, 2.0])), [math.exp(-8.0), 1.0])

    def test_draws_bounded_by_cap(self) -> None:
        """Samples are positive and at most the cap."""
        model = TailModel(eta=0.5, D=1.0, cap=0.7)
        a = draw_conductances(model, 10_000, 3)
        assert np.all(a > 0)
        assert a.max() <= 0.7

    @pytest.mark.parametrize("eta,D", [(0.5, 0.5), (1.0, 1.0), (2.0, 0.5)])
    def test_empirical_cdf_matches(self, eta: float, D: float) -> None:
        """Empirical Pr(a <= eps) agrees with the exact tail within 4 standard errors."""
        model = TailModel(eta=eta, D=D)
        n = 200_000
        a = draw_conductances(model, n, 11)
        for eps in (0.4, 0.7):
            exact = model.cdf(eps)
            if exact < 1e-3:
                continue
            freq = float(np.mean(a <= eps))
            stderr = math.sqrt(exact * (1 - exact) / n)
            assert abs(freq - exact) <= 4 * stderr

    def test_monotone_coupling_in_D(self, q2) -> None:
        """With a shared seed, larger D gives pointwise larger conductances."""
        small = sample_field(q2, TailModel(eta=1.0, D=0.2), seed=5)
        large = sample_field(q2, TailModel(eta=1.0, D=0.8), seed=5)
        assert np.all(small.weights <= large.weights)


class TestEllipticModel:
    """Test uniformly elliptic laws."""

    def test_uniform_support(self) -> None:
        """Uniform draws lie in [λ, 1/λ]."""
        model = EllipticModel(lam=0.25)
        a = draw_conductances(model, 5000, 1)
        assert a.min() >= 0.25
        assert a.max() <= 4.0

    def test_discrete_harmonic_mean(self) -> None:
        """Harmonic mean of {1/2, 3/2} equiprobable is 3/4."""
        model = EllipticModel(lam=0.5, law="discrete", values=[0.5, 1.5])
        assert model.harmonic_mean() == pytest.approx(0.75)

    def test_uniform_harmonic_mean(self) -> None:
        """Uniform harmonic mean is (b - a)/log(b/a)."""
        model = EllipticModel(lam=0.5)
        assert model.harmonic_mean() == pytest.approx(1.5 / math.log(4.0))

    def test_discrete_atoms_validated(self) -> None:
        """Atoms outside [λ, 1/λ] are rejected."""
        with pytest.raises(ValidationError):
            EllipticModel(lam=0.5, law="discrete", values=[0.1, 1.0])

    def test_discrete_requires_values(self) -> None:
        """A discrete law without atoms is rejected."""
        with pytest.raises(ValidationError):
            EllipticModel(lam=0.5, law="discrete")

    def test_constant_model(self) -> None:
        """The constant law returns its value."""
        model = ConstantModel(value=2.0)
        assert model.harmonic_mean() == 2.0
        np.testing.assert_allclose(draw_conductances(model, 3, 0), [2.0, 2.0, 2.0])


class TestSampleField:
    """Test field sampling."""

    def test_deterministic(self, square_box, tail_model) -> None:
        """Same (box, model, seed) gives identical weights."""
        first = sample_field(square_box, tail_model, 42)
        second = sample_field(square_box, tail_model, 42)
        np.testing.assert_array_equal(first.weights, second.weights)

    def test_seed_changes_field(self, square_box, tail_model) -> None:
        """Different seeds give different fields."""
        first = sample_field(square_box, tail_model, 1)
        second = sample_field(square_box, tail_model, 2)
        assert not np.array_equal(first.weights, second.weights)

    def test_shape_and_metadata(self, square_box, tail_model) -> None:
        """Weights cover the halo grid and record the law."""
        env = sample_field(square_box, tail_model, 0)
        assert env.weights.shape == (2, 5, 4)
        assert env.model["kind"] == "tail"
        assert env.seed == 0

    def test_touching_edge_count(self, square_box) -> None:
        """A 4x3 box has 31 edges with an endpoint inside."""
        env = constant_field(square_box)
        assert env.touching_weights().size == 31

    def test_holding_rates_constant(self, square_box) -> None:
        """Under a ≡ 1 every site has π = 2d."""
        env = constant_field(square_box)
        np.testing.assert_allclose(env.holding_rates(), 4.0)

    def test_conductance_is_symmetric(self, square_box, tail_model) -> None:
        """a_xy = a_yx."""
        env = sample_field(square_box, tail_model, 9)
        assert env.conductance((1, 1), (2, 1)) == env.conductance((2, 1), (1, 1))
        with pytest.raises(ValueError):
            env.conductance((1, 1), (2, 2))

    def test_weights_read_only(self, path_box) -> None:
        """Field weights cannot be modified in place."""
        env = constant_field(path_box)
        with pytest.raises(ValueError):
            env.weights[0, 0] = 5.0


class TestProfiles:
    """Test rescaled fields, unscaled profiles and the tail functional."""

    def test_rescaled_field_values(self, path_box) -> None:
        """a_t(y) = β a(⌊αy⌋)."""
        env = constant_field(path_box, 2.0)
        a_t = rescaled_field(env, 0.5)
        assert a_t(np.array([0.3]), 0) == pytest.approx(1.0)

    def test_rescaled_field_outside(self, path_box) -> None:
        """Points outside G raise DomainError."""
        a_t = rescaled_field(constant_field(path_box), 1.0)
        with pytest.raises(DomainError):
            a_t(np.array([1.5]), 0)

    def test_unscaled_constant(self, square_box) -> None:
        """A constant profile gives a constant field."""
        phi_t = unscaled_profile(3.0, square_box)
        np.testing.assert_allclose(phi_t.weights, 3.0)

    def test_unscaled_linear_exact(self) -> None:
        """Cell averages of 1 + y are exact at the cell centres."""
        box = build_box(1, 4.0, [(0.0, 1.0)])
        phi_t = unscaled_profile(lambda y, i: 1.0 + y[:, 0], box)
        centres = (box.halo_cells[:, 0] + 0.5) / 4.0
        np.testing.assert_allclose(phi_t.weights[0], 1.0 + centres, rtol=1e-13)

    def test_unscaled_rejects_non_positive(self, path_box) -> None:
        """Non-positive profiles are rejected."""
        with pytest.raises(DomainError):
            unscaled_profile(lambda y, i: y[:, 0] - 0.5, path_box)

    def test_tail_functional_constant(self) -> None:
        """Constant a gives d·|G|·(βa)^{-η}, also for non-integer α."""
        box = build_box(2, 2.5, [(0.0, 1.0), (0.0, 2.0)])
        a_t = rescaled_field(constant_field(box, 2.0), 0.5)
        assert tail_functional(a_t, eta=2.0) == pytest.approx(2 * 2.0 * 1.0)

    def test_tail_functional_generic_evaluator(self) -> None:
        """A plain callable is integrated over G."""
        value = tail_functional(lambda y, i: np.full(y.shape[0], 2.0), G=[(0.0, 1.0)], eta=1.0)
        assert value == pytest.approx(0.5)

    def test_tail_functional_needs_domain(self) -> None:
        """A generic evaluator without G is rejected."""
        with pytest.raises(DomainError):
            tail_functional(lambda y, i: y[:, 0], eta=1.0)


class TestEvents:
    """Test the profile event and its probability."""

    def test_event_check(self, path_box) -> None:
        """β a inside [φ - δ, φ] is in the event; outside is not."""
        env = constant_field(path_box)
        phi_t = unscaled_profile(1.0, path_box)
        assert profile_event_check(env, 1.0, phi_t, 0.5)
        assert not profile_event_check(env, 0.4, phi_t, 0.5)

    def test_delta_too_large(self, path_box) -> None:
        """δ >= min φ_t is rejected."""
        env = constant_field(path_box)
        phi_t = unscaled_profile(1.0, path_box)
        with pytest.raises(DomainError):
            profile_event_check(env, 1.0, phi_t, 1.0)

    def test_logprob_bound_constant(self) -> None:
        """For φ ≡ 1 the bound is -D·d·|G|."""
        assert profile_event_logprob_bound(1.0, 1.0, 0.5, [(0.0, 1.0), (0.0, 1.0)]) == pytest.approx(-1.0)

    def test_event_frequency_matches_exact(self) -> None:
        """Monte Carlo frequency agrees with the product formula."""
        box = centred_cube(1, 0)
        model = TailModel(eta=1.0, D=0.5)
        phi_t = unscaled_profile(0.5, box)
        result = event_probability_mc(box, model, 1.0, phi_t, 0.25, 40_000, seed=3)
        single = math.exp(-1.0) - math.exp(-2.0)
        assert result.exact == pytest.approx(single**2)
        assert abs(result.frequency - result.exact) <= 4 * math.sqrt(result.exact / 40_000)
        assert result.trials == 40_000


class TestFieldFiles:
    """Test JSON edge-list serialisation."""

    def test_round_trip(self, square_box, tail_model, tmp_path: Path) -> None:
        """save_field then load_field restores the weights."""
        env = sample_field(square_box, tail_model, 4)
        path = save_field(env, tmp_path / "field.json")
        loaded = load_field(path)
        np.testing.assert_array_equal(loaded.weights, env.weights)
        assert loaded.box == env.box
        assert loaded.seed == 4

    def test_header(self, path_box) -> None:
        """The header carries geometry and law."""
        data = field_to_dict(constant_field(path_box))
        assert data["header"]["d"] == 1
        assert data["header"]["model"]["kind"] == "constant"
        assert len(data["edges"]) == 6

    def test_malformed_document(self, path_box) -> None:
        """Too few edges raise DomainError."""
        data = field_to_dict(constant_field(path_box))
        data["edges"] = data["edges"][:-1]
        with pytest.raises(DomainError):
            field_from_dict(data)

    def test_missing_file(self, tmp_path: Path) -> None:
        """A missing file raises DomainError."""
        with pytest.raises(DomainError):
            load_field(tmp_path / "absent.json")

    def test_field_shape_validation(self, path_box) -> None:
        """ConductanceField rejects weights of the wrong shape."""
        with pytest.raises(ValueError):
            ConductanceField(box=path_box, weights=np.ones((1, 3)))
