"""
Tests for first-order amplitudes, golden-rule rates and the interconversion series
"""

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from config import settings
from exceptions import ValidationError
from models.params import HBAR_EV_S, validate_params
from services.perturbation_engine import (
    ACCEPTOR_ROWS,
    PerturbationEngine,
    amplitude_factor,
    broadening_scan,
    equal_coupling_conversion,
    field_magnitude_scan,
    first_order_amplitude,
    first_order_mixing,
    initial_expansion,
    interior_extremum,
    lorentzian,
    min_coupled_gap,
    reaction_probability,
    reaction_rate,
    second_order_shifts,
    triplet_to_singlet_probability,
)
from services.vibronic import h1_matrix_element


@pytest.fixture(scope="module")
def equal_params(reference_params):
    """Source parameters with a short ladder; interconversion does not depend on it."""
    return validate_params(reference_params.with_updates(phonon_cutoff=8))


# ==========================================
# AMPLITUDE FACTOR
# ==========================================

@pytest.mark.parametrize("x", [0.0, 5e-7, 9.99e-7, 1.001e-6, 2e-6, 0.5, -3.0])
def test_amplitude_factor_across_series_switch(x):
    """Test that the amplitude factor is continuous across the series switch."""
    tau = 1e-7
    if x == 0.0:
        assert amplitude_factor(0.0, tau) == pytest.approx(1j * tau / HBAR_EV_S, rel=1e-15)
        return
    delta_e = x * HBAR_EV_S / tau
    expected = (-2.0 * math.sin(x / 2) ** 2 + 1j * math.sin(x)) / delta_e
    np.testing.assert_allclose(amplitude_factor(delta_e, tau), expected, rtol=1e-9)


def test_lorentzian_normalized():
    """Test that the Lorentzian integrates to one."""
    eta = 1e-9
    x = np.linspace(-2e-6, 2e-6, 400001)
    area = trapezoid(lorentzian(x, eta), x)
    assert area == pytest.approx(1.0, rel=2e-3)
    assert lorentzian(0.0, eta) == pytest.approx(1.0 / (math.pi * eta))


# ==========================================
# INITIAL STATE
# ==========================================

def test_initial_expansion_is_normalized(small_params):
    """Test that initial expansions are normalized on the singly occupied rows."""
    for initial in ("triplet", "singlet"):
        for j in range(1, 5):
            c = initial_expansion(initial, j, 0, small_params)
            assert np.sum(np.abs(c) ** 2) == pytest.approx(1.0, rel=1e-13)
            assert np.all(c[16:] == 0)


def test_initial_expansion_bounds(small_params):
    """Test that invalid initial labels and indices are rejected."""
    engine = PerturbationEngine(small_params)
    with pytest.raises(ValidationError):
        engine.initial_expansion("triplet", 5)
    with pytest.raises(ValidationError):
        engine.initial_expansion("triplet", 1, m=4)
    with pytest.raises(ValidationError):
        engine.initial_expansion("quintet", 1)


# ==========================================
# REACTION PROBABILITY
# ==========================================

def test_amplitude_matches_integrated_equation(small_params):
    """Test that closed-form amplitudes match the integrated amplitude equation."""
    engine = PerturbationEngine(small_params)
    tau = 1e-7
    table = engine.amplitude_table("triplet", j=2, m=1, tau=tau)
    integrated = engine.integrate_amplitude_equation("triplet", j=2, m=1, tau=tau)
    closed = table.amplitudes[:, ACCEPTOR_ROWS]
    assert np.max(np.abs(closed - integrated)) <= 1e-6 * np.max(np.abs(closed))


def test_single_amplitude_agrees_with_table(small_params):
    """Test that a single amplitude agrees with the amplitude table."""
    tau = 4e-8
    source = initial_expansion("triplet", 3, 2, small_params)
    table = PerturbationEngine(small_params).amplitude_table("triplet", j=3, m=2, tau=tau)
    value = first_order_amplitude((1, 22), source, 2, tau, small_params)
    assert value == pytest.approx(table.amplitudes[1, 21], rel=1e-10)


def test_probability_vanishes_without_hyperfine(reference_params):
    """Test that the triplet cannot react without hyperfine coupling."""
    p = reference_params.with_updates(g1=0.0, g2=0.0, theta=0.7)
    assert reaction_probability("triplet", 1e-7, p).value < 1e-20
    assert reaction_rate("triplet", p).value < 1e-20
    assert reaction_probability("singlet", 1e-7, p).value > 1e-8


def test_probability_vanishes_at_zero_time(small_params):
    """Test that nothing has reacted at t = 0."""
    assert reaction_probability("triplet", 0.0, small_params).value == 0.0


def test_negative_time_rejected(small_params):
    """Test that negative times are rejected."""
    with pytest.raises(ValidationError):
        reaction_probability("triplet", -1e-9, small_params)


def test_unknown_final_sector(small_params):
    """Test that an unknown final sector is rejected."""
    with pytest.raises(ValidationError):
        reaction_probability("triplet", 1e-8, small_params, final_sector="donor")


def test_all_sectors_include_acceptor(small_params):
    """Test that the all-sector probability includes the acceptor."""
    acceptor = reaction_probability("triplet", 1e-7, small_params, "acceptor").value
    everything = reaction_probability("triplet", 1e-7, small_params, "all").value
    assert everything >= acceptor > 0.0


def test_tunneling_squared_scaling(small_params):
    """Test that probability and rate scale with J²."""
    doubled = small_params.with_updates(tunneling_J=2 * small_params.tunneling_J)
    base = reaction_probability("triplet", 1e-7, small_params).value
    assert reaction_probability("triplet", 1e-7, doubled).value / base == pytest.approx(4.0, rel=1e-12)
    rate = reaction_rate("triplet", small_params).value
    assert reaction_rate("triplet", doubled).value / rate == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("theta", [0.4, 1.2])
def test_triplet_symmetric_about_perpendicular_field(small_params, theta):
    """Test that triplet observables are even about Θ = π/2."""
    a = small_params.with_updates(theta=theta)
    b = small_params.with_updates(theta=math.pi - theta)
    assert reaction_probability("triplet", 1e-7, a).value == pytest.approx(
        reaction_probability("triplet", 1e-7, b).value, rel=1e-9)
    assert reaction_rate("triplet", a).value == pytest.approx(reaction_rate("triplet", b).value, rel=1e-9)
    np.testing.assert_allclose(
        triplet_to_singlet_probability(np.linspace(0, 2e-7, 9), a),
        triplet_to_singlet_probability(np.linspace(0, 2e-7, 9), b),
        rtol=1e-9, atol=1e-15,
    )


def test_singlet_independent_of_field_direction(small_params):
    """Test that singlet observables do not depend on Θ."""
    values = [reaction_probability("singlet", 1e-7, small_params.with_updates(theta=t)).value
              for t in (0.0, 1.0, 2.5)]
    np.testing.assert_allclose(values, values[0], rtol=1e-9)
    rates = [reaction_rate("singlet", small_params.with_updates(theta=t)).value for t in (0.0, 1.0, 2.5)]
    np.testing.assert_allclose(rates, rates[0], rtol=1e-9)


def test_probability_insensitive_to_temperature_at_source_point(reference_params):
    """Test that P_t barely changes between 5 and 10 mK at one angle."""
    cold = reaction_probability("triplet", 1e-7, reference_params.with_updates(temperature=0.005)).value
    warm = reaction_probability("triplet", 1e-7, reference_params).value
    assert cold == pytest.approx(warm, rel=0.1)


@pytest.mark.slow
def test_temperature_insensitive_on_theta_grid(reference_raw, monkeypatch):
    """Test that 5 mK and 10 mK agree within 10% at every Θ under the capped cutoff."""
    monkeypatch.setattr(settings, "PHONON_CUTOFF_HARD_MAX", 128)
    tau = 0.5 / reference_raw.omega
    for theta in np.linspace(0.0, math.pi, 9):
        values = []
        for temperature in (0.005, 0.01):
            p = validate_params(reference_raw.with_updates(theta=float(theta), temperature=temperature))
            assert p.cutoff_capped
            values.append(reaction_probability("triplet", tau, p).value)
        assert values[0] == pytest.approx(values[1], rel=0.1)


def test_unreliable_probability_flagged(small_params, monkeypatch):
    """Test that probabilities above the reliability threshold are flagged."""
    assert reaction_probability("triplet", 1e-7, small_params).flags == ()
    monkeypatch.setattr(settings, "UNRELIABLE_PROBABILITY", 0.0)
    assert reaction_probability("triplet", 1e-7, small_params).flags == ("perturbation_unreliable",)


# ==========================================
# GOLDEN-RULE RATE
# ==========================================

def test_rate_decomposition(reference_params):
    """Test that the rate decomposes over nuclear and phonon channels."""
    rate = reaction_rate("triplet", reference_params)
    assert rate.value > 0.0
    assert np.sum(rate.by_nuclear_final) == pytest.approx(rate.value, rel=1e-12)
    assert np.sum(rate.by_phonon) == pytest.approx(rate.value, rel=1e-12)
    # total spin projection forbids χ1 -> D2χ4 and χ4 -> D2χ1 in an aligned field
    assert rate.by_nuclear_final[0, 3] <= 1e-12 * rate.value
    assert rate.by_nuclear_final[3, 0] <= 1e-12 * rate.value


def test_off_resonant_rate_linear_in_broadening(reference_params):
    """Test that the off-resonant rate doubles with the broadening."""
    scan = broadening_scan(reference_params, factors=(1.0, 2.0))
    assert scan.rates[1] / scan.rates[0] == pytest.approx(2.0, rel=1e-3)
    np.testing.assert_allclose(scan.etas, [reference_params.eta, 2 * reference_params.eta])
    assert scan.relative_spread == pytest.approx(0.5, rel=1e-3)


def test_rate_flagged_for_long_observation(reference_params):
    """Test that long observation windows flag the rate."""
    assert reaction_rate("triplet", reference_params, observation_time=1e-9).flags == ()
    assert reaction_rate("triplet", reference_params, observation_time=1e12).flags == ("perturbation_unreliable",)


# ==========================================
# INTERCONVERSION
# ==========================================

def test_conversion_starts_at_zero(small_params):
    """Test that interconversion starts from zero."""
    assert triplet_to_singlet_probability(0.0, small_params) == pytest.approx(0.0, abs=1e-20)
    assert isinstance(triplet_to_singlet_probability(1e-8, small_params), float)


@pytest.mark.parametrize("theta", [0.0, 0.5, math.pi / 2, 2.0])
def test_equal_coupling_closed_form(equal_params, theta):
    """Test that the engine reproduces the equal-coupling closed form."""
    p = equal_params.with_updates(theta=theta)
    times = np.linspace(0.0, 1e-7, 201)
    np.testing.assert_allclose(
        triplet_to_singlet_probability(times, p), equal_coupling_conversion(times, p), atol=1e-10)


@pytest.mark.parametrize("theta", [0.0, 1.0])
def test_zero_field_conversion(equal_params, theta):
    """Test that the zero-field curve is ¼(1 - cos⁴) for any Θ."""
    p = equal_params.with_updates(B0=0.0, theta=theta)
    times = np.linspace(0.0, 1e-7, 51)
    c = np.cos(2 * p.g1 * times / HBAR_EV_S)
    np.testing.assert_allclose(triplet_to_singlet_probability(times, p), 0.25 * (1 - c ** 4), atol=1e-10)


def test_closed_form_needs_equal_couplings(small_params):
    """Test that the closed form refuses unequal couplings."""
    with pytest.raises(ValidationError):
        equal_coupling_conversion([0.0], small_params)


def test_aligned_field_converts_more_at_half_period(equal_params):
    """Test that an aligned field converts more than a perpendicular one."""
    t = 0.5 / equal_params.omega
    aligned = triplet_to_singlet_probability(t, equal_params)
    perpendicular = triplet_to_singlet_probability(t, equal_params.with_updates(theta=math.pi / 2))
    assert 2e-4 < aligned / 0.25 - 1.0 < 5e-4
    assert 3e-4 < 1.0 - perpendicular / 0.25 < 6e-4

    times = np.linspace(0.0, 1e-7, 2001)
    assert np.max(equal_coupling_conversion(times, equal_params)) > np.max(
        equal_coupling_conversion(times, equal_params.with_updates(theta=math.pi / 2)))


def test_second_order_energies_barely_move_conversion(small_params, monkeypatch):
    """Test that second-order energies change interconversion very little."""
    times = np.linspace(0.0, 2e-7, 11)
    first = triplet_to_singlet_probability(times, small_params)
    monkeypatch.setattr(settings, "ENERGY_CORRECTION_ORDER", 2)
    second = triplet_to_singlet_probability(times, small_params)
    np.testing.assert_allclose(second, first, rtol=1e-6, atol=1e-15)


# ==========================================
# FIELD-DIRECTION SHAPE
# ==========================================

@pytest.mark.slow
def test_aligned_field_transfers_more_at_capped_cutoff(reference_params):
    """Test that P_t at t = 0.5/ω is larger for Θ = 0 than for Θ = π/2."""
    p = validate_params(reference_params.with_updates(phonon_cutoff=256))
    tau = 0.5 / p.omega
    aligned = reaction_probability("triplet", tau, p).value
    perpendicular = reaction_probability("triplet", tau, p.with_updates(theta=math.pi / 2)).value
    assert aligned > perpendicular > 0.0


@pytest.mark.slow
def test_transfer_even_about_perpendicular_on_fine_grid(reference_params):
    """Test that P_t is even about Θ = π/2 on a 33-point grid."""
    tau = 0.5 / reference_params.omega
    thetas = np.linspace(0.0, math.pi, 33)
    values = np.array([
        reaction_probability("triplet", tau, reference_params.with_updates(theta=float(t))).value for t in thetas
    ])
    assert np.max(np.abs(values - values[::-1])) < 1e-10


def test_conversion_maximum_over_field_directions(equal_params):
    """Test that max_t P_{t→s} is largest along the field and smallest across it."""
    times = np.linspace(0.0, 2e-7, 4001)
    thetas = np.linspace(0.0, math.pi, 9)
    peaks = np.array([
        np.max(triplet_to_singlet_probability(times, equal_params.with_updates(theta=float(t)))) for t in thetas
    ])
    assert peaks[0] == pytest.approx(np.max(peaks), rel=1e-12)
    assert peaks[-1] == pytest.approx(np.max(peaks), rel=1e-12)
    assert int(np.argmin(peaks)) == 4
    np.testing.assert_allclose(peaks, peaks[::-1], atol=1e-10)


def test_field_magnitude_scan_rises_to_plateau(equal_params):
    """Test that the field scan rises from ¼ to the ½cos²Θ plateau."""
    theta = 0.1 * math.pi
    times = np.linspace(0.0, 2e-7, 4001)
    fields = [0.0, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1]
    peaks = [pt.max_value for pt in field_magnitude_scan(theta, fields, times, equal_params)]
    plateau = 0.5 * math.cos(theta) ** 2
    assert peaks[0] == pytest.approx(0.25, abs=2e-3)
    assert peaks[-1] == pytest.approx(plateau, rel=2e-3)
    assert peaks[-2] == pytest.approx(peaks[-1], rel=5e-3)
    assert max(peaks) >= peaks[-1] > peaks[0]


# ==========================================
# FIELD SCANS AND HELPERS
# ==========================================

def test_field_magnitude_scan(equal_params):
    """Test that the field scan reports one bounded point per field."""
    times = np.linspace(0.0, 1e-7, 101)
    points = field_magnitude_scan(0.0, [0.0, 50e-6, 1e-3], times, equal_params)
    assert [pt.B0 for pt in points] == [0.0, 50e-6, 1e-3]
    assert all(pt.argmax_time in times for pt in points)
    assert all(0.0 <= pt.max_value <= 1.0 for pt in points)
    with pytest.raises(ValidationError):
        field_magnitude_scan(0.0, [], times, equal_params)


def test_interior_extremum():
    """Test that interior extrema are detected against the endpoints."""
    assert interior_extremum([1.0, 3.0, 2.0])
    assert interior_extremum([2.0, 0.5, 1.0])
    assert not interior_extremum([1.0, 2.0, 3.0])
    assert not interior_extremum([1.0, 1.0])


def test_mixing_and_gap(small_params):
    """Test the first-order admixture and the smallest coupled gap."""
    engine = PerturbationEngine(small_params)
    gap = min_coupled_gap(small_params)
    assert small_params.tunneling_J == pytest.approx(1e-3 * gap)
    element = h1_matrix_element(0, 21, 1, 6, small_params, engine.eig)
    denom = engine.energies[1, 5] - engine.energies[0, 20]
    assert first_order_mixing(1, 6, 0, 21, small_params) == pytest.approx(element / denom, rel=1e-12, abs=0)
    assert second_order_shifts(small_params).shape == (4, 16)
