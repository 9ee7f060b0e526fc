"""
Tests for the site eigensystems, the 24-state spin eigenbasis and frame rotations
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from exceptions import ClosedFormMismatchError
from models.params import MU_B_EV_T
from services.spin_system import (
    SINGLET,
    TRIPLET,
    initial_spin_states,
    mixing_angle,
    pair_rotation,
    prepared_state,
    rotate_y,
    site_eigensystem,
    site_hamiltonian,
    spin_energy_groups,
    spin_hamiltonian,
    table1_eigensystem,
)

angles = st.floats(min_value=0.0, max_value=math.pi, allow_nan=False)


def test_mixing_angle_limits():
    """Test the mixing angle in the strong-field and zero-field limits."""
    assert mixing_angle(0.0, 1e-4) == 0.0
    assert mixing_angle(1e-8, 0.0) == pytest.approx(math.pi / 2)
    B0 = 2.0 * 1e-8 / MU_B_EV_T
    assert mixing_angle(1e-8, B0) == pytest.approx(math.pi / 4)
    assert mixing_angle(-1e-8, B0) == pytest.approx(-math.pi / 4)
    assert mixing_angle(-1e-8, 0.0) == pytest.approx(-math.pi / 2)


def test_site_energies_closed_form(small_params):
    """Test that site energies match the closed form."""
    site = site_eigensystem(1, small_params)
    b = MU_B_EV_T * small_params.B0
    g = small_params.g1
    root = math.sqrt(b * b + 4 * g * g)
    np.testing.assert_allclose(site.energies, [b - g, g + root, g - root, -b - g], rtol=1e-14)
    h = site_hamiltonian(1, small_params)
    np.testing.assert_allclose(h @ site.states, site.states * site.energies, atol=1e-12 * root)


def test_site_energies_without_hyperfine(reference_params):
    """Test that site energies reduce to Zeeman levels without hyperfine."""
    site = site_eigensystem(2, reference_params.with_updates(g2=0.0))
    b = MU_B_EV_T * reference_params.B0
    np.testing.assert_allclose(site.energies, [b, b, -b, -b], rtol=1e-14)
    assert site.mixing_angle == 0.0


def test_site_mismatch_detected(small_params, mocker):
    """Test that a disagreeing diagonalization raises ClosedFormMismatchError."""
    mocker.patch("services.spin_system.site_hamiltonian", return_value=np.eye(4))
    with pytest.raises(ClosedFormMismatchError):
        site_eigensystem(1, small_params)


def test_table1_is_orthonormal_eigenbasis(small_params):
    """Test that the 24 states form an orthonormal eigenbasis."""
    eig = table1_eigensystem(small_params)
    h = spin_hamiltonian(small_params)
    scale = float(np.max(np.abs(eig.energies)))
    np.testing.assert_allclose(eig.states.conj().T @ eig.states, np.eye(24), atol=1e-13)
    residual = np.linalg.norm(h @ eig.states - eig.states * eig.energies, axis=0)
    assert np.max(residual) <= 1e-12 * scale
    np.testing.assert_allclose(np.sort(eig.energies), np.linalg.eigvalsh(h), atol=1e-12 * scale)


def test_table1_row_energies(small_params):
    """Test that row energies follow the site energies."""
    eig = table1_eigensystem(small_params)
    e1, e2 = eig.site1.energies, eig.site2.energies
    assert eig.energies[0] == pytest.approx(e1[0] + e2[0], rel=1e-14)
    assert eig.energies[6] == pytest.approx(e1[1] + e2[2], rel=1e-14)
    assert np.all(eig.energies[16:] == 0.0)


def test_hamiltonian_hermitian(reference_params):
    """Test that the spin Hamiltonian is hermitian."""
    h = spin_hamiltonian(reference_params)
    np.testing.assert_allclose(h, h.conj().T)


# ==========================================
# ROTATIONS
# ==========================================

def test_rotated_triplet_components():
    """Test the components of the rotated triplet."""
    theta = 0.7
    expected = np.array([math.sin(theta), math.cos(theta), math.cos(theta), -math.sin(theta)]) / math.sqrt(2)
    np.testing.assert_allclose(rotate_y(TRIPLET, theta), expected, atol=1e-15)


@hyp_settings(max_examples=40, deadline=None)
@given(a=angles, b=angles)
def test_rotation_composition(a, b):
    """Test that rotations compose additively."""
    np.testing.assert_allclose(pair_rotation(a) @ pair_rotation(b), pair_rotation(a + b), atol=1e-13)


@hyp_settings(max_examples=40, deadline=None)
@given(theta=angles)
def test_singlet_is_rotation_invariant(theta):
    """Test that the singlet is invariant under rotation."""
    np.testing.assert_allclose(rotate_y(SINGLET, theta), SINGLET, atol=1e-14)


def test_spin_space_rotation_keeps_doubles():
    """Test that rotation leaves doubly occupied rows unchanged."""
    v = np.zeros(24, dtype=complex)
    v[21] = 1.0
    rotated = rotate_y(v, 1.1)
    assert np.abs(np.vdot(rotated, rotated)) == pytest.approx(1.0)
    assert np.all(np.abs(rotated[:20]) < 1e-15)


def test_prepared_states():
    """Test the prepared singlet and triplet states."""
    assert prepared_state("triplet").label == "triplet"
    np.testing.assert_allclose(prepared_state("rotated_triplet", 0.3).amplitudes, rotate_y(TRIPLET, 0.3))
    np.testing.assert_allclose(prepared_state("singlet", 2.0).amplitudes, SINGLET, atol=1e-14)
    with pytest.raises(ValueError):
        prepared_state("quintet")


def test_initial_states_are_orthonormal():
    """Test that initial spin states are orthonormal."""
    columns = initial_spin_states(rotate_y(TRIPLET, 0.9), 0.9, co_rotate=True)
    np.testing.assert_allclose(columns.conj().T @ columns, np.eye(4), atol=1e-14)


def test_initial_states_without_co_rotation_use_bare_nuclei():
    """Test that nuclei stay unrotated when co-rotation is off."""
    columns = initial_spin_states(TRIPLET, 0.9, co_rotate=False)
    # triplet 1↑2↓ component sits in config 2, nuclear χ3
    assert columns[2 * 4 + 2, 2] == pytest.approx(1 / math.sqrt(2))


def test_energy_groups():
    """Test that degenerate levels are grouped within tolerance."""
    groups = spin_energy_groups(np.array([1.0, -1.0, 1.0 + 1e-13, 0.0]), rtol=1e-10)
    assert groups == [[0, 2], [1], [3]]
