"""
Tests for the two-electron basis and its operators
"""

import numpy as np
import pytest

from models.params import BasisState
from services.fock_space import (
    ACCEPTOR_DOUBLE,
    DONOR_DOUBLE,
    SINGLY_CONFIGS,
    double_occupancy_state,
    electron_spin_operators,
    flatten,
    hopping_operator,
    nuclear_spin_operators,
    occupancy,
    product_to_spin_space,
    unflatten,
)


def test_orbital_config_layout():
    """Test that the six orbital configurations follow the mode ordering."""
    assert DONOR_DOUBLE == 0
    assert ACCEPTOR_DOUBLE == 5
    assert SINGLY_CONFIGS == (1, 2, 3, 4)
    assert occupancy(DONOR_DOUBLE) == (2, 0)
    assert occupancy(ACCEPTOR_DOUBLE) == (0, 2)
    assert all(occupancy(c) == (1, 1) for c in SINGLY_CONFIGS)


def test_flat_index_layout():
    """Test that flatten and unflatten agree on the index layout."""
    state = unflatten(5 * 3 + 2, 3)
    assert state == BasisState(orbital_config=1, nuclear_config=2, phonon_number=2)
    assert flatten(BasisState(orbital_config=5, nuclear_config=4, phonon_number=0), 3) == 23 * 3


def test_flat_index_bounds():
    """Test that out-of-range basis indices are rejected."""
    with pytest.raises(IndexError):
        flatten(BasisState(orbital_config=0, nuclear_config=1, phonon_number=3), 3)
    with pytest.raises(IndexError):
        unflatten(24 * 3, 3)


def test_hop_respects_pauli_and_fermion_sign():
    """Test that hopping respects exclusion and the fermionic sign."""
    hop = hopping_operator(1, 2)
    # 1↑2↑ and 1↓2↓ cannot form a double
    assert hop[ACCEPTOR_DOUBLE, 1] == 0.0
    assert hop[ACCEPTOR_DOUBLE, 4] == 0.0
    assert hop[ACCEPTOR_DOUBLE, 2] == pytest.approx(1.0)
    assert hop[ACCEPTOR_DOUBLE, 3] == pytest.approx(-1.0)
    np.testing.assert_allclose(hopping_operator(2, 1), hop.T)


def test_electron_sz_diagonal():
    """Test that the electron S_z is diagonal on the configurations."""
    sz = electron_spin_operators(1)[2]
    np.testing.assert_allclose(np.diag(sz).real, [0, 1, 1, -1, -1, 0])
    np.testing.assert_allclose(sz, np.diag(np.diag(sz)))


def test_electron_pauli_algebra():
    """Test that electron spin operators obey the Pauli algebra."""
    sx, sy, sz = electron_spin_operators(2)
    singly = list(SINGLY_CONFIGS)
    block = np.ix_(singly, singly)
    np.testing.assert_allclose((sx @ sy - sy @ sx)[block], (2j * sz)[block], atol=1e-14)


def test_nuclear_sz_in_chi_basis():
    """Test that nuclear σ_z is diagonal in the χ basis."""
    np.testing.assert_allclose(np.diag(nuclear_spin_operators(1)[2]).real, [-1, -1, 1, 1])
    np.testing.assert_allclose(np.diag(nuclear_spin_operators(2)[2]).real, [-1, 1, -1, 1])


def test_product_embedding_places_electron_pair():
    """Test that a product state lands on the expected spin index."""
    # |e↑ n↓> on site 1, |e↓ n↑> on site 2, product index 2e + n
    psi = np.kron(np.eye(4)[1], np.eye(4)[2])
    v = product_to_spin_space(psi)
    # electrons 1↑2↓ -> config 2, nuclei ↓↑ -> χ2
    expected = np.zeros(24)
    expected[2 * 4 + 1] = 1.0
    np.testing.assert_allclose(v, expected)


def test_double_occupancy_states():
    """Test that doubly occupied states sit at the expected indices."""
    v = double_occupancy_state(2, 3)
    assert np.flatnonzero(v).tolist() == [ACCEPTOR_DOUBLE * 4 + 2]
