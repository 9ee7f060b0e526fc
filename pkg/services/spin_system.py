"""
Spin Hamiltonian in the field-aligned frame and its 24-state eigensystem.

Each site carries one electron spin coupled isotropically to one nuclear spin,
H_j = -μ_B B0 σ_z^e - g_j σ^e·σ^n. Site eigenstates are written in the product
basis |e n> with index 2e + n (up = 0).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Tuple

import numpy as np
from scipy.linalg import expm

from exceptions import ClosedFormMismatchError
from models.params import MU_B_EV_T, N_NUCLEAR, N_SPIN, ModelParams
from services.fock_space import (
    ID2,
    PAULI,
    SIGMA_Y,
    SIGMA_Z,
    double_occupancy_state,
    electron_pair_to_orbital,
    electron_spin_operators,
    embed_orbital,
    nuclear_spin_operators,
    nuclear_state,
    product_to_spin_space,
)

logger = logging.getLogger(__name__)

SITE_RESIDUAL_TOL = 1e-12

# electron-pair basis (|↑↑>, |↑↓>, |↓↑>, |↓↓>)
SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)
TRIPLET = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / math.sqrt(2.0)

# Table I rows 1-16 as (site-1 level, site-2 level), site 1 outer
PRODUCT_ROWS: Tuple[Tuple[int, int], ...] = tuple((a, b) for a in range(1, 5) for b in range(1, 5))


@dataclass(frozen=True)
class SiteEigensystem:
    """Closed-form eigenpairs e_1..e_4 of one electron-nuclear pair."""

    site: int
    states: np.ndarray    # (4, 4), column k-1 is |e_k>
    energies: np.ndarray  # (4,), eV
    mixing_angle: float


@dataclass(frozen=True)
class SpinEigensystem:
    """The 24 eigenpairs of the spin Hamiltonian, in Table I row order."""

    states: np.ndarray    # (24, 24), column q-1 is |φ_q>
    energies: np.ndarray  # (24,), eV
    site1: SiteEigensystem
    site2: SiteEigensystem


@dataclass(frozen=True)
class PreparedSpinState:
    label: Literal["singlet", "triplet", "rotated_triplet"]
    amplitudes: np.ndarray  # electron-pair vector
    theta: float = 0.0


def mixing_angle(g: float, B0: float) -> float:
    """
    θ = atan2(2g, μ_B B0); B0 = 0 with g > 0 gives π/2.

    g < 0 yields a negative angle rather than one in [0, π). The closed-form
    site states are eigenvectors on this branch, so it is kept as is.
    """
    return math.atan2(2.0 * g, MU_B_EV_T * B0)


def site_hamiltonian(site: int, p: ModelParams) -> np.ndarray:
    """-μ_B B0 σ_z^e - g σ^e·σ^n on the |e n> product basis."""
    g = p.g1 if site == 1 else p.g2
    h = -MU_B_EV_T * p.B0 * np.kron(SIGMA_Z, ID2)
    for sigma in PAULI:
        h = h - g * np.kron(sigma, sigma)
    return h


def site_eigensystem(site: int, p: ModelParams) -> SiteEigensystem:
    """
    Closed-form eigenpairs of one site, checked against direct diagonalization.

    Raises:
        ClosedFormMismatchError: if any residual exceeds tolerance
    """
    g = p.g1 if site == 1 else p.g2
    b = MU_B_EV_T * p.B0
    theta = mixing_angle(g, p.B0)
    root = math.sqrt(b * b + 4.0 * g * g)
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)

    up_up, up_dn, dn_up, dn_dn = np.eye(4, dtype=complex)
    states = np.column_stack([
        dn_dn,
        c * dn_up - s * up_dn,
        s * dn_up + c * up_dn,
        up_up,
    ])
    energies = np.array([b - g, g + root, g - root, -b - g])

    h = site_hamiltonian(site, p)
    scale = max(float(np.max(np.abs(energies))), np.finfo(float).tiny)
    residuals = np.linalg.norm(h @ states - states * energies, axis=0) / scale
    numeric = np.linalg.eigvalsh(h)
    spectrum_gap = np.max(np.abs(np.sort(energies) - numeric)) / scale
    if np.max(residuals) > SITE_RESIDUAL_TOL or spectrum_gap > SITE_RESIDUAL_TOL:
        raise ClosedFormMismatchError(
            f"Site {site} closed-form eigensystem disagrees with diagonalization",
            details={"max_residual": float(np.max(residuals)), "spectrum_gap": float(spectrum_gap)},
        )
    return SiteEigensystem(site=site, states=states, energies=energies, mixing_angle=theta)


def spin_hamiltonian(p: ModelParams) -> np.ndarray:
    """Spin Hamiltonian on the 24-dim space built from fermionic and Pauli operators."""
    h = np.zeros((N_SPIN, N_SPIN), dtype=complex)
    for site, g in ((1, p.g1), (2, p.g2)):
        s_ops = electron_spin_operators(site)
        i_ops = nuclear_spin_operators(site)
        h -= MU_B_EV_T * p.B0 * embed_orbital(s_ops[2])
        for s_op, i_op in zip(s_ops, i_ops):
            h -= g * np.kron(s_op, i_op)
    return h


def table1_eigensystem(p: ModelParams) -> SpinEigensystem:
    site1 = site_eigensystem(1, p)
    site2 = site_eigensystem(2, p)
    columns, energies = [], []
    for a, b in PRODUCT_ROWS:
        columns.append(product_to_spin_space(np.kron(site1.states[:, a - 1], site2.states[:, b - 1])))
        energies.append(site1.energies[a - 1] + site2.energies[b - 1])
    for site in (1, 2):
        for j in range(1, N_NUCLEAR + 1):
            columns.append(double_occupancy_state(site, j))
            energies.append(0.0)
    return SpinEigensystem(
        states=np.column_stack(columns),
        energies=np.array(energies),
        site1=site1,
        site2=site2,
    )


# ==========================================
# ROTATION ABOUT THE Y AXIS
# ==========================================

def pair_rotation(theta: float) -> np.ndarray:
    """exp(+iΘσ_y/2) on each of two spins, 4x4."""
    u = expm(0.5j * theta * SIGMA_Y)
    return np.kron(u, u)


@lru_cache(maxsize=256)
def rotation_operator(theta: float, include_nuclei: bool = True) -> np.ndarray:
    """Frame rotation on the 24-dim space; doubly occupied sites are left invariant."""
    sy = electron_spin_operators(1)[1] + electron_spin_operators(2)[1]
    u_e = expm(0.5j * theta * sy)
    if include_nuclei:
        u_n = nuclear_pair_rotation(theta)
    else:
        u_n = np.eye(N_NUCLEAR, dtype=complex)
    return np.kron(u_e, u_n)


def rotate_y(state: np.ndarray, theta: float) -> np.ndarray:
    """Rotate an electron-pair vector (length 4) or a 24-dim spin vector."""
    state = np.asarray(state, dtype=complex)
    if state.shape == (4,):
        return pair_rotation(theta) @ state
    return rotation_operator(float(theta)) @ state


def prepared_state(label: str, theta: float = 0.0) -> PreparedSpinState:
    if label == "singlet":
        return PreparedSpinState(label="singlet", amplitudes=rotate_y(SINGLET, theta), theta=theta)
    if label == "triplet":
        return PreparedSpinState(label="triplet", amplitudes=TRIPLET.copy())
    if label == "rotated_triplet":
        return PreparedSpinState(label="rotated_triplet", amplitudes=rotate_y(TRIPLET, theta), theta=theta)
    raise ValueError(f"unknown spin state '{label}'")


def initial_spin_states(pair: np.ndarray, theta: float, co_rotate: bool) -> np.ndarray:
    """Columns j-1: |pair> ⊗ |χ_j> on the 24-dim space, nuclei optionally rotated by Θ."""
    orbital = electron_pair_to_orbital(pair)
    columns = []
    for j in range(1, N_NUCLEAR + 1):
        chi = nuclear_state(j)
        if co_rotate:
            chi = nuclear_pair_rotation(theta) @ chi
        columns.append(np.kron(orbital, chi))
    return np.column_stack(columns)


@lru_cache(maxsize=256)
def nuclear_pair_rotation(theta: float) -> np.ndarray:
    iy = nuclear_spin_operators(1)[1] + nuclear_spin_operators(2)[1]
    return expm(0.5j * theta * iy)


def spin_energy_groups(energies: np.ndarray, rtol: float) -> list:
    """Partition row indices into groups of numerically equal energy."""
    scale = max(float(np.max(np.abs(energies))), np.finfo(float).tiny)
    order = np.argsort(energies, kind="stable")
    groups, current = [], [int(order[0])]
    for k in order[1:]:
        if abs(energies[k] - energies[current[-1]]) <= rtol * scale:
            current.append(int(k))
        else:
            groups.append(sorted(current))
            current = [int(k)]
    groups.append(sorted(current))
    return sorted(groups)
