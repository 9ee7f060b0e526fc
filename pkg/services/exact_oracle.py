"""
Exact reference dynamics on the truncated 24·N space.

The full transformed Hamiltonian is diagonalized once and states are evolved
by phase rotation in its eigenbasis.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from config import settings
from exceptions import DimensionCapError, NumericalError, ValidationError
from models.params import HBAR_EV_S, N_NUCLEAR, N_SPIN, ModelParams
from services.fock_space import ACCEPTOR_DOUBLE, DONOR_DOUBLE, SINGLY_CONFIGS, sector_indices
from services.spin_system import SINGLET, TRIPLET, initial_spin_states, rotate_y, spin_hamiltonian
from services.vibronic import displacement_matrix, hopping_spin_operators, row_occupancy

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10
HERMITICITY_TOL = 1e-12

Observable = Literal["acceptor", "double_occupancy", "singlet"]

# orbital configurations whose total occupation each observable measures
OCCUPANCY_SECTORS = {
    "acceptor": [ACCEPTOR_DOUBLE],
    "double_occupancy": [DONOR_DOUBLE, ACCEPTOR_DOUBLE],
}


@dataclass
class FullHamiltonian:
    """Hermitian matrix on spin_index * N + phonon, with a lazily computed spectrum."""

    matrix: np.ndarray
    n_phonon: int
    _spectrum: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> Tuple[np.ndarray, np.ndarray]:
        if self._spectrum is None:
            started = time.perf_counter()
            self._spectrum = np.linalg.eigh(self.matrix)
            logger.debug(
                "diagonalized full hamiltonian",
                extra={"dimension": self.dimension,
                       "duration_ms": round((time.perf_counter() - started) * 1000, 2)},
            )
        return self._spectrum


@dataclass(frozen=True)
class OracleSeries:
    values: np.ndarray
    max_norm_error: float
    max_energy_drift: float


def _orbital_diagonal(p: ModelParams) -> np.ndarray:
    """Orbital and polaron energy for each of the 24 spin indices."""
    # spin index orbital*4 + j; Table I row of that orbital sector decides the occupancy
    out = np.empty(N_SPIN)
    for orbital in range(N_SPIN // N_NUCLEAR):
        if orbital in SINGLY_CONFIGS:
            n1, n2 = row_occupancy(1)
        elif orbital == ACCEPTOR_DOUBLE:
            n1, n2 = row_occupancy(21)
        else:
            n1, n2 = row_occupancy(17)
        polaron = p.phi * (n1 - n2)
        value = p.epsilon1 * n1 + p.epsilon2 * n2 - p.hbar_omega * polaron * polaron
        out[orbital * N_NUCLEAR:(orbital + 1) * N_NUCLEAR] = value
    return out


def build_full_hamiltonian(p: ModelParams, n: Optional[int] = None) -> FullHamiltonian:
    """
    H̃ = H̃⁰ + H̃⁽¹⁾ in the product basis (orbital, nuclear, phonon).

    Raises:
        DimensionCapError: if 24·N exceeds ORACLE_MAX_DIM or N < 2
    """
    n = p.n_phonon if n is None else n
    if n < 2:
        raise DimensionCapError("oracle needs at least two phonon levels", dimension=n, cap=2)
    dim = N_SPIN * n
    if dim > settings.ORACLE_MAX_DIM:
        raise DimensionCapError(
            f"oracle dimension {dim} exceeds cap {settings.ORACLE_MAX_DIM}",
            dimension=dim, cap=settings.ORACLE_MAX_DIM,
        )

    spin = spin_hamiltonian(p) + np.diag(_orbital_diagonal(p))
    ladder = np.diag(np.arange(n) * p.hbar_omega)
    forward, backward = hopping_spin_operators()
    d_forward = displacement_matrix(-2.0 * p.phi, n).matrix
    d_backward = displacement_matrix(2.0 * p.phi, n).matrix

    h = np.kron(spin, np.eye(n)) + np.kron(np.eye(N_SPIN), ladder)
    h = h - p.tunneling_J * (np.kron(forward, d_forward) + np.kron(backward, d_backward))

    defect = float(np.max(np.abs(h - h.conj().T)))
    if defect > HERMITICITY_TOL * max(float(np.max(np.abs(h))), 1e-300):
        raise NumericalError("full hamiltonian is not hermitian", details={"defect": defect})
    return FullHamiltonian(matrix=h, n_phonon=n)


def _initial_branches(initial: str, theta: float, n: int) -> np.ndarray:
    """Columns (j, m) in j-major order, each |pair⟩|χ_j⟩|m⟩ on the full space."""
    pair = rotate_y(SINGLET if initial == "singlet" else TRIPLET, theta)
    spin_states = initial_spin_states(pair, theta, settings.NUCLEI_CO_ROTATE)   # (24, 4)
    return np.kron(spin_states, np.eye(n))                                       # (24n, 4n)


def _observable_weights(observable: Observable, states: np.ndarray, n: int) -> np.ndarray:
    """⟨ψ|Π|ψ⟩ for a stack of states shaped (dim, ...)."""
    if observable in OCCUPANCY_SECTORS:
        spin_rows = sector_indices(OCCUPANCY_SECTORS[observable])
        rows = (spin_rows[:, None] * n + np.arange(n)[None, :]).ravel()
        return np.sum(np.abs(states[rows]) ** 2, axis=0)
    if observable == "singlet":
        orbital_singlet = np.zeros(N_SPIN // N_NUCLEAR, dtype=complex)
        orbital_singlet[list(SINGLY_CONFIGS)] = SINGLET
        shaped = states.reshape((N_SPIN // N_NUCLEAR, N_NUCLEAR * n) + states.shape[1:])
        amplitude = np.tensordot(orbital_singlet.conj(), shaped, axes=(0, 0))
        return np.sum(np.abs(amplitude) ** 2, axis=0)
    raise ValidationError(f"unknown observable '{observable}'")


def evolve_probability(p: ModelParams, initial: str, observable: Observable, times: Sequence[float],
                       hamiltonian: Optional[FullHamiltonian] = None) -> OracleSeries:
    """
    Thermal and nuclear average of ⟨Π⟩(t) over the pure branches (j, m).

    Raises:
        NumericalError: if any branch loses norm beyond 1e-10
    """
    h = hamiltonian if hamiltonian is not None else build_full_hamiltonian(p)
    n = h.n_phonon
    if n != p.n_phonon:
        raise ValidationError("oracle cutoff must match the parameter cutoff",
                              details={"oracle": n, "params": p.n_phonon})
    times = np.asarray(times, dtype=float)
    energies, vectors = h.spectrum()

    branches = _initial_branches(initial, p.theta, n)
    projected = vectors.conj().T @ branches                      # (dim, 4n)
    mean_energy = np.sum(energies[:, None] * np.abs(projected) ** 2, axis=0)

    weights = np.tile(p.averaging_weights(), N_NUCLEAR) / N_NUCLEAR
    values = np.empty(times.shape)
    max_norm_error = 0.0
    max_energy_drift = 0.0
    for k, t in enumerate(times):
        phases = np.exp(-1j * energies * t / HBAR_EV_S)
        states = vectors @ (phases[:, None] * projected)
        norms = np.sum(np.abs(states) ** 2, axis=0)
        max_norm_error = max(max_norm_error, float(np.max(np.abs(norms - 1.0))))
        evolved = vectors.conj().T @ states
        drift = np.abs(np.sum(energies[:, None] * np.abs(evolved) ** 2, axis=0) - mean_energy)
        max_energy_drift = max(max_energy_drift, float(np.max(drift)))
        values[k] = float(np.dot(weights, _observable_weights(observable, states, n)))

    if max_norm_error > NORM_TOL:
        raise NumericalError("branch norm not conserved", details={"max_norm_error": max_norm_error})
    return OracleSeries(values=values, max_norm_error=max_norm_error, max_energy_drift=max_energy_drift)


def exact_level_near(h: FullHamiltonian, target: float) -> float:
    energies, _ = h.spectrum()
    return float(energies[int(np.argmin(np.abs(energies - target)))])


def recurrence_time(p: ModelParams) -> float:
    """2π/ω, the phonon ladder recurrence."""
    return 2.0 * math.pi / p.omega
