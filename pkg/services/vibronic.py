"""
Phonon-space machinery: displacement matrices, unperturbed energies and the
polaron-dressed tunneling term.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from exceptions import DimensionCapError
from models.params import N_SPIN, ModelParams
from services.fock_space import embed_orbital, hopping_operator
from services.spin_system import SpinEigensystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DisplacementMatrix:
    """Truncated ⟨n|exp(λ(b† - b))|m⟩, row n, column m."""

    lam: float
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@lru_cache(maxsize=64)
def displacement_matrix(lam: float, n: int) -> DisplacementMatrix:
    """
    Closed-form displacement matrix elements.

    For n >= m: e^{-λ²/2} λ^{n-m} √(m!/n!) L_m^{(n-m)}(λ²); the n < m half follows
    from ⟨n|D(λ)|m⟩ = ⟨m|D(-λ)|n⟩.
    """
    if n < 1:
        raise DimensionCapError("phonon cutoff must be at least 1", dimension=n, cap=1)
    lam = float(lam)
    if lam == 0.0:
        return DisplacementMatrix(lam=lam, matrix=np.eye(n))

    rows, cols = np.indices((n, n))
    low = np.minimum(rows, cols)
    high = np.maximum(rows, cols)
    k = high - low
    x = lam * lam

    laguerre = eval_genlaguerre(low, k, x)
    log_mag = k * np.log(abs(lam)) - 0.5 * x + 0.5 * (gammaln(low + 1) - gammaln(high + 1))
    # λ^k below the diagonal, (-λ)^k above it
    sign = np.where(rows >= cols, np.sign(lam) ** k, np.sign(-lam) ** k)
    matrix = sign * np.exp(log_mag) * laguerre
    matrix.setflags(write=False)
    return DisplacementMatrix(lam=lam, matrix=matrix)


def displacement_by_expm(lam: float, n: int) -> np.ndarray:
    """exp(λ(b† - b)) of the truncated ladder operators."""
    b = np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1)
    return expm(lam * (b.T - b))


def cross_validate_displacement(lam: float, n: int) -> float:
    """Max deviation between closed form and matrix exponential on indices < n/2."""
    block = n // 2
    if block < 1:
        raise DimensionCapError(
            "cutoff too small for the cross-validation block", dimension=n, cap=2
        )
    closed = displacement_matrix(lam, n).matrix[:block, :block]
    oracle = displacement_by_expm(lam, n)[:block, :block]
    deviation = float(np.max(np.abs(closed - oracle)))
    logger.debug("displacement cross-check", extra={"lam": lam, "n": n, "deviation": deviation})
    return deviation


# ==========================================
# ENERGIES AND TUNNELING
# ==========================================

def row_occupancy(q: int) -> tuple:
    """(n1, n2) for Table I row q (1-based)."""
    if q <= 16:
        return 1, 1
    if q <= 20:
        return 2, 0
    return 0, 2


def orbital_energy(q: int, p: ModelParams) -> float:
    """Σ_j ε_j n_j - ħω(Σ_j φ_j n_j)² with φ1 = -φ2 = φ."""
    n1, n2 = row_occupancy(q)
    polaron = p.phi * (n1 - n2)
    return p.epsilon1 * n1 + p.epsilon2 * n2 - p.hbar_omega * polaron * polaron


def h0_energy(m: int, q: int, p: ModelParams, eig: SpinEigensystem) -> float:
    """E⁰_mq = mħω + E_sq + orbital and polaron terms."""
    return m * p.hbar_omega + eig.energies[q - 1] + orbital_energy(q, p)


def unperturbed_energies(p: ModelParams, eig: SpinEigensystem, n: int = None) -> np.ndarray:
    """E⁰ as an (n_phonon, 24) array."""
    n = p.n_phonon if n is None else n
    rows = np.array([orbital_energy(q, p) for q in range(1, N_SPIN + 1)]) + eig.energies
    return np.arange(n)[:, None] * p.hbar_omega + rows[None, :]


@lru_cache(maxsize=None)
def hopping_spin_operators() -> tuple:
    """Spin-space hops (1→2, 2→1) as 24x24 real matrices."""
    forward = embed_orbital(hopping_operator(1, 2)).real
    return forward, forward.T.copy()


class VibronicCoupling:
    """
    Matrix elements of the transformed tunneling term in the Table I ⊗ phonon basis.

    Hopping from site 1 to site 2 carries D(-2φ); the reverse hop carries D(+2φ).
    """

    def __init__(self, p: ModelParams, eig: SpinEigensystem):
        self.params = p
        self.eig = eig
        self.n_phonon = p.n_phonon
        forward, backward = hopping_spin_operators()
        phi_dag = eig.states.conj().T
        self.forward = np.real_if_close(phi_dag @ forward @ eig.states)
        self.backward = np.real_if_close(phi_dag @ backward @ eig.states)
        self.d_forward = displacement_matrix(-2.0 * p.phi, self.n_phonon).matrix
        self.d_backward = displacement_matrix(2.0 * p.phi, self.n_phonon).matrix

    def element(self, n: int, p_row: int, m: int, q_row: int) -> complex:
        """⟨n, φ_p|H̃⁽¹⁾|m, φ_q⟩ with 1-based Table I rows."""
        J = self.params.tunneling_J
        a, b = p_row - 1, q_row - 1
        return -J * (
            self.forward[a, b] * self.d_forward[n, m]
            + self.backward[a, b] * self.d_backward[n, m]
        )

    def block(self, final_rows: np.ndarray, source_rows: np.ndarray, m: int) -> np.ndarray:
        """H̃⁽¹⁾[n, p, q] for all n, selected final rows p and source rows q (0-based)."""
        J = self.params.tunneling_J
        fwd = self.forward[np.ix_(final_rows, source_rows)]
        bwd = self.backward[np.ix_(final_rows, source_rows)]
        return -J * (
            fwd[None, :, :] * self.d_forward[:, m][:, None, None]
            + bwd[None, :, :] * self.d_backward[:, m][:, None, None]
        )


def h1_matrix_element(n: int, p_row: int, m: int, q_row: int, p: ModelParams, eig: SpinEigensystem) -> complex:
    return VibronicCoupling(p, eig).element(n, p_row, m, q_row)