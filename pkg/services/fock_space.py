"""
Two-electron, two-nucleus spin space and its operators.

Electron modes are ordered (1↑, 1↓, 2↑, 2↓); a two-electron configuration
c†_a c†_b|0> with a < b is one of six orbital fillings. Nuclear basis states
follow |χ1..χ4> = |↓↓>, |↓↑>, |↑↓>, |↑↑> (site-1 nucleus first). The 24-dim spin
index is ``orbital * 4 + (nuclear - 1)``; the full index appends the phonon
number as the fastest-varying digit.
"""

from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np

from models.params import BasisState, N_NUCLEAR, N_ORBITAL, N_SPIN

UP, DOWN = 0, 1

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

N_MODES = 4
ORBITAL_CONFIGS: Tuple[Tuple[int, int], ...] = tuple(combinations(range(N_MODES), 2))
DONOR_DOUBLE = ORBITAL_CONFIGS.index((0, 1))
ACCEPTOR_DOUBLE = ORBITAL_CONFIGS.index((2, 3))
SINGLY_CONFIGS = tuple(i for i in range(N_ORBITAL) if i not in (DONOR_DOUBLE, ACCEPTOR_DOUBLE))

# kron index (n1, n2) with up=0 for each nuclear basis state chi_1..chi_4
CHI_KRON_ORDER = (3, 2, 1, 0)


def mode(site: int, spin: int) -> int:
    return 2 * (site - 1) + spin


def spin_index(orbital: int, nuclear: int) -> int:
    return orbital * N_NUCLEAR + (nuclear - 1)


def flatten(state: BasisState, n_phonon: int) -> int:
    if state.phonon_number >= n_phonon:
        raise IndexError(f"phonon number {state.phonon_number} outside cutoff {n_phonon}")
    return spin_index(state.orbital_config, state.nuclear_config) * n_phonon + state.phonon_number


def unflatten(index: int, n_phonon: int) -> BasisState:
    if not 0 <= index < N_SPIN * n_phonon:
        raise IndexError(f"index {index} outside basis of size {N_SPIN * n_phonon}")
    s, m = divmod(index, n_phonon)
    orbital, nuclear = divmod(s, N_NUCLEAR)
    return BasisState(orbital_config=orbital, nuclear_config=nuclear + 1, phonon_number=m)


# ==========================================
# FERMIONIC OPERATORS
# ==========================================

@lru_cache(maxsize=None)
def _fock_annihilators() -> Tuple[np.ndarray, ...]:
    """Jordan-Wigner annihilators on the 16-dim Fock space, mode 0 most significant."""
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    ops = []
    for k in range(N_MODES):
        factors = [z] * k + [a] + [np.eye(2)] * (N_MODES - k - 1)
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        ops.append(op)
    return tuple(ops)


@lru_cache(maxsize=None)
def _two_electron_embedding() -> np.ndarray:
    """Columns are c†_a c†_b|0> for each orbital config, as 16-dim Fock vectors."""
    c = _fock_annihilators()
    vacuum = np.zeros(2 ** N_MODES)
    vacuum[0] = 1.0
    cols = [c[a].T @ (c[b].T @ vacuum) for a, b in ORBITAL_CONFIGS]
    return np.column_stack(cols)


def two_electron_operator(terms: Dict[Tuple[int, int], complex]) -> np.ndarray:
    """Restrict Σ coeff · c†_i c_j to the six two-electron configurations."""
    c = _fock_annihilators()
    op = np.zeros((2 ** N_MODES, 2 ** N_MODES), dtype=complex)
    for (i, j), coeff in terms.items():
        op += coeff * (c[i].T @ c[j])
    p = _two_electron_embedding()
    return p.T @ op @ p


@lru_cache(maxsize=None)
def electron_spin_operators(site: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S_x, S_y, S_z) for the electrons on one site, Pauli normalized, 6x6."""
    ops = []
    for sigma in PAULI:
        terms = {
            (mode(site, a), mode(site, b)): sigma[a, b]
            for a in (UP, DOWN) for b in (UP, DOWN) if sigma[a, b] != 0
        }
        ops.append(two_electron_operator(terms))
    return tuple(ops)


@lru_cache(maxsize=None)
def hopping_operator(source: int, target: int) -> np.ndarray:
    """Σ_α c†_{target,α} c_{source,α} on the six orbital configs (real)."""
    terms = {(mode(target, s), mode(source, s)): 1.0 for s in (UP, DOWN)}
    return two_electron_operator(terms).real


# ==========================================
# NUCLEAR OPERATORS
# ==========================================

@lru_cache(maxsize=None)
def nuclear_spin_operators(site: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pauli operators of one nucleus in the chi basis, 4x4."""
    order = list(CHI_KRON_ORDER)
    ops = []
    for sigma in PAULI:
        full = np.kron(sigma, ID2) if site == 1 else np.kron(ID2, sigma)
        ops.append(full[np.ix_(order, order)])
    return tuple(ops)


def nuclear_state(j: int) -> np.ndarray:
    v = np.zeros(N_NUCLEAR, dtype=complex)
    v[j - 1] = 1.0
    return v


# ==========================================
# EMBEDDINGS INTO THE 24-DIM SPIN SPACE
# ==========================================

def embed_orbital(op: np.ndarray) -> np.ndarray:
    return np.kron(op, np.eye(N_NUCLEAR))


def product_to_spin_space(psi: np.ndarray) -> np.ndarray:
    """
    Map a 16-vector in the (e1, n1, e2, n2) product basis of two singly occupied
    sites onto the 24-dim spin space.
    """
    t = np.asarray(psi, dtype=complex).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    t = t[:, list(CHI_KRON_ORDER)]
    out = np.zeros((N_ORBITAL, N_NUCLEAR), dtype=complex)
    # electron pair (e1, e2) with up=0 maps to configs (1↑2↑, 1↑2↓, 1↓2↑, 1↓2↓)
    out[list(SINGLY_CONFIGS), :] = t
    return out.reshape(N_SPIN)


def electron_pair_to_orbital(pair: np.ndarray) -> np.ndarray:
    """Map a two-spin vector (|↑↑>, |↑↓>, |↓↑>, |↓↓>) onto the six orbital configs."""
    out = np.zeros(N_ORBITAL, dtype=complex)
    out[list(SINGLY_CONFIGS)] = pair
    return out


def double_occupancy_state(site: int, nuclear: int) -> np.ndarray:
    v = np.zeros(N_SPIN, dtype=complex)
    orbital = DONOR_DOUBLE if site == 1 else ACCEPTOR_DOUBLE
    v[spin_index(orbital, nuclear)] = 1.0
    return v


def sector_indices(orbitals: List[int]) -> np.ndarray:
    return np.array([spin_index(o, j) for o in orbitals for j in range(1, N_NUCLEAR + 1)])


def occupancy(orbital: int) -> Tuple[int, int]:
    """Electron count on (site 1, site 2)."""
    a, b = ORBITAL_CONFIGS[orbital]
    n1 = sum(1 for m in (a, b) if m < 2)
    return n1, 2 - n1
