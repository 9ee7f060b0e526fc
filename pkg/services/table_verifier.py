"""
Entry-by-entry checks of the published eigenstate, rate-coefficient and
interconversion tables against matrix elements built from Pauli and fermionic
operators.

Numeric values are treated as ground truth. A printed entry that disagrees is
reported with both values and never corrected.
"""

import csv
import io
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from config import settings
from models.params import HBAR_EV_S, N_NUCLEAR, ModelParams
from models.results import ReportRow
from services.closed_forms import Angles, conversion_coefficients, rate_coefficients
from services.spin_system import (
    SINGLET,
    TRIPLET,
    SpinEigensystem,
    initial_spin_states,
    rotate_y,
    spin_hamiltonian,
    table1_eigensystem,
)
from services.vibronic import hopping_spin_operators

logger = logging.getLogger(__name__)

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_MATCH = "match"
STATUS_DISCREPANCY = "suspected transcription discrepancy"

CHANNELS = range(1, 17)
ACCEPTOR_ROWS = range(21, 25)


# ==========================================
# TABLE I
# ==========================================

def verify_table1(p: ModelParams) -> List[ReportRow]:
    """Residual, orthonormality and eigenspace defect for each of the 24 rows."""
    eig = table1_eigensystem(p)
    h = spin_hamiltonian(p)
    states = eig.states
    scale = max(float(np.max(np.abs(eig.energies))), float(np.max(np.abs(h))), np.finfo(float).tiny)

    residuals = np.linalg.norm(h @ states - states * eig.energies, axis=0) / scale
    gram = states.conj().T @ states
    ortho = np.max(np.abs(gram - np.eye(gram.shape[0])), axis=0)

    numeric_e, numeric_v = np.linalg.eigh(h)
    rows = []
    for q in range(1, states.shape[1] + 1):
        energy = eig.energies[q - 1]
        # projector onto the numeric eigenspace at this energy; well defined under degeneracy
        block = numeric_v[:, np.abs(numeric_e - energy) <= 1e-9 * scale]
        phi = states[:, q - 1]
        eigenspace_defect = float(np.linalg.norm(phi - block @ (block.conj().T @ phi)))
        deviation = max(float(residuals[q - 1]), float(ortho[q - 1]), eigenspace_defect)
        status = STATUS_PASS if deviation <= settings.TABLE_RESIDUAL_TOL else STATUS_FAIL
        rows.append(ReportRow(
            table="I",
            entry=f"row {q}",
            max_deviation=deviation,
            status=status,
            detail=f"E={energy!r}",
        ))
    failed = [r.entry for r in rows if r.status == STATUS_FAIL]
    logger.info("table I verified", extra={"rows": len(rows), "failed": len(failed)})
    return rows


# ==========================================
# NUMERIC CHANNEL COEFFICIENTS
# ==========================================

def _expansion(pair: np.ndarray, big_theta: float, eig: SpinEigensystem) -> np.ndarray:
    """⟨φ_q|pair ⊗ χ_j⟩ as (4, 24); nuclei left unrotated."""
    columns = initial_spin_states(rotate_y(pair, big_theta), big_theta, co_rotate=False)
    return (eig.states.conj().T @ columns).T


def numeric_rate_channels(big_theta: float, eig: SpinEigensystem) -> np.ndarray:
    """2|c_jq ⟨φ_p|hop|φ_q⟩|² as (j, p - 21, q - 1) over the singly occupied channels."""
    forward, _ = hopping_spin_operators()
    hop = eig.states.conj().T @ forward @ eig.states
    c = _expansion(TRIPLET, big_theta, eig)[:, :16]
    h = hop[20:24, :16]
    return 2.0 * np.abs(c[:, None, :] * h[None, :, :]) ** 2


def numeric_conversion_channels(big_theta: float, eig: SpinEigensystem) -> np.ndarray:
    """⟨t̃χ_j|φ_q⟩⟨φ_q|sχ_k⟩ as (j, k, q - 1)."""
    left = _expansion(TRIPLET, big_theta, eig)[:, :16]
    right = _expansion(SINGLET, big_theta, eig)[:, :16]
    return np.einsum("jq,kq->jkq", left.conj(), right)


def _angles(big_theta: float, eig: SpinEigensystem) -> Angles:
    return Angles(big_theta=big_theta, theta1=eig.site1.mixing_angle, theta2=eig.site2.mixing_angle)


def _compare(label: str, table: str, per_theta: List[Tuple[float, np.ndarray, Dict[int, float]]]) -> ReportRow:
    """Max deviation over Θ and channels between numeric arrays (index q-1) and printed maps."""
    worst, worst_detail = 0.0, ""
    for big_theta, numeric, printed in per_theta:
        printed_vec = np.zeros(16, dtype=numeric.dtype)
        for q, value in printed.items():
            printed_vec[q - 1] += value
        diff = np.abs(numeric - printed_vec)
        k = int(np.argmax(diff))
        if diff[k] > worst:
            worst = float(diff[k])
            worst_detail = (
                f"Theta={big_theta!r} channel={k + 1} numeric={complex(numeric[k]).real!r} "
                f"printed={complex(printed_vec[k]).real!r}"
            )
    status = STATUS_MATCH if worst <= settings.TABLE_MATCH_TOL else STATUS_DISCREPANCY
    return ReportRow(table=table, entry=label, max_deviation=worst, status=status,
                     detail=worst_detail if status != STATUS_MATCH else "")


# ==========================================
# TABLE II
# ==========================================

def verify_table2(p: ModelParams, theta_grid: Sequence[float]) -> List[ReportRow]:
    """Compare every R_{j,mn,p} channel coefficient over the Θ grid."""
    eig = table1_eigensystem(p)
    numeric = {float(t): numeric_rate_channels(float(t), eig) for t in theta_grid}
    rows = []
    for j in range(1, N_NUCLEAR + 1):
        for p_row in ACCEPTOR_ROWS:
            per_theta = [
                (t, values[j - 1, p_row - 21], rate_coefficients(j, p_row, _angles(t, eig)))
                for t, values in numeric.items()
            ]
            rows.append(_compare(f"R[{j},{p_row}]", "II", per_theta))
    flagged = [r.entry for r in rows if r.status == STATUS_DISCREPANCY]
    if flagged:
        logger.warning("table II entries disagree with numeric coefficients", extra={"entries": flagged})
    return rows


# ==========================================
# TABLE III
# ==========================================

def verify_table3(p: ModelParams, theta_grid: Sequence[float], t_grid: Sequence[float]) -> List[ReportRow]:
    """
    Compare every D_{m,j,k} channel coefficient, the assembled time series, and
    the bra-ket reciprocity |⟨t̃χ_j|U|sχ_k⟩| = |⟨sχ_k|U|t̃χ_j⟩|.
    """
    eig = table1_eigensystem(p)
    t_grid = np.asarray(t_grid, dtype=float)
    phases = np.exp(-1j * np.outer(t_grid, eig.energies[:16]) / HBAR_EV_S)    # (t, q)
    numeric = {float(t): numeric_conversion_channels(float(t), eig) for t in theta_grid}

    rows = []
    series_worst = 0.0
    for j in range(1, N_NUCLEAR + 1):
        for k in range(1, N_NUCLEAR + 1):
            per_theta = []
            for big_theta, values in numeric.items():
                printed = conversion_coefficients(j, k, _angles(big_theta, eig))
                per_theta.append((big_theta, values[j - 1, k - 1], printed))
                printed_vec = np.zeros(16, dtype=complex)
                for q, value in printed.items():
                    printed_vec[q - 1] += value
                if t_grid.size:
                    gap = np.abs(phases @ (values[j - 1, k - 1] - printed_vec))
                    series_worst = max(series_worst, float(np.max(gap)))
            rows.append(_compare(f"D[{j},{k}]", "III", per_theta))

    rows.append(ReportRow(
        table="III",
        entry="time series",
        max_deviation=series_worst,
        status=STATUS_MATCH if series_worst <= settings.TABLE_MATCH_TOL else STATUS_DISCREPANCY,
    ))
    rows.append(reciprocity_check(p, theta_grid, t_grid, eig))
    flagged = [r.entry for r in rows if r.status == STATUS_DISCREPANCY]
    if flagged:
        logger.warning("table III entries disagree with numeric amplitudes", extra={"entries": flagged})
    return rows


def reciprocity_check(p: ModelParams, theta_grid: Sequence[float], t_grid: Sequence[float],
                      eig: SpinEigensystem = None) -> ReportRow:
    """Evolve with the numerically diagonalized spin Hamiltonian and compare bra-ket swapped magnitudes."""
    eig = eig if eig is not None else table1_eigensystem(p)
    energies, vectors = np.linalg.eigh(spin_hamiltonian(p))
    worst = 0.0
    for big_theta in theta_grid:
        left = initial_spin_states(rotate_y(TRIPLET, big_theta), big_theta, co_rotate=False)
        right = initial_spin_states(rotate_y(SINGLET, big_theta), big_theta, co_rotate=False)
        lv = vectors.conj().T @ left
        rv = vectors.conj().T @ right
        for t in t_grid:
            phase = np.exp(-1j * energies * t / HBAR_EV_S)
            forward = lv.conj().T @ (phase[:, None] * rv)          # ⟨t̃χ_j|U|sχ_k⟩
            backward = rv.conj().T @ (phase[:, None] * lv)         # ⟨sχ_k|U|t̃χ_j⟩
            worst = max(worst, float(np.max(np.abs(np.abs(forward) - np.abs(backward).T))))
    status = STATUS_PASS if worst <= settings.TABLE_MATCH_TOL else STATUS_FAIL
    return ReportRow(table="III", entry="reciprocity", max_deviation=worst, status=status)


# ==========================================
# REPORTING
# ==========================================

def has_failures(rows: Sequence[ReportRow]) -> bool:
    """Residual failures only; printed-table discrepancies are warnings."""
    return any(r.status == STATUS_FAIL for r in rows)


def report_to_csv(rows: Sequence[ReportRow], metadata: Dict[str, object] = None) -> str:
    buffer = io.StringIO()
    for key, value in sorted((metadata or {}).items()):
        buffer.write(f"#{key}={value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["table", "entry", "max_deviation", "status", "detail"])
    for r in rows:
        writer.writerow([r.table, r.entry, format(r.max_deviation, f".{settings.FLOAT_DIGITS}g"), r.status, r.detail])
    return buffer.getvalue()
