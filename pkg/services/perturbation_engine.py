"""
First-order perturbation theory in the tunneling term.

Covers reaction probabilities at finite τ, the golden-rule rate with Lorentzian
broadening, and the zeroth-order triplet→singlet interconversion. Thermal
averages run over the phonon ladder with ``ModelParams.averaging_weights`` and
over the four nuclear configurations with weight ¼.
"""

import logging
import math
import time
from typing import Iterable, List, Literal, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from config import settings
from exceptions import NumericalError, ValidationError
from models.params import HBAR_EV_S, MU_B_EV_T, N_NUCLEAR, N_SPIN, ModelParams
from models.results import AmplitudeTable, BroadeningScan, ProbabilityResult, RateResult, ScanPoint
from services.spin_system import (
    SINGLET,
    TRIPLET,
    SpinEigensystem,
    initial_spin_states,
    mixing_angle,
    rotate_y,
    spin_energy_groups,
    table1_eigensystem,
)
from services.vibronic import VibronicCoupling, unperturbed_energies

logger = logging.getLogger(__name__)

SINGLY_ROWS = np.arange(16)
DONOR_ROWS = np.arange(16, 20)
ACCEPTOR_ROWS = np.arange(20, 24)
DOUBLY_ROWS = np.arange(16, 24)

InitialLabel = Literal["singlet", "triplet"]


def amplitude_factor(delta_e: np.ndarray, tau: float) -> np.ndarray:
    """
    (e^{iΔE τ/ħ} - 1)/ΔE, switching to (iτ/ħ)(1 + iΔEτ/2ħ) when |ΔE τ/ħ| is
    below SERIES_SWITCH.
    """
    delta_e = np.asarray(delta_e, dtype=float)
    x = delta_e * tau / HBAR_EV_S
    small = np.abs(x) < settings.SERIES_SWITCH
    safe = np.where(small, 1.0, delta_e)
    exact = (np.exp(1j * x) - 1.0) / safe
    series = (1j * tau / HBAR_EV_S) * (1.0 + 0.5j * x)
    return np.where(small, series, exact)


def lorentzian(x: np.ndarray, eta: float) -> np.ndarray:
    """Unit-area Lorentzian of half-width η."""
    return (eta / math.pi) / (np.asarray(x) ** 2 + eta * eta)


def _pair_vector(initial: InitialLabel, theta: float) -> np.ndarray:
    if initial == "singlet":
        return rotate_y(SINGLET, theta)
    if initial == "triplet":
        return rotate_y(TRIPLET, theta)
    raise ValidationError(f"unknown initial spin state '{initial}'", details={"initial": initial})


def _final_rows(final_sector: str) -> np.ndarray:
    if final_sector == "acceptor":
        return ACCEPTOR_ROWS
    if final_sector == "all":
        # first-order amplitudes vanish on the singly occupied rows
        return DOUBLY_ROWS
    raise ValidationError(f"unknown final sector '{final_sector}'", details={"final_sector": final_sector})


class PerturbationEngine:
    """
    Holds the Table I eigensystem, unperturbed ladder and tunneling couplings for
    one validated parameter set.
    """

    def __init__(self, p: ModelParams, eig: Optional[SpinEigensystem] = None):
        self.params = p
        self.eig = eig if eig is not None else table1_eigensystem(p)
        self.coupling = VibronicCoupling(p, self.eig)
        self.energies = unperturbed_energies(p, self.eig)
        self.n_phonon = p.n_phonon

    # ------------------------------------------
    # Initial state
    # ------------------------------------------

    def initial_expansion(self, initial: InitialLabel, j: int, m: int = 0, co_rotate: Optional[bool] = None) -> np.ndarray:
        """c_jmq = ⟨ψ⁰_mq|state⟩|χ_j⟩|m⟩ over q = 1..24 (independent of m)."""
        if not 1 <= j <= N_NUCLEAR:
            raise ValidationError("nuclear index must lie in 1..4", details={"j": j})
        if not 0 <= m < self.n_phonon:
            raise ValidationError("phonon index outside the cutoff", details={"m": m})
        return self._expansions(initial, co_rotate)[j - 1]

    def _expansions(self, initial: InitialLabel, co_rotate: Optional[bool] = None) -> np.ndarray:
        co_rotate = settings.NUCLEI_CO_ROTATE if co_rotate is None else co_rotate
        theta = self.params.theta
        columns = initial_spin_states(_pair_vector(initial, theta), theta, co_rotate)
        return (self.eig.states.conj().T @ columns).T   # (4, 24)

    # ------------------------------------------
    # First-order amplitudes
    # ------------------------------------------

    def first_order_amplitude(self, n: int, p_row: int, source: np.ndarray, m: int, tau: float) -> complex:
        """-Σ_q c_mq(0) H̃⁽¹⁾_{np,mq} (e^{iω τ} - 1)/(ħω) for a 1-based target row."""
        source = np.asarray(source, dtype=complex)
        h = np.array([self.coupling.element(n, p_row, m, q) for q in range(1, N_SPIN + 1)])
        delta_e = self.energies[n, p_row - 1] - self.energies[m, :]
        factor = amplitude_factor(delta_e, tau)
        support = source != 0
        return complex(-np.sum(source[support] * h[support] * factor[support]))

    def amplitude_table(self, initial: InitialLabel, j: int, m: int, tau: float) -> AmplitudeTable:
        """Zeroth order on the initial sector plus first order on the doubly occupied rows."""
        c0 = self.initial_expansion(initial, j, m)
        amplitudes = np.zeros((self.n_phonon, N_SPIN), dtype=complex)
        amplitudes[m, :] = c0
        h = self.coupling.block(DOUBLY_ROWS, SINGLY_ROWS, m)
        delta_e = self.energies[:, DOUBLY_ROWS][:, :, None] - self.energies[m, SINGLY_ROWS][None, None, :]
        amplitudes[:, DOUBLY_ROWS] += -np.einsum("q,npq->np", c0[SINGLY_ROWS], h * amplitude_factor(delta_e, tau))
        return AmplitudeTable(amplitudes=amplitudes, initial=c0, nuclear_index=j, phonon_index=m, tau=tau)

    def branch_probabilities(self, initial: InitialLabel, tau: float, final_sector: str = "acceptor") -> np.ndarray:
        """Σ_{j,n,p} |c_np(τ)|² for each initial phonon level m."""
        if tau < 0:
            raise ValidationError("tau must be non-negative", details={"tau": tau})
        rows = _final_rows(final_sector)
        coeffs = self._expansions(initial)[:, SINGLY_ROWS]    # (4, 16)
        out = np.empty(self.n_phonon)
        for m in range(self.n_phonon):
            h = self.coupling.block(rows, SINGLY_ROWS, m)
            delta_e = self.energies[:, rows][:, :, None] - self.energies[m, SINGLY_ROWS][None, None, :]
            amp = -np.einsum("jq,npq->jnp", coeffs, h * amplitude_factor(delta_e, tau))
            out[m] = float(np.sum(np.abs(amp) ** 2))
        return out

    def reaction_probability(self, initial: InitialLabel, tau: float, final_sector: str = "acceptor") -> ProbabilityResult:
        weights = self.params.averaging_weights()
        value = 0.25 * float(np.dot(weights, self.branch_probabilities(initial, tau, final_sector)))
        flags = ("perturbation_unreliable",) if value > settings.UNRELIABLE_PROBABILITY else ()
        return ProbabilityResult(value=value, flags=flags)

    # ------------------------------------------
    # Golden-rule rate
    # ------------------------------------------

    def reaction_rate(self, initial: InitialLabel, observation_time: Optional[float] = None) -> RateResult:
        """
        k = (πJ²/4ħ) Σ_m w_m Σ_{j,p,g} W[j,p,g] Σ_n |⟨n|D(-2φ)|m⟩|² L(ΔE),
        with spin weights W summed coherently over each degenerate spin level g.
        """
        p = self.params
        eta = p.eta
        if not eta > 0:
            raise ValidationError("broadening_eta must be positive", details={"eta": eta})

        coeffs = self._expansions(initial)[:, SINGLY_ROWS]                        # (4, 16)
        hop = self.coupling.forward[np.ix_(ACCEPTOR_ROWS, SINGLY_ROWS)]           # (4, 16)
        groups = spin_energy_groups(self.eig.energies[SINGLY_ROWS], settings.DEGENERACY_RTOL)

        weights_jpg = np.zeros((N_NUCLEAR, len(ACCEPTOR_ROWS), len(groups)))
        for g, members in enumerate(groups):
            amp = np.einsum("jq,pq->jp", coeffs[:, members], hop[:, members])
            weights_jpg[:, :, g] = 2.0 * np.abs(amp) ** 2

        franck_condon = np.abs(self.coupling.d_forward) ** 2                        # (n, m)
        ladder = (np.arange(self.n_phonon)[:, None] - np.arange(self.n_phonon)[None, :]) * p.hbar_omega
        gap = self.energies[0, ACCEPTOR_ROWS[0]] - self.energies[0, 0] + self.eig.energies[0]
        thermal = p.averaging_weights()
        spectral = np.empty((len(groups), self.n_phonon))
        for g, members in enumerate(groups):
            detuning = gap - self.eig.energies[members[0]]
            spectral[g] = np.sum(franck_condon * lorentzian(ladder + detuning, eta), axis=0)

        prefactor = math.pi * p.tunneling_J ** 2 / (4.0 * HBAR_EV_S)
        by_nuclear_final = prefactor * np.einsum("jpg,g->jp", weights_jpg, spectral @ thermal)
        by_phonon = prefactor * thermal * np.einsum("jpg,gm->m", weights_jpg, spectral)
        value = float(np.sum(by_nuclear_final))

        flags = ()
        if observation_time is not None and value * observation_time > settings.UNRELIABLE_RATE_TIME:
            flags = ("perturbation_unreliable",)
        return RateResult(
            value=value,
            eta=eta,
            by_nuclear_final=by_nuclear_final,
            by_phonon=by_phonon,
            flags=flags,
        )

    # ------------------------------------------
    # Second-order level shifts
    # ------------------------------------------

    def second_order_shifts(self) -> np.ndarray:
        """Σ_{n,p} |H̃⁽¹⁾_{np,mq}|²/(E⁰_mq - E⁰_np) for the singly occupied rows, shape (n_phonon, 16)."""
        shifts = np.empty((self.n_phonon, len(SINGLY_ROWS)))
        for m in range(self.n_phonon):
            h = self.coupling.block(DOUBLY_ROWS, SINGLY_ROWS, m)
            denom = self.energies[m, SINGLY_ROWS][None, None, :] - self.energies[:, DOUBLY_ROWS][:, :, None]
            coupled = np.abs(h) > 0
            if np.any(coupled & (denom == 0.0)):
                raise NumericalError("degenerate coupled levels in second-order shift", details={"m": m})
            ratio = np.where(coupled, np.abs(h) ** 2 / np.where(coupled, denom, 1.0), 0.0)
            shifts[m] = np.sum(ratio, axis=(0, 1))
        return shifts

    def first_order_mixing(self, m: int, q_row: int, n: int, p_row: int) -> complex:
        """Admixture H̃⁽¹⁾_{np,mq}/(E⁰_mq - E⁰_np) of |n, φ_p⟩ into |m, φ_q⟩."""
        denom = self.energies[m, q_row - 1] - self.energies[n, p_row - 1]
        element = self.coupling.element(n, p_row, m, q_row)
        if element == 0:
            return 0j
        if denom == 0.0:
            raise NumericalError("degenerate coupled levels", details={"m": m, "q": q_row, "n": n, "p": p_row})
        return complex(element / denom)

    def min_coupled_gap(self, tol: float = 1e-14) -> float:
        """Smallest |E⁰_mq - E⁰_np| over pairs joined by a nonzero tunneling element."""
        best = math.inf
        for m in range(self.n_phonon):
            h = self.coupling.block(DOUBLY_ROWS, SINGLY_ROWS, m)
            coupled = np.abs(h) > tol * max(abs(self.params.tunneling_J), np.finfo(float).tiny)
            if not np.any(coupled):
                continue
            gaps = np.abs(self.energies[m, SINGLY_ROWS][None, None, :] - self.energies[:, DOUBLY_ROWS][:, :, None])
            best = min(best, float(np.min(gaps[coupled])))
        return best

    # ------------------------------------------
    # Triplet → singlet interconversion
    # ------------------------------------------

    def conversion_amplitudes(self, times: Sequence[float], m: int = 0, shifts: Optional[np.ndarray] = None) -> np.ndarray:
        """D[t, j, k] = Σ_{q≤16} ⟨t̃χ_j|φ_q⟩⟨φ_q|sχ_k⟩ e^{-iE_mq t/ħ}."""
        times = np.asarray(times, dtype=float)
        left = self._expansions("triplet")[:, SINGLY_ROWS]    # (4, 16) = ⟨φ_q|t̃χ_j⟩
        right = self._expansions("singlet")[:, SINGLY_ROWS]
        overlap = np.einsum("jq,kq->jkq", left.conj(), right)
        levels = self.energies[m, SINGLY_ROWS]
        if shifts is not None:
            levels = levels + shifts[m]
        phases = np.exp(-1j * np.outer(times, levels) / HBAR_EV_S)
        return np.einsum("jkq,tq->tjk", overlap, phases)

    def conversion_series(self, times: Sequence[float]) -> np.ndarray:
        """P_{t→s}(t) = ¼ Σ_m w_m Σ_{jk} |D_mjk(t)|²."""
        times = np.asarray(times, dtype=float)
        if np.any(times < 0):
            raise ValidationError("time must be non-negative")
        weights = self.params.averaging_weights()
        if settings.ENERGY_CORRECTION_ORDER == 1:
            # phonon energy is a common phase at this order
            d = self.conversion_amplitudes(times)
            return 0.25 * float(np.sum(weights)) * np.sum(np.abs(d) ** 2, axis=(1, 2))
        shifts = self.second_order_shifts()
        total = np.zeros(times.shape)
        for m in range(self.n_phonon):
            d = self.conversion_amplitudes(times, m=m, shifts=shifts)
            total += weights[m] * np.sum(np.abs(d) ** 2, axis=(1, 2))
        return 0.25 * total

    # ------------------------------------------
    # Amplitude-equation integration
    # ------------------------------------------

    def integrate_amplitude_equation(self, initial: InitialLabel, j: int, m: int, tau: float,
                                     rows: Iterable[int] = tuple(ACCEPTOR_ROWS + 1)) -> np.ndarray:
        """
        Integrate iħ dc_np/dt = Σ_q H̃⁽¹⁾_{np,mq} e^{iω_{np,mq} t} c_mq(0) from c_np(0) = 0.

        Returns c_np(τ) with shape (n_phonon, len(rows)).
        """
        rows = np.asarray(list(rows)) - 1
        c0 = self.initial_expansion(initial, j, m)[SINGLY_ROWS]
        h = self.coupling.block(rows, SINGLY_ROWS, m)
        weighted = h * c0[None, None, :]
        omega = (self.energies[:, rows][:, :, None] - self.energies[m, SINGLY_ROWS][None, None, :]) / HBAR_EV_S
        shape = weighted.shape[:2]

        def rhs(t, _y):
            return (-1j / HBAR_EV_S) * np.sum(weighted * np.exp(1j * omega * t), axis=2).ravel()

        solution = solve_ivp(
            rhs, (0.0, tau), np.zeros(shape[0] * shape[1], dtype=complex),
            method="DOP853", rtol=1e-10, atol=1e-16,
        )
        if not solution.success:
            raise NumericalError("amplitude integration failed", details={"message": solution.message})
        return solution.y[:, -1].reshape(shape)


# ==========================================
# MODULE-LEVEL OPERATIONS
# ==========================================

def initial_expansion(initial: InitialLabel, j: int, m: int, p: ModelParams) -> np.ndarray:
    return PerturbationEngine(p).initial_expansion(initial, j, m)


def first_order_amplitude(target: tuple, source: np.ndarray, m: int, tau: float, p: ModelParams) -> complex:
    n, p_row = target
    return PerturbationEngine(p).first_order_amplitude(n, p_row, source, m, tau)


def reaction_probability(initial: InitialLabel, tau: float, p: ModelParams,
                         final_sector: str = "acceptor") -> ProbabilityResult:
    started = time.perf_counter()
    result = PerturbationEngine(p).reaction_probability(initial, tau, final_sector)
    logger.debug(
        "reaction probability",
        extra={"initial": initial, "tau": tau, "cutoff": p.n_phonon,
               "duration_ms": round((time.perf_counter() - started) * 1000, 2)},
    )
    return result


def reaction_rate(initial: InitialLabel, p: ModelParams, observation_time: Optional[float] = None) -> RateResult:
    return PerturbationEngine(p).reaction_rate(initial, observation_time)


def triplet_to_singlet_probability(t, p: ModelParams):
    """P_{t→s} at a single time (float) or over an array of times."""
    values = PerturbationEngine(p).conversion_series(np.atleast_1d(t))
    if np.ndim(t) == 0:
        return float(values[0])
    return values


def second_order_shifts(p: ModelParams) -> np.ndarray:
    return PerturbationEngine(p).second_order_shifts()


def first_order_mixing(m: int, q_row: int, n: int, p_row: int, p: ModelParams) -> complex:
    return PerturbationEngine(p).first_order_mixing(m, q_row, n, p_row)


def min_coupled_gap(p: ModelParams) -> float:
    return PerturbationEngine(p).min_coupled_gap()


def equal_coupling_conversion(times, p: ModelParams) -> np.ndarray:
    """
    P_{t→s}(t) for g1 = g2 = g in closed form:
    ¼[1 - u² + 2cos²Θ u(u - C²)], u = 1 - sin²θ sin²(Rt/ħ), C = cos(2gt/ħ).
    """
    if p.g1 != p.g2:
        raise ValidationError("closed-form interconversion needs g1 == g2", details={"g1": p.g1, "g2": p.g2})
    times = np.asarray(times, dtype=float)
    g = p.g1
    theta_mix = mixing_angle(g, p.B0)
    b = MU_B_EV_T * p.B0
    root = math.sqrt(b * b + 4.0 * g * g)
    u = 1.0 - math.sin(theta_mix) ** 2 * np.sin(root * times / HBAR_EV_S) ** 2
    c = np.cos(2.0 * g * times / HBAR_EV_S)
    cos2 = math.cos(p.theta) ** 2
    return 0.25 * (1.0 - u * u + 2.0 * cos2 * u * (u - c * c))


def interior_extremum(values: Sequence[float], rtol: float = 1e-9) -> bool:
    """True when some interior value lies strictly outside the range of the endpoints."""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return False
    lo, hi = min(values[0], values[-1]), max(values[0], values[-1])
    margin = rtol * max(abs(hi), abs(lo), np.finfo(float).tiny)
    inner = values[1:-1]
    return bool(np.any(inner > hi + margin) or np.any(inner < lo - margin))


def field_magnitude_scan(theta: float, B0_grid: Sequence[float], times: Sequence[float],
                         p: ModelParams) -> List[ScanPoint]:
    """Max over the time grid of P_{t→s} for each field magnitude."""
    if len(B0_grid) == 0:
        raise ValidationError("B0 grid must be nonempty")
    times = np.asarray(times, dtype=float)
    points = []
    for B0 in B0_grid:
        series = PerturbationEngine(p.with_updates(theta=theta, B0=float(B0))).conversion_series(times)
        k = int(np.argmax(series))
        points.append(ScanPoint(B0=float(B0), max_value=float(series[k]), argmax_time=float(times[k])))
    logger.info(
        "field magnitude scan",
        extra={"theta": theta, "points": len(points),
               "interior_extremum": interior_extremum([pt.max_value for pt in points])},
    )
    return points


def broadening_scan(p: ModelParams, factors: Sequence[float] = (0.3, 1.0, 3.0),
                    initial: InitialLabel = "triplet") -> BroadeningScan:
    """Golden-rule rate with η scaled by each factor around the configured width."""
    base = p.eta
    etas = np.asarray(factors, dtype=float) * base
    rates = np.array([
        PerturbationEngine(p.with_updates(broadening_eta=float(eta))).reaction_rate(initial).value
        for eta in etas
    ])
    return BroadeningScan(factors=np.asarray(factors, dtype=float), etas=etas, rates=rates)
