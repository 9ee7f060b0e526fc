"""
Model parameters, unit system and basis labels.

Units: energies in eV, times in s, fields in T, temperatures in K,
angular frequencies in rad/s. Spin operators are Pauli matrices (eigenvalues ±1).
"""

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError as PydanticValidationError

from config import settings
from exceptions import ConfigFileError, ParameterValidationError

HBAR_EV_S = 6.582119569e-16
K_B_EV_K = 8.617333262e-5
MU_B_EV_T = 5.788381806e-5

N_ORBITAL = 6
N_NUCLEAR = 4
N_SPIN = N_ORBITAL * N_NUCLEAR


class ModelParams(BaseModel):
    """Physical parameters of the two-site radical-pair electron-transfer model."""

    epsilon1: float = Field(..., description="Donor orbital energy, eV")
    epsilon2: float = Field(..., description="Acceptor orbital energy, eV")
    tunneling_J: float = Field(..., description="Tunneling integral, eV")
    omega: float = Field(..., description="Relative vibration angular frequency, rad/s")
    phi: float = Field(..., description="Dimensionless polaron displacement")
    B0: float = Field(..., description="Field magnitude, T")
    theta: float = Field(0.0, description="Field inclination, rad")
    g1: float = Field(..., description="Hyperfine coupling on site 1, eV")
    g2: float = Field(..., description="Hyperfine coupling on site 2, eV")
    temperature: float = Field(..., description="Temperature, K")
    phonon_cutoff: Union[int, Literal["auto"]] = Field("auto")
    broadening_eta: Optional[float] = Field(None, description="Lorentzian width, eV")
    cutoff_capped: bool = Field(False, description="Set when the auto cutoff hit the hard cap")

    model_config = {"extra": "forbid", "frozen": True}

    # Derived quantities

    @property
    def delta(self) -> float:
        return self.epsilon1 - self.epsilon2

    @property
    def hbar_omega(self) -> float:
        return HBAR_EV_S * self.omega

    @property
    def beta(self) -> float:
        return 1.0 / (K_B_EV_K * self.temperature)

    @property
    def boltzmann_ratio(self) -> float:
        """exp(-hbar*omega/kT)."""
        return math.exp(-self.hbar_omega * self.beta)

    @property
    def partition_function(self) -> float:
        return 1.0 / -math.expm1(-self.hbar_omega * self.beta)

    @property
    def eta(self) -> float:
        if self.broadening_eta is not None:
            return self.broadening_eta
        return settings.BROADENING_ETA_FACTOR * self.hbar_omega

    @property
    def n_phonon(self) -> int:
        if self.phonon_cutoff == "auto":
            raise ParameterValidationError("phonon_cutoff", "phonon_cutoff must be resolved by validate_params")
        return int(self.phonon_cutoff)

    def thermal_weights(self, n: Optional[int] = None) -> np.ndarray:
        """Boltzmann weights e^{-beta m hbar omega}/Z for m < n."""
        n = self.n_phonon if n is None else n
        x = self.hbar_omega * self.beta
        return np.exp(-x * np.arange(n)) * -np.expm1(-x)

    @property
    def retained_mass(self) -> float:
        return -math.expm1(-self.hbar_omega * self.beta * self.n_phonon)

    @property
    def tail_mass(self) -> float:
        return math.exp(-self.hbar_omega * self.beta * self.n_phonon)

    def averaging_weights(self) -> np.ndarray:
        """Weights used for thermal averages, optionally conditioned on the retained mass."""
        w = self.thermal_weights()
        if settings.CONDITION_ON_RETAINED_MASS:
            w = w / np.sum(w)
        return w

    def with_updates(self, **updates) -> "ModelParams":
        return self.model_copy(update=updates)

    def as_metadata(self) -> dict:
        meta = self.model_dump()
        meta["delta"] = self.delta
        meta["eta_used"] = self.eta
        if self.phonon_cutoff != "auto":
            meta["tail_mass"] = self.tail_mass
        return meta


class BasisState(BaseModel):
    """Label of one product basis state: orbital filling, nuclear spins, phonon number."""

    orbital_config: int = Field(..., ge=0, lt=N_ORBITAL)
    nuclear_config: int = Field(..., ge=1, le=N_NUCLEAR)
    phonon_number: int = Field(..., ge=0)

    model_config = {"frozen": True}


def auto_cutoff(p: ModelParams, tail: Optional[float] = None, hard_max: Optional[int] = None) -> tuple:
    """Smallest M whose cumulative Boltzmann weight reaches 1 - tail; returns (M, capped)."""
    tail = settings.THERMAL_TAIL_MASS if tail is None else tail
    hard_max = settings.PHONON_CUTOFF_HARD_MAX if hard_max is None else hard_max
    x = p.hbar_omega * p.beta
    m = max(1, math.ceil(-math.log(tail) / x))
    # ceil can land one above the true minimum after rounding
    while m > 1 and math.exp(-x * (m - 1)) <= tail:
        m -= 1
    while math.exp(-x * m) > tail:
        m += 1
    if m > hard_max:
        return hard_max, True
    return m, False


def validate_params(p: ModelParams) -> ModelParams:
    """
    Check every parameter invariant and canonicalize an automatic phonon cutoff.

    Raises:
        ParameterValidationError: naming the first violated invariant
    """
    energies = {
        "epsilon1": p.epsilon1,
        "epsilon2": p.epsilon2,
        "tunneling_J": p.tunneling_J,
        "g1": p.g1,
        "g2": p.g2,
        "phi": p.phi,
    }
    for name, value in energies.items():
        if not math.isfinite(value):
            raise ParameterValidationError(name, f"{name} must be finite")
    if not (math.isfinite(p.omega) and p.omega > 0.0):
        raise ParameterValidationError("omega", "omega must be positive")
    if not (math.isfinite(p.B0) and p.B0 >= 0.0):
        raise ParameterValidationError("B0", "B0 must be non-negative")
    if not (math.isfinite(p.temperature) and p.temperature > 0.0):
        raise ParameterValidationError("temperature", "temperature must be positive")
    if not (0.0 <= p.theta <= math.pi):
        raise ParameterValidationError("theta", "theta must lie in [0, pi]")
    if p.broadening_eta is not None and not (math.isfinite(p.broadening_eta) and p.broadening_eta > 0.0):
        raise ParameterValidationError("broadening_eta", "broadening_eta must be positive")

    if p.phonon_cutoff == "auto":
        cutoff, capped = auto_cutoff(p)
        return p.with_updates(phonon_cutoff=cutoff, cutoff_capped=capped)
    if isinstance(p.phonon_cutoff, bool) or int(p.phonon_cutoff) < 1:
        raise ParameterValidationError("phonon_cutoff", "phonon_cutoff must be at least 1")
    return p


def thermal_weight(m: int, p: ModelParams) -> float:
    """Occupation probability of vibrational level m, e^{-beta m hbar omega}/Z."""
    if m < 0:
        raise ParameterValidationError("m", "phonon index must be non-negative")
    x = p.hbar_omega * p.beta
    return math.exp(-x * m) * -math.expm1(-x)


# ==========================================
# MODEL FILE INGESTION
# ==========================================

class ModelFile(BaseModel):
    """On-disk model description; keys carry their units."""

    epsilon1_ev: float
    epsilon2_ev: float
    J_ev: float
    omega_rad_per_s: float
    phi: float
    B0_tesla: float
    theta_rad: float = 0.0
    g1_ev: float
    g2_ev: float
    temperature_K: float
    phonon_cutoff: Union[int, Literal["auto"]] = "auto"
    broadening_eta_ev: Optional[float] = None

    model_config = {"extra": "forbid"}

    def to_params(self) -> ModelParams:
        return ModelParams(
            epsilon1=self.epsilon1_ev,
            epsilon2=self.epsilon2_ev,
            tunneling_J=self.J_ev,
            omega=self.omega_rad_per_s,
            phi=self.phi,
            B0=self.B0_tesla,
            theta=self.theta_rad,
            g1=self.g1_ev,
            g2=self.g2_ev,
            temperature=self.temperature_K,
            phonon_cutoff=self.phonon_cutoff,
            broadening_eta=self.broadening_eta_ev,
        )


def read_model_file(path: Union[str, Path]) -> ModelParams:
    """Read a JSON model file; the phonon cutoff may still be 'auto'."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigFileError(f"Model file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigFileError(f"Model file is not valid JSON: {e}", details={"path": str(path)})
    try:
        model_file = ModelFile.model_validate(raw)
    except PydanticValidationError as e:
        first = e.errors()[0]
        raise ConfigFileError(
            f"Invalid model file entry '{'.'.join(str(x) for x in first['loc'])}': {first['msg']}",
            details={"path": str(path)},
        )
    return model_file.to_params()


def load_params(path: Union[str, Path]) -> ModelParams:
    """Read a JSON model file and return validated parameters."""
    return validate_params(read_model_file(path))


__all__ = [
    "HBAR_EV_S", "K_B_EV_K", "MU_B_EV_T", "N_ORBITAL", "N_NUCLEAR", "N_SPIN",
    "ModelParams", "BasisState", "ModelFile",
    "validate_params", "thermal_weight", "auto_cutoff", "read_model_file", "load_params",
]
