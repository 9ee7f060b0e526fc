"""
Result containers and the sweep definition.

Array-valued results are frozen dataclasses; user-facing inputs are pydantic models.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

ObservableLiteral = Literal["pt", "ps", "kt", "ks", "pts", "pts_max", "b0_scan"]
FinalSectorLiteral = Literal["acceptor", "all"]
AxisName = Literal["t", "theta", "B0", "T"]

AXIS_ORDER: Tuple[str, ...] = ("theta", "t", "B0", "T")


@dataclass(frozen=True)
class AmplitudeTable:
    """c_np(τ) over (phonon n, Table I row p) for one initial branch (j, m)."""

    amplitudes: np.ndarray      # (n_phonon, 24) complex
    initial: np.ndarray         # c_jmq over q = 1..24
    nuclear_index: int
    phonon_index: int
    tau: float


@dataclass(frozen=True)
class ProbabilityResult:
    value: float
    flags: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RateResult:
    """Golden-rule rate with its decomposition over (j, p) and over m."""

    value: float
    eta: float
    by_nuclear_final: np.ndarray   # (4, 4): initial nuclear j, acceptor row 21..24
    by_phonon: np.ndarray          # (n_phonon,)
    flags: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ScanPoint:
    B0: float
    max_value: float
    argmax_time: float


@dataclass(frozen=True)
class BroadeningScan:
    factors: np.ndarray
    etas: np.ndarray
    rates: np.ndarray

    @property
    def relative_spread(self) -> float:
        top = float(np.max(self.rates))
        if top == 0.0:
            return 0.0
        return (top - float(np.min(self.rates))) / top


@dataclass(frozen=True)
class ReportRow:
    """One verifier row: a table entry, a Table I row or a derived check."""

    table: str
    entry: str
    max_deviation: float
    status: str
    detail: str = ""


@dataclass
class SweepResult:
    """Rows in deterministic grid order plus the metadata header."""

    observable: str
    metadata: Dict[str, object]
    rows: List[Dict[str, object]] = field(default_factory=list)
    columns: Tuple[str, ...] = (
        "observable", "theta_rad", "time_s", "B0_tesla", "temperature_K", "value", "flags",
    )


# ==========================================
# SWEEP DEFINITION
# ==========================================

class GridAxis(BaseModel):
    """Uniform grid start..stop with count points (count=1 gives start)."""

    start: float
    stop: float
    count: int = Field(..., ge=1)

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_order(self):
        if self.stop < self.start:
            raise ValueError("grid range must be ordered (start <= stop)")
        return self

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def parse(cls, text: str) -> "GridAxis":
        """Parse START:STOP:COUNT."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected START:STOP:COUNT, got '{text}'")
        return cls(start=float(parts[0]), stop=float(parts[1]), count=int(parts[2]))


class SweepSpec(BaseModel):
    observable: ObservableLiteral = "pt"
    axes: Dict[AxisName, GridAxis] = Field(default_factory=dict)
    final_sector: FinalSectorLiteral = "acceptor"
    time_in_inverse_omega: bool = False
    output_path: Optional[str] = None
    output_format: Literal["csv", "json"] = "csv"
    workers: int = Field(default=1, ge=1)

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_axes(self):
        if not self.axes:
            raise ValueError("at least one grid axis must be given")
        if self.observable in ("pts_max", "b0_scan") and "t" not in self.axes:
            raise ValueError(f"observable '{self.observable}' needs a time grid")
        if self.observable == "b0_scan" and "B0" not in self.axes:
            raise ValueError("observable 'b0_scan' needs a B0 grid")
        if self.observable in ("pt", "ps", "pts") and "t" not in self.axes:
            raise ValueError(f"observable '{self.observable}' needs a time grid")
        return self

    def output_axes(self) -> Tuple[str, ...]:
        """Axes that index output rows; max-over-t observables fold the time axis."""
        folded = {"t"} if self.observable in ("kt", "ks", "pts_max", "b0_scan") else set()
        return tuple(a for a in AXIS_ORDER if a in self.axes and a not in folded)

    def expected_rows(self) -> int:
        count = 1
        for axis in self.output_axes():
            count *= self.axes[axis].count
        return count
