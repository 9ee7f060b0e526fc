"""
Grid sweeps over (Θ, t, B₀, T), the perturbative-vs-exact comparison, and the
CSV/JSON writers.

Grid points are evaluated in a worker pool and gathered in lexicographic axis
order, so output is identical for any worker count.
"""

import csv
import io
import json
import logging
import time
from itertools import product
from multiprocessing import Pool
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import settings
from exceptions import DimensionCapError, SweepSpecError
from models.params import N_SPIN, ModelParams, validate_params
from models.results import SweepResult, SweepSpec
from services.exact_oracle import build_full_hamiltonian, evolve_probability
from services.perturbation_engine import PerturbationEngine, interior_extremum
from services.spin_system import table1_eigensystem

logger = logging.getLogger(__name__)

ORACLE_COLUMNS = (
    "observable", "theta_rad", "time_s", "B0_tesla", "temperature_K",
    "perturbative", "exact", "rel_error",
)
# rel_error denominators never drop below this fraction of the series maximum
ORACLE_ERROR_FLOOR = 1e-3

# exact observable measuring the same rows as each perturbative final sector
EXACT_OCCUPANCY = {"acceptor": "acceptor", "all": "double_occupancy"}


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{settings.FLOAT_DIGITS}g")
    return str(value)


def _axis_values(spec: SweepSpec, axis: str, default: float) -> np.ndarray:
    if axis in spec.axes:
        return spec.axes[axis].values()
    return np.array([default])


def _times_in_seconds(spec: SweepSpec, p: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """(seconds, printed values) for the time axis."""
    printed = spec.axes["t"].values() if "t" in spec.axes else np.array([])
    seconds = printed / p.omega if spec.time_in_inverse_omega else printed
    if np.any(seconds < 0):
        raise SweepSpecError("time grid must be non-negative")
    return seconds, printed


def _point_params(base: ModelParams, theta: float, B0: float, temperature: float) -> ModelParams:
    return validate_params(base.with_updates(theta=float(theta), B0=float(B0), temperature=float(temperature)))


def _evaluate_point(task: tuple) -> tuple:
    """
    Evaluate one (Θ, B₀, T) point over the whole time grid.

    Returns (values, argmax indices or None, flags per value, point flags).
    """
    observable, p, times, final_sector = task
    engine = PerturbationEngine(p)
    point_flags = ("cutoff_capped",) if p.cutoff_capped else ()

    if observable in ("pt", "ps"):
        initial = "triplet" if observable == "pt" else "singlet"
        results = [engine.reaction_probability(initial, float(t), final_sector) for t in times]
        return [r.value for r in results], None, [r.flags for r in results], point_flags

    if observable in ("kt", "ks"):
        initial = "triplet" if observable == "kt" else "singlet"
        horizon = float(np.max(times)) if len(times) else None
        rate = engine.reaction_rate(initial, observation_time=horizon)
        return [rate.value], None, [rate.flags], point_flags

    series = engine.conversion_series(times)
    if observable == "pts":
        return list(series), None, [()] * len(series), point_flags
    k = int(np.argmax(series))
    return [float(series[k])], [k], [()], point_flags


def _map(tasks: List[tuple], workers: int) -> List[tuple]:
    if workers <= 1 or len(tasks) <= 1:
        return [_evaluate_point(t) for t in tasks]
    with Pool(min(workers, len(tasks))) as pool:
        return pool.map(_evaluate_point, tasks)


def run_sweep(spec: SweepSpec, p: ModelParams) -> SweepResult:
    """
    Evaluate the selected observable on the Cartesian grid.

    Raises:
        SweepSpecError: malformed grid
        ParameterValidationError: a grid point violates a parameter invariant
    """
    started = time.perf_counter()
    base = validate_params(p)
    seconds, printed_times = _times_in_seconds(spec, base)
    thetas = _axis_values(spec, "theta", base.theta)
    fields = _axis_values(spec, "B0", base.B0)
    temps = _axis_values(spec, "T", base.temperature)

    # cutoff re-resolves per temperature when the model asked for "auto"
    template = p if p.phonon_cutoff == "auto" else base
    points = list(product(range(len(thetas)), range(len(fields)), range(len(temps))))
    tasks = [
        (spec.observable, _point_params(template, thetas[a], fields[b], temps[c]), seconds, spec.final_sector)
        for a, b, c in points
    ]
    workers = spec.workers if spec.workers > 1 else settings.SWEEP_WORKERS
    outputs = dict(zip(points, _map(tasks, workers)))

    scan_flags: Dict[Tuple[int, int], bool] = {}
    if spec.observable == "b0_scan":
        for a, c in product(range(len(thetas)), range(len(temps))):
            series = [outputs[(a, b, c)][0][0] for b in range(len(fields))]
            scan_flags[(a, c)] = interior_extremum(series)

    result = SweepResult(observable=spec.observable, metadata=_metadata(spec, base))
    per_time = spec.observable in ("pt", "ps", "pts")
    time_range = range(len(seconds)) if per_time else [None]
    for a, k, b, c in product(range(len(thetas)), time_range, range(len(fields)), range(len(temps))):
        values, argmax, flags, point_flags = outputs[(a, b, c)]
        idx = 0 if k is None else k
        if argmax is not None:
            time_value = printed_times[argmax[0]]
        elif k is not None:
            time_value = printed_times[k]
        else:
            time_value = ""
        row_flags = set(flags[idx]) | set(point_flags)
        if spec.observable == "b0_scan" and scan_flags[(a, c)]:
            row_flags.add("interior_extremum")
        result.rows.append({
            "observable": spec.observable,
            "theta_rad": float(thetas[a]),
            "time_s": time_value,
            "B0_tesla": float(fields[b]),
            "temperature_K": float(temps[c]),
            "value": float(values[idx]),
            "flags": ";".join(sorted(row_flags)),
        })

    if len(result.rows) != spec.expected_rows():
        raise SweepSpecError("row count does not match the grid", details={
            "rows": len(result.rows), "expected": spec.expected_rows()})
    logger.info(
        "sweep complete",
        extra={"observable": spec.observable, "rows": len(result.rows), "workers": workers,
               "duration_ms": round((time.perf_counter() - started) * 1000, 2)},
    )
    return result


def _metadata(spec: SweepSpec, p: ModelParams) -> Dict[str, object]:
    """Header fields; worker count is left out so output is independent of it."""
    meta: Dict[str, object] = {
        "observable": spec.observable,
        "final_sector": spec.final_sector,
        "time_unit": "1/omega" if spec.time_in_inverse_omega else "s",
        "code_version": settings.APP_VERSION,
        "energy_correction_order": settings.ENERGY_CORRECTION_ORDER,
        "nuclei_co_rotate": settings.NUCLEI_CO_ROTATE,
    }
    for key, value in p.as_metadata().items():
        meta[f"param.{key}"] = value
    for axis, grid in sorted(spec.axes.items()):
        meta[f"axis.{axis}"] = f"{_fmt(grid.start)}:{_fmt(grid.stop)}:{grid.count}"
    return meta


# ==========================================
# ORACLE COMPARISON
# ==========================================

def _relative_error(approx: float, exact: float, floor: float) -> float:
    """|approx - exact| over max(|exact|, floor); floor keeps near-zero points finite."""
    if approx == exact:
        return 0.0
    return abs(approx - exact) / max(abs(exact), floor, np.finfo(float).tiny)


def oracle_compare(spec: SweepSpec, p: ModelParams, oracle_cutoff: int) -> SweepResult:
    """
    Perturbative against exact values on the Θ × t grid, plus the J² scaling check.

    Raises:
        DimensionCapError: if 24·oracle_cutoff exceeds the configured cap
    """
    if spec.observable not in ("pt", "pts"):
        raise SweepSpecError("oracle comparison supports observables 'pt' and 'pts'")
    dim = N_SPIN * oracle_cutoff
    if dim > settings.ORACLE_MAX_DIM:
        raise DimensionCapError(f"oracle dimension {dim} exceeds cap {settings.ORACLE_MAX_DIM}",
                                dimension=dim, cap=settings.ORACLE_MAX_DIM)
    small = validate_params(p.with_updates(phonon_cutoff=oracle_cutoff))
    seconds, printed_times = _times_in_seconds(spec, small)
    thetas = _axis_values(spec, "theta", small.theta)
    observable = EXACT_OCCUPANCY[spec.final_sector] if spec.observable == "pt" else "singlet"

    hamiltonian = build_full_hamiltonian(small)
    result = SweepResult(observable=spec.observable, metadata=_metadata(spec, small), columns=ORACLE_COLUMNS)
    for theta in thetas:
        point = small.with_updates(theta=float(theta))
        exact = evolve_probability(point, "triplet", observable, seconds, hamiltonian).values
        perturbative = _perturbative_series(spec.observable, point, seconds, spec.final_sector)
        floor = ORACLE_ERROR_FLOOR * float(np.max(np.abs(exact))) if len(exact) else 0.0
        for k in range(len(seconds)):
            result.rows.append({
                "observable": spec.observable,
                "theta_rad": float(theta),
                "time_s": float(printed_times[k]),
                "B0_tesla": float(small.B0),
                "temperature_K": float(small.temperature),
                "perturbative": float(perturbative[k]),
                "exact": float(exact[k]),
                "rel_error": _relative_error(float(perturbative[k]), float(exact[k]), floor),
            })

    if spec.observable == "pt" and len(seconds):
        ratios = j_squared_ratios(small, float(np.max(seconds)), spec.final_sector)
        result.metadata["j2_ratio_perturbative"] = ratios[0]
        result.metadata["j2_ratio_exact"] = ratios[1]
        result.metadata["j2_ratio_expected"] = 4.0
    result.metadata["max_rel_error"] = max((r["rel_error"] for r in result.rows), default=0.0)
    return result


def _perturbative_series(observable: str, p: ModelParams, seconds: np.ndarray, final_sector: str) -> np.ndarray:
    engine = PerturbationEngine(p)
    if observable == "pt":
        return np.array([engine.reaction_probability("triplet", float(t), final_sector).value for t in seconds])
    return engine.conversion_series(seconds)


def j_squared_ratios(p: ModelParams, tau: float, final_sector: str = "acceptor") -> Tuple[float, float]:
    """P_t(2J)/P_t(J), perturbative and exact."""
    doubled = p.with_updates(tunneling_J=2.0 * p.tunneling_J)
    pert = [PerturbationEngine(q).reaction_probability("triplet", tau, final_sector).value for q in (p, doubled)]
    exact = [evolve_probability(q, "triplet", EXACT_OCCUPANCY[final_sector], [tau]).values[0] for q in (p, doubled)]
    return pert[1] / pert[0], exact[1] / exact[0]


# ==========================================
# WRITERS
# ==========================================

def result_to_csv(result: SweepResult) -> str:
    buffer = io.StringIO()
    for key in sorted(result.metadata):
        buffer.write(f"#{key}={_fmt(result.metadata[key])}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_fmt(row[c]) for c in result.columns])
    return buffer.getvalue()


def result_to_json(result: SweepResult) -> str:
    payload = {
        "metadata": {k: result.metadata[k] for k in sorted(result.metadata)},
        "columns": list(result.columns),
        "rows": [[row[c] for c in result.columns] for row in result.rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n"


def write_result(result: SweepResult, path: Optional[str], fmt: str = "csv") -> str:
    text = result_to_json(result) if fmt == "json" else result_to_csv(result)
    if path:
        Path(path).write_text(text)
        logger.info("wrote output", extra={"path": str(path), "rows": len(result.rows)})
    return text


def dump_eigensystem(p: ModelParams) -> str:
    """The 24 Table I eigenpairs as CSV: q, E_sq, then one complex amplitude per basis index."""
    eig = table1_eigensystem(p)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["q", "energy_ev"] + [f"a{i}" for i in range(N_SPIN)])
    for q in range(N_SPIN):
        amplitudes = [f"{_fmt(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt(abs(z.imag))}j" for z in eig.states[:, q]]
        writer.writerow([q + 1, _fmt(float(eig.energies[q]))] + amplitudes)
    return buffer.getvalue()
