import os
import sys

import pytest

# Set testing environment variables before any project import
os.environ["ENVIRONMENT"] = "testing"
os.environ["LOG_LEVEL"] = "WARNING"
os.environ["LOG_FORMAT"] = "text"
os.environ.pop("LOG_FILE", None)

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.params import ModelParams, validate_params  # noqa: E402

REFERENCE_DELTA = 0.01


@pytest.fixture(scope="session")
def reference_raw():
    """Source parameter set with the automatic cutoff unresolved."""
    return ModelParams(
        epsilon1=REFERENCE_DELTA,
        epsilon2=0.0,
        tunneling_J=0.01 * REFERENCE_DELTA,
        omega=1e7,
        phi=0.2,
        B0=50e-6,
        theta=0.0,
        g1=1e-8,
        g2=1e-8,
        temperature=0.01,
    )


@pytest.fixture(scope="session")
def reference_params(reference_raw):
    """Source parameters at a desk-scale cutoff."""
    return validate_params(reference_raw.with_updates(phonon_cutoff=64))


@pytest.fixture(scope="session")
def small_raw():
    """
    Artificial instance for exact comparisons: ħω/kT ≈ 5, unequal hyperfine
    couplings, four phonon levels. J is filled in by ``small_params``.
    """
    return ModelParams(
        epsilon1=3e-8,
        epsilon2=0.0,
        tunneling_J=1e-13,
        omega=2e7,
        phi=0.3,
        B0=1e-4,
        theta=0.6,
        g1=4e-9,
        g2=2.5e-9,
        temperature=3e-5,
        phonon_cutoff=4,
    )


@pytest.fixture(scope="session")
def small_params(small_raw):
    """small_raw with J set to 10⁻³ of the smallest coupled gap."""
    from services.perturbation_engine import min_coupled_gap

    p = validate_params(small_raw)
    gap = min_coupled_gap(p)
    return p.with_updates(tunneling_J=1e-3 * gap)


@pytest.fixture
def model_file(tmp_path):
    """Write a model file and return its path; keyword arguments override entries."""
    import json

    def _write(**overrides):
        data = {
            "epsilon1_ev": 3e-8,
            "epsilon2_ev": 0.0,
            "J_ev": 1e-13,
            "omega_rad_per_s": 2e7,
            "phi": 0.3,
            "B0_tesla": 1e-4,
            "theta_rad": 0.6,
            "g1_ev": 4e-9,
            "g2_ev": 2.5e-9,
            "temperature_K": 3e-5,
            "phonon_cutoff": 4,
        }
        data.update(overrides)
        path = tmp_path / "model.json"
        path.write_text(json.dumps(data))
        return path

    return _write
