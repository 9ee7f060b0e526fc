# Simulator Configuration Management
# Runtime knobs shared by every service; model parameters live in the JSON model file.

from enum import Enum
from typing import Optional
from pydantic_settings import BaseSettings
from pydantic import Field, field_validator, model_validator


class Environment(str, Enum):
    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


class Settings(BaseSettings):
    """
    Simulator settings with environment-based configuration.
    All settings can be overridden via environment variables.
    """

    # ==========================================
    # ENVIRONMENT & APP SETTINGS
    # ==========================================
    ENVIRONMENT: Environment = Field(default=Environment.DEVELOPMENT)
    APP_NAME: str = Field(default="spinet")
    APP_VERSION: str = Field(default="1.0.0")

    # ==========================================
    # LOGGING
    # ==========================================
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FORMAT: str = Field(default="text")  # json or text
    LOG_FILE: Optional[str] = Field(default=None)

    # ==========================================
    # PHONON TRUNCATION
    # ==========================================
    PHONON_CUTOFF_HARD_MAX: int = Field(default=512)
    THERMAL_TAIL_MASS: float = Field(default=1e-8)
    CONDITION_ON_RETAINED_MASS: bool = Field(default=True)

    # ==========================================
    # PERTURBATION ENGINE
    # ==========================================
    BROADENING_ETA_FACTOR: float = Field(default=1e-2)  # eta = factor * hbar*omega
    SERIES_SWITCH: float = Field(default=1e-6)
    DEGENERACY_RTOL: float = Field(default=1e-10)
    NUCLEI_CO_ROTATE: bool = Field(default=True)
    ENERGY_CORRECTION_ORDER: int = Field(default=1)
    UNRELIABLE_PROBABILITY: float = Field(default=0.5)
    UNRELIABLE_RATE_TIME: float = Field(default=0.3)

    # ==========================================
    # ORACLE & VERIFICATION
    # ==========================================
    ORACLE_MAX_DIM: int = Field(default=4096)
    TABLE_RESIDUAL_TOL: float = Field(default=1e-12)
    TABLE_MATCH_TOL: float = Field(default=1e-8)

    # ==========================================
    # SWEEPS & OUTPUT
    # ==========================================
    SWEEP_WORKERS: int = Field(default=1)
    FLOAT_DIGITS: int = Field(default=17)

    @field_validator("ENVIRONMENT", mode="before")
    @classmethod
    def validate_environment(cls, v):
        if isinstance(v, str):
            return Environment(v.lower())
        return v

    @field_validator("LOG_FORMAT", mode="before")
    @classmethod
    def validate_log_format(cls, v):
        v = str(v).lower()
        if v not in ("json", "text"):
            raise ValueError("LOG_FORMAT must be 'json' or 'text'")
        return v

    @model_validator(mode="after")
    def validate_numeric_settings(self):
        if self.ENERGY_CORRECTION_ORDER not in (1, 2):
            raise ValueError("ENERGY_CORRECTION_ORDER must be 1 or 2")
        if self.PHONON_CUTOFF_HARD_MAX < 1:
            raise ValueError("PHONON_CUTOFF_HARD_MAX must be at least 1")
        if not 0.0 < self.THERMAL_TAIL_MASS < 1.0:
            raise ValueError("THERMAL_TAIL_MASS must lie in (0, 1)")
        if self.BROADENING_ETA_FACTOR <= 0.0:
            raise ValueError("BROADENING_ETA_FACTOR must be positive")
        if self.SWEEP_WORKERS < 1:
            raise ValueError("SWEEP_WORKERS must be at least 1")
        return self

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True
        extra = "ignore"


# Global settings instance
settings = Settings()


__all__ = ["Settings", "Environment", "settings"]
