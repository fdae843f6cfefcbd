"""
Library configuration using Pydantic Settings.
All numerical tolerances and size guards are loaded from environment variables
(or a local .env file) and can be overridden per call.
"""
import logging
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Project Info
    PROJECT_NAME: str = "cq-stein"
    PROJECT_DESCRIPTION: str = (
        "Divergences, hypothesis testing and resource-theory constructions "
        "for classical-quantum channels"
    )
    VERSION: str = "1.0.0"

    # Environment
    ENVIRONMENT: str = Field(default="development", description="Current environment")
    DEBUG: bool = Field(default=False, description="Enable debug logging")
    LOG_LEVEL: str = Field(default="WARNING", description="Root log level for the CLI")

    # Execution
    WORKERS: int = Field(default=1, ge=1, description="Threads for per-letter / per-row work")
    SEED: int = Field(default=1234, description="Default seed for random instances")

    # ============== State validation ==============
    HERMITIAN_TOL: float = Field(default=1e-10, description="Max |rho - rho^dagger| entry")
    PSD_TOL: float = Field(default=1e-10, description="Eigenvalues in [-tol, 0] are clamped")
    TRACE_TOL: float = Field(default=1e-10, description="Max |Tr rho - 1|")
    BLOCK_TOL: float = Field(default=1e-12, description="Off-classical-diagonal block tolerance")

    # ============== Spectra & supports ==============
    PINCHING_CLUSTER_TOL: float = Field(
        default=1e-9,
        description="Relative gap below which eigenvalues share a pinching projector",
    )
    SUPPORT_REL_TOL: float = Field(
        default=1e-12,
        description="Eigenvalues <= tol * lambda_max are outside the support",
    )
    SUPPORT_LEAK_TOL: float = Field(
        default=1e-10,
        description="Tr[(1 - Pi_sigma) rho] above this means rho is not supported on sigma",
    )

    # ============== Hypothesis testing ==============
    ZERO_EIG_REL_TOL: float = Field(
        default=1e-11,
        description="Eigenvalues of mu*rho - sigma below tol * norm count as zero",
    )
    BISECTION_MAX_ITER: int = Field(default=200, description="Dual bisection iteration cap")
    DUALITY_GAP_TOL: float = Field(default=1e-8, description="Certified duality gap")

    # ============== Free sets ==============
    MEMBERSHIP_TOL: float = Field(default=1e-9, description="Membership violation tolerance")
    FULL_RANK_TOL: float = Field(default=1e-12, description="Min Choi eigenvalue for full rank")
    CAPACITY_TOL: float = Field(default=1e-8, description="Blahut-Arimoto bracket width")
    CAPACITY_MAX_ITER: int = Field(default=100_000, description="Blahut-Arimoto iteration cap")
    CAPACITY_FREEZE_TOL: float = Field(default=1e-15, description="Letters below are frozen at 0")
    CAPACITY_MONOTONE_TOL: float = Field(
        default=1e-10, description="Largest step-to-step drop of the Blahut-Arimoto lower bound"
    )
    STATIONARITY_TOL: float = Field(default=1e-6, description="Projected-gradient certificate")
    PPT_MAX_ITER: int = Field(default=2000, description="Projected-gradient iteration cap")
    DYKSTRA_MAX_ITER: int = Field(default=5000, description="Dykstra projection iteration cap")
    DYKSTRA_TOL: float = Field(default=1e-13, description="Dykstra fixed-point tolerance")

    # ============== Size guards ==============
    SYMMETRIZE_MAX_N: int = Field(default=8, description="Largest n for orbit averaging")
    TYPES_MAX: int = Field(default=1_000_000, description="Largest number of type classes")
    MAX_OUTPUT_DIM: int = Field(default=4096, description="Largest dense matrix dimension")
    NMAX: int = Field(default=10, description="Largest n in sweeps")

    # ============== CLI defaults ==============
    PRINT_DIGITS: int = Field(default=12, description="Significant digits in CLI output")
    DEFAULT_EPS: float = Field(default=0.05, gt=0.0, lt=1.0, description="Type-I error bound")
    DEFAULT_ALPHA: float = Field(default=1.1, gt=1.0, description="Sandwiched Renyi order")
    OUTPUT_DIR: Optional[str] = Field(default=None, description="Default directory for --out")

    @field_validator(
        "HERMITIAN_TOL",
        "PSD_TOL",
        "TRACE_TOL",
        "BLOCK_TOL",
        "PINCHING_CLUSTER_TOL",
        "SUPPORT_REL_TOL",
        "SUPPORT_LEAK_TOL",
        "ZERO_EIG_REL_TOL",
        "DUALITY_GAP_TOL",
        "MEMBERSHIP_TOL",
        "FULL_RANK_TOL",
        "CAPACITY_TOL",
        "CAPACITY_MONOTONE_TOL",
        "STATIONARITY_TOL",
        "DYKSTRA_TOL",
    )
    @classmethod
    def positive_tolerance(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def parse_log_level(cls, v):
        level = str(v).upper()
        if level not in logging.getLevelNamesMapping():
            raise ValueError(f"unknown log level: {v}")
        return level

    @property
    def effective_log_level(self) -> str:
        """DEBUG overrides the configured level."""
        return "DEBUG" if self.DEBUG else self.LOG_LEVEL


settings = Settings()
