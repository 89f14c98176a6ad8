"""
Core configuration settings for PT Gauge Lab.
"""

from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Explicitly load .env file before settings are created
load_dotenv()


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="PTGAUGE_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # App Settings
    app_name: str = "PT Gauge Lab"
    app_version: str = "0.1.0"
    log_level: str = "INFO"

    # Truncation Settings
    default_cutoff: int = 64
    boundary_margin: int = 8
    max_cutoff: int = 2048
    cutoff_policy: Literal["auto", "fixed"] = "auto"
    tail_tolerance: float = 1e-10

    # Matrix Exponential Settings
    expm_tolerance: float = 1e-8

    # Integrator Settings
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12
    max_ode_steps: int = 2_000_000

    # Quadrature Settings
    quad_tolerance: float = 1e-10
    quad_limit: int = 200
    gl_nodes: int = 16
    gl_max_panels: int = 256

    # Finite Difference Settings
    fd_step_fraction: float = 1e-5

    # Assertion Settings
    assertion_tolerance: float = 1e-8
    evolution_tolerance: float = 1e-6

    # Sweep Settings
    sweep_workers: int = 4

    # Run configuration file (key = value per line)
    config_path: Optional[str] = None


# Create global settings instance
settings = Settings()
