"""Configuration management for the toolkit"""
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings, overridable through GCONVEX_* environment variables"""

    # Reproducibility
    seed: int = 0

    # Geodesic oracle
    tolerance: float = 1e-7
    geodesic_steps: int = 200
    geodesic_horizon: float = 1.0
    pole_epsilon: float = 1e-12
    sample_pole_epsilon: float = 1e-9
    hessian_samples: int = 1000
    hessian_residual: float = 1e-8

    # Linear algebra thresholds for floating fallbacks
    eigen_zero_ratio: float = 1e-10
    rank_threshold: float = 1e-9

    # Levi-Civita check
    nondegenerate_attempts: int = 50
    combination_bound: int = 10

    # Monte Carlo
    trials: int = 10_000
    density_chunk_size: int = 1000
    density_workers: int = 1

    log_level: str = "WARNING"

    # API
    api_host: str = "0.0.0.0"
    api_port: int = 8000

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="GCONVEX_",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
