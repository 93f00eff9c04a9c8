"""Configuration management for entlab."""

import os
from functools import lru_cache
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings loaded from ENTLAB_* environment variables."""

    # Worker configuration
    threads: Optional[int] = Field(
        default=None,
        gt=0,
        validation_alias="ENTLAB_THREADS",
        description="Worker cap for cohort runs (from ENTLAB_THREADS, default all cores)",
    )

    # Encoding defaults
    default_n: int = Field(default=2000, gt=0, description="Codeword length n")
    default_k: int = Field(default=500, gt=0, description="Reduced dimension k")
    default_t: int = Field(default=15, gt=0, description="Encoding iterations t")
    default_seed: int = Field(
        default=0, ge=0, lt=1 << 64, description="Master seed (64-bit unsigned)"
    )
    default_epsilon: float = Field(
        default=0.05, gt=0.0, lt=1.0, description="Convergence threshold"
    )
    default_alpha: float = Field(
        default=0.5, gt=0.0, description="Noise scale for the gray codec"
    )
    causality_bound: float = Field(
        default=0.25,
        gt=0.0,
        le=1.0,
        description="k/n ratio above which a causality warning is logged",
    )

    # Reconciliation defaults
    pilot_len: int = Field(default=16, ge=8, description="Zero pilot block length")
    reconcile_t_max: int = Field(
        default=200, gt=0, description="Upper bound for adaptive t"
    )
    reconcile_margin: int = Field(
        default=1000, ge=0, description="Codeword length margin, n = k + margin"
    )
    max_image_pixels: int = Field(
        default=1 << 24, gt=0, description="Largest accepted Netpbm image"
    )

    # Logging Configuration
    log_level: str = Field(default="INFO", description="Logging level")
    log_format: str = Field(default="text", description="Log format (json or text)")

    model_config = SettingsConfigDict(
        env_prefix="ENTLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )

    @field_validator("log_format")
    @classmethod
    def _check_log_format(cls, value: str) -> str:
        value = value.lower()
        if value not in ("json", "text"):
            raise ValueError("log_format must be 'json' or 'text'")
        return value

    def resolved_threads(self) -> int:
        """Worker count to use: the configured cap, else every core."""
        if self.threads is not None:
            return self.threads
        return os.cpu_count() or 1


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Global settings instance
settings = get_settings()
