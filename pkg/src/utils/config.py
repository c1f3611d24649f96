from pydantic import Field
from pydantic_settings import BaseSettings
from typing import Optional
import os

class Settings(BaseSettings):
    """
    Process-level defaults loaded from environment variables and `.env`.

    Run-specific parameters live in the JSON run config (src.schemas.config);
    only THREAD_COUNT is allowed to override a run from the environment.
    """
    # General
    APP_NAME: str = "Kahler Geodesic Lab"
    DEBUG: bool = Field(default=False)

    # Output
    OUTPUT_DIR: str = Field(default="runs")
    LOG_DIR: str = Field(default="logs")

    # Parallelism
    THREAD_COUNT: Optional[int] = Field(default=None)

    # Numerical defaults
    DEFAULT_THETA: float = Field(default=6.0)
    DEFAULT_TORUS_POINTS: int = Field(default=16)
    DISC_TOL: float = Field(default=1e-10)
    NEUMANN_TOL: float = Field(default=1e-10)
    NEUMANN_MAX_TERMS: int = Field(default=200)
    HOLDER_FULL_PAIR_LIMIT: int = Field(default=64)
    SEED: int = Field(default=20180312)

    # Logging
    LOG_LEVEL: str = Field(default="INFO")
    PROGRESS: bool = Field(default=False, description="Show progress bars on long sweeps")

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True

# Create global settings object
settings = Settings()

os.makedirs(settings.LOG_DIR, exist_ok=True)
