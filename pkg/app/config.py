"""Configuration management from environment variables."""

import os
from pathlib import Path
from dotenv import load_dotenv

from app.exceptions import ConfigurationException

# Load .env file from project root BEFORE reading environment variables
# Try multiple locations: project root, app directory, current working directory
env_paths = [
    Path(__file__).parent.parent / ".env",  # Project root (preferred)
    Path(__file__).parent / ".env",  # app/ directory (fallback)
    Path.cwd() / ".env",  # Current working directory (fallback)
]

for env_path in env_paths:
    if env_path.exists():
        try:
            load_dotenv(env_path, override=False)
            break
        except (PermissionError, IOError):
            # If we can't read the file, continue to next location
            continue


class Config:
    """Library and CLI configuration from environment variables."""

    # Logging
    CSTAR_LOG: str = os.getenv("CSTAR_LOG", "info").upper()

    # Numerics
    CSTAR_POSITIVITY_TOL: float = float(os.getenv("CSTAR_POSITIVITY_TOL", "1e-8"))
    CSTAR_OMEGA_BOUND: float = float(os.getenv("CSTAR_OMEGA_BOUND", "10.0"))
    CSTAR_GROUP_CHECK_LIMIT: int = int(os.getenv("CSTAR_GROUP_CHECK_LIMIT", "64"))

    # Runs
    CSTAR_OUTPUT_DIR: str = os.getenv("CSTAR_OUTPUT_DIR", "artifacts")
    CSTAR_THREADS: int = int(os.getenv("CSTAR_THREADS", "1"))

    # Size ceilings
    CSTAR_MAX_SAMPLES: int = int(os.getenv("CSTAR_MAX_SAMPLES", "256"))
    CSTAR_MAX_DIMENSION: int = int(os.getenv("CSTAR_MAX_DIMENSION", "16"))
    CSTAR_MAX_GRID: int = int(os.getenv("CSTAR_MAX_GRID", "64"))
    CSTAR_MAX_DEPTH: int = int(os.getenv("CSTAR_MAX_DEPTH", "5"))

    @classmethod
    def validate(cls) -> None:
        """Validate configuration and fail fast on invalid settings."""
        if cls.CSTAR_POSITIVITY_TOL < 0:
            raise ConfigurationException(
                f"CSTAR_POSITIVITY_TOL must be >= 0, got {cls.CSTAR_POSITIVITY_TOL}"
            )
        if cls.CSTAR_OMEGA_BOUND <= 0:
            raise ConfigurationException(
                f"CSTAR_OMEGA_BOUND must be > 0, got {cls.CSTAR_OMEGA_BOUND}"
            )
        if cls.CSTAR_THREADS < 1:
            raise ConfigurationException(f"CSTAR_THREADS must be >= 1, got {cls.CSTAR_THREADS}")
        for name in ("CSTAR_MAX_SAMPLES", "CSTAR_MAX_DIMENSION", "CSTAR_MAX_GRID",
                     "CSTAR_MAX_DEPTH", "CSTAR_GROUP_CHECK_LIMIT"):
            if getattr(cls, name) < 1:
                raise ConfigurationException(f"{name} must be >= 1, got {getattr(cls, name)}")

    @classmethod
    def get_ceilings(cls) -> dict:
        """Get the size ceilings enforced by the experiment drivers."""
        return {
            "samples": cls.CSTAR_MAX_SAMPLES,
            "dimension": cls.CSTAR_MAX_DIMENSION,
            "grid": cls.CSTAR_MAX_GRID,
            "depth": cls.CSTAR_MAX_DEPTH,
        }


# Global config instance
config = Config()
