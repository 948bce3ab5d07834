"""Configuration settings for acee."""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings."""

    model_config = SettingsConfigDict(
        env_prefix="ACEE_",
        env_file=[".env", ".env.local"],
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="forbid",
    )

    # Application
    app_name: str = Field(default="acee", description="Application name")
    debug: bool = Field(default=False, description="Enable debug mode")
    log_level: str = Field(default="INFO", description="Log level")
    log_format: Literal["text", "json"] = Field(default="text", description="Log output format")

    # Runs
    output_dir: Path = Field(default=Path("acee-out"), description="Default output directory")
    default_seed: int = Field(default=0, ge=0, description="Seed used when none is given")
    workers: int = Field(default=1, ge=1, description="Parallel seed workers for bench runs")

    # Monte Carlo
    mc_draws: int = Field(default=100, ge=1, description="Conditional draws per unit and arm (M)")
    oracle_draws: int = Field(default=1_000_000, ge=1, description="Draws for do-oracle ground truth")

    # Diffusion schedule
    tau_min: float = Field(default=1e-3, gt=0, description="Earliest diffusion time")
    tau_max: float = Field(default=5.0, gt=0, description="Terminal diffusion time")
    sampler_steps: int = Field(default=100, ge=2, description="Reverse-SDE integration steps")

    @property
    def is_development(self) -> bool:
        """Check if running in development mode."""
        return self.debug

    @property
    def log_config(self) -> Dict[str, Any]:
        """Get logging configuration."""
        if self.log_format == "json":
            handler: Dict[str, Any] = {
                "class": "logging.StreamHandler",
                "formatter": "json",
                "stream": "ext://sys.stderr",
            }
        else:
            handler = {
                "class": "rich.logging.RichHandler",
                "formatter": "rich",
                "rich_tracebacks": self.debug,
                "show_path": self.debug,
            }
        return {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "rich": {"format": "%(name)s: %(message)s", "datefmt": "[%X]"},
                "json": {
                    "()": "pythonjsonlogger.jsonlogger.JsonFormatter",
                    "format": "%(asctime)s %(name)s %(levelname)s %(message)s",
                },
            },
            "handlers": {"default": handler},
            "root": {"level": self.log_level.upper(), "handlers": ["default"]},
        }


def load_settings(config_path: Optional[Path] = None) -> Settings:
    """Load settings from environment and an optional config file.

    ``config_path`` may be a JSON object of field values or a ``.env``-style
    file. Without a path the standard ``.env`` locations are consulted.
    """
    if config_path and config_path.exists():
        if config_path.suffix == ".json":
            data = json.loads(config_path.read_text(encoding="utf-8"))
            return Settings(**data)
        return Settings(_env_file=str(config_path))  # type: ignore[call-arg]

    possible_paths = [
        Path.cwd() / ".env",
        Path.cwd() / ".env.local",
        Path.home() / ".acee" / "settings.json",
    ]
    for path in possible_paths:
        if path.exists():
            if path.suffix == ".json":
                return Settings(**json.loads(path.read_text(encoding="utf-8")))
            return Settings(_env_file=str(path))  # type: ignore[call-arg]

    return Settings()


def validate_configuration(settings: Settings) -> List[str]:
    """Validate configuration and return list of issues."""
    issues = []

    valid_log_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    if settings.log_level.upper() not in valid_log_levels:
        issues.append(f"LOG_LEVEL must be one of: {', '.join(valid_log_levels)}")

    if settings.tau_min >= settings.tau_max:
        issues.append("TAU_MIN must be smaller than TAU_MAX")

    if settings.output_dir.exists() and not settings.output_dir.is_dir():
        issues.append(f"OUTPUT_DIR {settings.output_dir} exists and is not a directory")

    return issues
