"""
Environment-backed settings using Pydantic Settings.
FOAMKH_* environment variables (or a local .env file) override config.yaml.
"""
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load .env file only if it exists (for local development)
try:
    from dotenv import load_dotenv
    load_dotenv(override=False)
except ImportError:
    pass

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
OUTPUT_FORMATS = ["text", "json", "csv"]
VERIFY_LEVELS = ["fast", "full"]


class Settings(BaseSettings):
    """Run settings with environment variable support; unset fields defer to config.yaml."""

    log_level: Optional[str] = Field(default=None, alias="FOAMKH_LOG_LEVEL")
    threads: Optional[int] = Field(default=None, alias="FOAMKH_THREADS")
    level: Optional[str] = Field(default=None, alias="FOAMKH_LEVEL")
    output_format: Optional[str] = Field(default=None, alias="FOAMKH_FORMAT")
    corpus_path: Optional[str] = Field(default=None, alias="FOAMKH_CORPUS")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level."""
        if v is None:
            return v
        if v.upper() not in LOG_LEVELS:
            raise ValueError(f"Log level must be one of: {LOG_LEVELS}")
        return v.upper()

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v):
        """Thread count must be positive."""
        if v is not None and v < 1:
            raise ValueError("Thread count must be a positive integer")
        return v

    @field_validator("level")
    @classmethod
    def validate_level(cls, v):
        """Validate verification level."""
        if v is None:
            return v
        if v.lower() not in VERIFY_LEVELS:
            raise ValueError(f"Level must be one of: {VERIFY_LEVELS}")
        return v.lower()

    @field_validator("output_format")
    @classmethod
    def validate_output_format(cls, v):
        """Validate report format."""
        if v is None:
            return v
        if v.lower() not in OUTPUT_FORMATS:
            raise ValueError(f"Format must be one of: {OUTPUT_FORMATS}")
        return v.lower()


def load_settings() -> Settings:
    """Read the environment afresh (the CLI calls this once per run)."""
    return Settings()
