"""Core application configuration module."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level configuration settings.

    Run parameters (seeds, hyperparameters, paths) live in the TOML run
    config; these settings only control the runtime environment.
    """

    # Application
    app_name: str = "styleadapt"
    app_version: str = "0.1.0"

    # Logging
    log_level: str = "INFO"
    log_file: str = ""
    log_colors: bool = True

    # Torch runtime
    num_threads: int = 0  # 0 keeps the torch default
    show_progress: bool = True

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="STYLEADAPT_",
        extra="ignore",
    )


settings = Settings()
