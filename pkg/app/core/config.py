from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    # App
    APP_NAME: str = "MBAA JCAS Simulator"
    VERSION: str = "1.0.0"
    DEBUG: bool = False

    # Logging - stderr always, file only when set
    LOG_FILE: Optional[str] = None

    # Experiments
    DEFAULT_SEED: int = 2024

    # Sampling grids
    ANGLE_GRID_POINTS: int = 4096
    FREQ_GRID_POINTS: int = 64
    RATIO_GRID_POINTS: int = 4096

    # Region classification thresholds, dB relative to the map peak
    REGION_HIGH_DB: float = -6.0
    REGION_LOW_DB: float = -12.0

    # Output
    CSV_SIG_DIGITS: int = 9

    model_config = SettingsConfigDict(
        env_prefix="MBAA_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
