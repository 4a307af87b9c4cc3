import os

from dotenv import load_dotenv


load_dotenv()


class Settings:
    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE: str = os.getenv("LOG_FILE", "")

    # Outputs
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "results")
    OUTPUT_FORMATS: str = os.getenv("OUTPUT_FORMATS", "csv")

    # Sweeps
    MAX_WORKERS: int = int(os.getenv("MAX_WORKERS", "1"))

    # Energy / trace bookkeeping: record every n-th step
    ENERGY_RECORD_EVERY: int = int(os.getenv("ENERGY_RECORD_EVERY", "1"))

    # Project Root
    PROJECT_ROOT: str = os.getenv("PROJECT_ROOT", os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

    @property
    def output_formats(self) -> list[str]:
        return [fmt.strip().lower() for fmt in self.OUTPUT_FORMATS.split(",") if fmt.strip()]


settings = Settings()
