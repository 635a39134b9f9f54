from functools import lru_cache

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class LabSettings(BaseSettings):
    """Process-level settings read from the environment (prefix POLARON_) or a .env file."""

    model_config = SettingsConfigDict(env_prefix="POLARON_", env_file=".env", extra="ignore")

    project_name: str = "Dirac Polaron Lab"
    version: str = "0.1.0"
    log_level: str = "INFO"
    output_dir: str = "results"
    # Largest admissible number of Fock states before the spin factor is attached
    basis_budget: int = 200_000
    dense_threshold: int = 3000


@lru_cache
def get_settings() -> LabSettings:
    return LabSettings()
