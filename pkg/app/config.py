"""Application configuration management."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables."""

    # Runtime
    log_level: str = "INFO"
    threads: int = 1
    output_dir: str = "./runs"
    config_dir: str = "./configs"

    # Linear solvers
    solver_tol: float = 1e-10
    direct_solver_max_unknowns: int = 200_000
    krylov_max_iter: int = 2000
    krylov_restart: int = 60
    krylov_attempts: int = 3

    # Time stepping
    cfl_safety: float = 0.9
    heat_dt_factor: float = 0.24
    blowup_threshold: float = 1e12
    observer_rate: float = 2.0  # samples per unit time

    # Energy metrics
    dissipation_tol: float = 1e-10
    roundoff_floor: float = 1e-14
    quad_rtol: float = 1e-8

    # Ray sampling
    gcc_n_pos: int = 200
    gcc_n_dir: int = 64
    gcc_t_max: float = 50.0
    gcc_epsilon: float = 1e-3

    # Resolvent probes
    low_freq_delta: float = 0.25

    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="DAMPLAB_", case_sensitive=False, extra="ignore"
    )


# Global settings instance
settings = Settings()
