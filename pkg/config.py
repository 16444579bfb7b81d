from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Enumeration limits
    enumeration_budget: int = 100_000_000  # (q-1)^n torus points per cone
    block_size: int = 1_048_576  # torus points evaluated per numpy block
    oracle_budget: int = 2_000_000  # residues mod p^M visited by the oracle

    # Numerics
    oracle_precision_digits: int = 50

    # Non-degeneracy spot check at random lattice vectors in [0, bound]^n
    spot_check_samples: int = 8
    spot_check_bound: int = 10

    # Count cache
    database_url: str = "sqlite:///zeta_cache.db"
    count_cache_enabled: bool = False

    # Logging
    log_level: str = "INFO"
    log_file: str = ""  # empty = stderr only

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


settings = Settings()
