import logging
import os
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Final

from gpi_multinomial.exceptions import InvalidInputException

DEFAULT_ENUMERATION_BUDGET: Final = 50_000_000
DEFAULT_WICK_DEGREE_CAP: Final = 24
DEFAULT_NAIVE_WICK_DEGREE_CAP: Final = 10
# 2 * m_max with m_max = 8
DEFAULT_MEMO_CAP: Final = 16
DEFAULT_WORKERS: Final = 1
DEFAULT_LOG_LEVEL: Final = "INFO"


def _int_from_env(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    try:
        return int(value.replace("_", ""))
    except ValueError:
        raise InvalidInputException(
            f"Environment variable {name} must be an integer, got {value!r}"
        ) from None


@dataclass(frozen=True)
class Settings:
    """Runtime limits, read from the environment unless given explicitly"""

    enumeration_budget: int = field(
        default_factory=lambda: _int_from_env(
            "GPI_ENUMERATION_BUDGET", DEFAULT_ENUMERATION_BUDGET
        )
    )
    wick_degree_cap: int = field(
        default_factory=lambda: _int_from_env(
            "GPI_WICK_DEGREE_CAP", DEFAULT_WICK_DEGREE_CAP
        )
    )
    naive_wick_degree_cap: int = field(
        default_factory=lambda: _int_from_env(
            "GPI_NAIVE_WICK_DEGREE_CAP", DEFAULT_NAIVE_WICK_DEGREE_CAP
        )
    )
    memo_cap: int = field(
        default_factory=lambda: _int_from_env("GPI_MEMO_CAP", DEFAULT_MEMO_CAP)
    )
    workers: int = field(
        default_factory=lambda: _int_from_env("GPI_WORKERS", DEFAULT_WORKERS)
    )
    log_level: str = field(
        default_factory=lambda: os.getenv("GPI_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
    )

    def __post_init__(self):
        for attr, value in asdict(self).items():
            if isinstance(value, int) and value < 1:
                raise InvalidInputException(
                    f"Settings attribute '{attr}' must be positive (got {value})"
                )
        if not isinstance(logging.getLevelName(self.log_level), int):
            raise InvalidInputException(f"Unknown log level {self.log_level!r}")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Read once per process; `get_settings.cache_clear()` forces a reload"""
    return Settings()


def resolve_budget(budget: int | None) -> int:
    return get_settings().enumeration_budget if budget is None else budget
