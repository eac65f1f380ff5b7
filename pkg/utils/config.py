import logging
import os
from typing import Optional

from dotenv import load_dotenv

from utils.errors import ConfigurationError

load_dotenv()

DEFAULT_SEED = 0
DEFAULT_THREADS = 1
DEFAULT_RESTART_CAP = 1000
DEFAULT_LOG_LEVEL = "WARNING"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw.strip(), 0)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}")


def env_seed() -> int:
    return _env_int("LRS_SEED", DEFAULT_SEED)


def env_threads() -> int:
    threads = _env_int("LRS_THREADS", DEFAULT_THREADS)
    if threads < 1:
        raise ConfigurationError(f"LRS_THREADS must be >= 1, got {threads}")
    return threads


def env_restart_cap() -> int:
    return _env_int("LRS_RESTART_CAP", DEFAULT_RESTART_CAP)


def env_log_level() -> str:
    return os.getenv("LRS_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for the CLI and the acceptance runner."""
    name = (level or env_log_level()).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigurationError(f"unknown log level {name!r}")
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s level=%(levelname)s logger=%(name)s %(message)s",
    )
