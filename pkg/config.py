"""
Runtime configuration and logging setup
"""
import os
import logging
from typing import Optional
from dotenv import load_dotenv

load_dotenv()

# Defaults used when neither a CLI flag nor a --config file sets a value
DEFAULT_SEED = int(os.getenv("COPULA_SEED", "42"))
DEFAULT_WORKERS = int(os.getenv("COPULA_WORKERS", "1"))
DEFAULT_BATCH_SIZE = int(os.getenv("COPULA_BATCH_SIZE", "100000"))
DEFAULT_LOG_LEVEL = os.getenv("COPULA_LOG_LEVEL", "WARNING")

LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"
LOG_DATEFMT = "%H:%M:%S"

_configured = False


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure root logging once for command-line use

    Logs go to stderr so report files stay byte-for-byte reproducible.

    Args:
        level: Level name (DEBUG, INFO, ...); falls back to COPULA_LOG_LEVEL
    """
    global _configured
    name = (level or DEFAULT_LOG_LEVEL).upper()
    numeric = getattr(logging, name, None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level}")

    if _configured:
        logging.getLogger().setLevel(numeric)
        return

    logging.basicConfig(level=numeric, format=LOG_FORMAT, datefmt=LOG_DATEFMT)
    _configured = True
