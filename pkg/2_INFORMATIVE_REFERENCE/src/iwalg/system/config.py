import logging
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

# Path Strategy:
# 1. IWALG_PROJECT_ROOT env var (explicit override)
# 2. Walk up from __file__ (src/iwalg/system/config.py -> project_root)
CURRENT_FILE = Path(__file__).resolve()
_file_based_root = CURRENT_FILE.parent.parent.parent.parent.parent

if os.getenv("IWALG_PROJECT_ROOT"):
    PROJECT_ROOT = Path(os.getenv("IWALG_PROJECT_ROOT"))
else:
    PROJECT_ROOT = _file_based_root

# Optional .env with defaults; nothing in it is required
env_path = PROJECT_ROOT / ".env"
load_dotenv(env_path)


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logging.getLogger("iwalg.cli").warning("ignoring non-integer %s=%r", name, raw)
        return default


class Settings:
    """
    Centralized defaults for iwalg.

    CLI flags override module-file headers, which override these values.
    """
    # Ring truncation
    PRIME = _int_env("IWALG_PRIME", 3)
    PREC = _int_env("IWALG_PREC", 20)
    DEG = _int_env("IWALG_DEG", 16)

    # Sampling (linear ideals, pseudo-nullity in >= 2 variables)
    SEED = _int_env("IWALG_SEED", 0)
    SAMPLES = _int_env("IWALG_SAMPLES", 8)

    # Oracle size guard: maximal number of monomial basis vectors times generators
    ORACLE_MAX_DIM = _int_env("IWALG_ORACLE_MAX_DIM", 1500)

    LOG_LEVEL = os.getenv("IWALG_LOG_LEVEL", "WARNING").upper()

    # Paths
    PROJECT_ROOT = PROJECT_ROOT
    GOLDEN_DIR = PROJECT_ROOT / "1_NORMATIVE_SPECIFICATION" / "golden"


settings = Settings()


def configure_logging(level: str = None) -> None:
    """Routes iwalg loggers to stderr; stdout is reserved for reports."""
    root = logging.getLogger("iwalg")
    root.setLevel(getattr(logging, (level or settings.LOG_LEVEL), logging.WARNING))
    if not any(getattr(h, "_iwalg", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._iwalg = True
        root.addHandler(handler)
