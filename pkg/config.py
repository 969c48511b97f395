import logging
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv

from errors import ConfigError

load_dotenv()

# Always write logs next to this file unless SBM_LOG_FILE says otherwise
DEFAULT_LOG = Path(__file__).with_name("sbm_debug.log")
LOG_FILE = Path(os.getenv("SBM_LOG_FILE", str(DEFAULT_LOG))).expanduser().resolve()

_LOG_FORMAT = "%(asctime)s %(name)s %(message)s"


class _SafeFileHandler(logging.FileHandler):
    """File handler that never raises (stdout is reserved for CSV / MCP stdio)."""

    def handleError(self, record: logging.LogRecord) -> None:
        pass


def get_logger(name: str) -> logging.Logger:
    """
    Returns a file-only logger.
    Messages follow the tag style: [TIMING], [WARN], [MC], [VERIFY], [TOOL][...].
    """
    logger = logging.getLogger(f"sbm.{name}")
    root = logging.getLogger("sbm")
    if not root.handlers:
        try:
            handler: logging.Handler = _SafeFileHandler(LOG_FILE, encoding="utf-8", delay=True)
        except Exception:
            handler = logging.NullHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        root.addHandler(handler)
        root.setLevel(logging.INFO)
        root.propagate = False
    return logger


def _env_float(name: str, default: float, positive: bool = True) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}")
    if positive and not value > 0:
        raise ConfigError(f"{name} must be > 0, got {raw!r}")
    return value


def _env_int(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {raw!r}")
    return value


@dataclass(frozen=True)
class Settings:
    """Process-wide numerical and I/O settings (read from .env / environment)."""

    output_dir: Path = Path("runs")
    workers: int = 1
    block_size: int = 4096
    max_steps: int = 10_000_000
    stehfest_degree: int = 32
    inversion_rtol: float = 1e-6
    inversion_t_min: float = 1e-6
    inversion_t_max: float = 10.0
    quad_tol: float = 1e-10
    ratio_max_spread: float = 100.0
    ratio_max_slope: float = 0.05

    def __post_init__(self) -> None:
        if self.stehfest_degree % 2 or self.stehfest_degree < 6:
            raise ConfigError("SBM_STEHFEST_DEGREE must be an even integer >= 6")
        if not self.inversion_t_min < self.inversion_t_max:
            raise ConfigError("SBM_INVERSION_T_MIN must be below SBM_INVERSION_T_MAX")

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            output_dir=Path(os.getenv("SBM_OUTPUT_DIR", "runs")).expanduser(),
            workers=_env_int("SBM_WORKERS", 1),
            block_size=_env_int("SBM_BLOCK_SIZE", 4096),
            max_steps=_env_int("SBM_MAX_STEPS", 10_000_000),
            stehfest_degree=_env_int("SBM_STEHFEST_DEGREE", 32, minimum=6),
            inversion_rtol=_env_float("SBM_INVERSION_RTOL", 1e-6),
            inversion_t_min=_env_float("SBM_INVERSION_T_MIN", 1e-6),
            inversion_t_max=_env_float("SBM_INVERSION_T_MAX", 10.0),
            quad_tol=_env_float("SBM_QUAD_TOL", 1e-10),
            ratio_max_spread=_env_float("SBM_RATIO_MAX_SPREAD", 100.0),
            ratio_max_slope=_env_float("SBM_RATIO_MAX_SLOPE", 0.05),
        )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()
