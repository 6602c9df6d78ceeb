import os
from dataclasses import dataclass, replace
from fractions import Fraction

from dotenv import load_dotenv

# Local runs pick up .env, CI runs use the process environment
if os.path.exists(".env"):
    load_dotenv()


@dataclass(frozen=True)
class Settings:
    max_degree: int = 16
    samples: int = 25
    seed: int = 20240611
    sample_range: int = 3
    sample_denoms: tuple = (1, 2, 3)
    step: float = 1e-3
    fd_step: float = 1e-6
    chart_box: float = 50.0
    tolerance: float = 1e-6
    log_level: str = "WARNING"
    heartbeat_file: str | None = None
    parallel: bool = False


def _int_env(name, default):
    raw = os.getenv(name)
    return int(raw) if raw not in (None, "") else default


def _float_env(name, default):
    raw = os.getenv(name)
    return float(raw) if raw not in (None, "") else default


def load_settings():
    """Snapshot of the ENGEL_* environment; CLI flags override it with dataclasses.replace."""
    denoms = os.getenv("ENGEL_SAMPLE_DENOMS", "1,2,3")
    return Settings(
        max_degree=_int_env("ENGEL_MAX_DEGREE", 16),
        samples=_int_env("ENGEL_SAMPLES", 25),
        seed=_int_env("ENGEL_SEED", 20240611),
        sample_range=_int_env("ENGEL_SAMPLE_RANGE", 3),
        sample_denoms=tuple(int(d) for d in denoms.split(",") if d.strip()),
        step=_float_env("ENGEL_STEP", 1e-3),
        fd_step=_float_env("ENGEL_FD_STEP", 1e-6),
        chart_box=_float_env("ENGEL_CHART_BOX", 50.0),
        tolerance=_float_env("ENGEL_TOLERANCE", 1e-6),
        log_level=os.getenv("ENGEL_LOG_LEVEL", "WARNING"),
        heartbeat_file=os.getenv("ENGEL_HEARTBEAT_FILE") or None,
    )


SETTINGS = load_settings()


def as_fraction(value):
    """Exact rational from int, Fraction or a '3/2' style string. Floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def configure(**overrides):
    """Replace the active settings; None values keep the current field."""
    global SETTINGS
    SETTINGS = replace(SETTINGS, **{k: v for k, v in overrides.items() if v is not None})
    return SETTINGS
