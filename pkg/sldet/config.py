from dataclasses import dataclass
from dotenv import load_dotenv
import os

load_dotenv()


def _float(name, default):
    value = os.getenv(name)
    return float(value) if value not in (None, "") else default


def _int(name, default):
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


@dataclass(frozen=True)
class Settings:
    """
    Numerical defaults, overridable through the environment or a .env file.
    Every function that uses one of these also accepts an explicit keyword.
    """
    ode_rtol: float = 1e-11
    ode_atol: float = 1e-14
    handoff: float = 0.08
    series_terms: int = 40
    quad_epsabs: float = 1e-10
    quad_limit: int = 10000
    bessel_x_cap: float = 700.0
    zero_tol: float = 1e-9
    log_level: str = "WARNING"


def load_settings():
    return Settings(
        ode_rtol=_float("SLDET_ODE_RTOL", Settings.ode_rtol),
        ode_atol=_float("SLDET_ODE_ATOL", Settings.ode_atol),
        handoff=_float("SLDET_HANDOFF", Settings.handoff),
        series_terms=_int("SLDET_SERIES_TERMS", Settings.series_terms),
        quad_epsabs=_float("SLDET_QUAD_EPSABS", Settings.quad_epsabs),
        quad_limit=_int("SLDET_QUAD_LIMIT", Settings.quad_limit),
        bessel_x_cap=_float("SLDET_BESSEL_X_CAP", Settings.bessel_x_cap),
        zero_tol=_float("SLDET_ZERO_TOL", Settings.zero_tol),
        log_level=os.getenv("SLDET_LOG_LEVEL") or Settings.log_level,
    )


settings: Settings = load_settings()
