from enum import Enum
from typing import Dict, List, Optional

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator


class Family(str, Enum):
    dirichlet = "dirichlet"
    bessel = "bessel"
    jacobi = "jacobi"
    factorized = "factorized"
    custom = "custom"


_DEFAULT_BCS = {
    Family.dirichlet: ("dirichlet", "dirichlet"),
    Family.bessel: ("friedrichs", "dirichlet"),
    Family.jacobi: ("friedrichs", "friedrichs"),
    Family.factorized: ("friedrichs", "friedrichs"),
    Family.custom: ("friedrichs", "friedrichs"),
}

_REQUIRED = {
    Family.bessel: ("nu",),
    Family.jacobi: ("alpha", "beta"),
    Family.factorized: ("s0", "s1"),
    Family.custom: ("potential_expr",),
}


def parse_bc(text):
    """'dirichlet' | 'friedrichs' | 'neumann' | 'neumann:<A>' -> (kind, A)."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind in ("dirichlet", "friedrichs") and not arg:
        return kind, 0.0
    if kind == "neumann":
        try:
            return kind, float(arg) if arg.strip() else 0.0
        except ValueError:
            raise ValueError(f"bad Neumann parameter in {text!r}") from None
    raise ValueError(f"unknown boundary condition {text!r}")


# ----------------------
# Operator spec file
# ----------------------
class OperatorFile(BaseModel):
    """
    One operator file. series0 and series1 are the endpoint series (the
    coefficients of x^2 q at 0 and of (1-x)^2 q at 1); endpoint_series0 and
    endpoint_series1 are accepted as their long names.
    """
    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    family: Family
    nu: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    s0: Optional[float] = None
    s1: Optional[float] = None
    c: Optional[float] = None
    potential_expr: Optional[str] = None
    N: PositiveInt = 1
    bc0: Optional[str] = None
    bc1: Optional[str] = None
    shift: float = 0.0
    series0: Optional[List[float]] = Field(None, validation_alias=AliasChoices("series0", "endpoint_series0"))
    series1: Optional[List[float]] = Field(None, validation_alias=AliasChoices("series1", "endpoint_series1"))

    @field_validator("bc0", "bc1")
    @classmethod
    def check_bc(cls, value):
        if value is not None:
            parse_bc(value)
        return value

    @model_validator(mode="after")
    def fill_defaults(self):
        for key in _REQUIRED.get(self.family, ()):
            if getattr(self, key) is None:
                raise ValueError(f"family {self.family.value} needs {key}")
        left, right = _DEFAULT_BCS[self.family]
        if self.bc0 is None:
            self.bc0 = left
        if self.bc1 is None:
            self.bc1 = right
        if (self.series0 is None) != (self.series1 is None):
            raise ValueError("series0 and series1 must be given together")
        if self.series0 is not None and self.family is not Family.custom:
            raise ValueError("endpoint series are only accepted for the custom family")
        if self.family is Family.custom and self.N > 1 and self.series0 is None:
            raise ValueError("branching order N > 1 needs explicit endpoint series")
        return self


# ----------------------
# Reports
# ----------------------
class DiagnosticsReport(BaseModel):
    wronskian_drift: float
    series_tail: float
    route: str
    negative_eigenvalues: Optional[int] = None


class DetReport(BaseModel):
    nu0: float
    nu1: float
    wronskian: float
    det: float
    log_det: Optional[float]
    diagnostics: DiagnosticsReport


class EigenvalueEntry(BaseModel):
    index: int
    eigenvalue: float
    sign_changes: int


class SpectrumReport(BaseModel):
    count: int
    eigenvalues: List[EigenvalueEntry]


class VerifyReport(BaseModel):
    family: Family
    parameters: Dict[str, float]
    routes: Dict[str, float]
    discrepancies: Dict[str, float]
    tolerances: Dict[str, float]
    max_rel_discrepancy: float


class SeriesReport(BaseModel):
    endpoint: int
    nu: float
    N: int
    shift: float
    handoff: float
    coeffs: List[float]
