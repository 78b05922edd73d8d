"""
Flat key = value operator files and the operators they describe.

    # comment
    family = jacobi
    alpha = 1
    beta = 0.5
    shift = 0

Arrays (series0, series1) are comma-separated reals.
"""
import logging
import math
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from sldet import determinant
from sldet.errors import ExprEvalError, InputError
from sldet.expr import parse_expr
from sldet.ode import BoundaryCondition, Endpoint, EndpointExpansion, PotentialSpec
from sldet.schemas import Family, OperatorFile, parse_bc

logger = logging.getLogger(__name__)

_ARRAY_KEYS = ("series0", "series1", "endpoint_series0", "endpoint_series1")


def loads(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip()
        if key in values:
            raise InputError(f"line {lineno}: duplicate key {key!r}")
        value = value.strip()
        if key in _ARRAY_KEYS:
            try:
                values[key] = [float(v) for v in value.split(",") if v.strip()]
            except ValueError:
                raise InputError(f"line {lineno}: {key} must be comma-separated reals") from None
        else:
            values[key] = value
    return validate(values)


def validate(values):
    try:
        return OperatorFile(**values)
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'file'}: {err['msg']}" for err in exc.errors()
        )
        raise InputError(f"invalid operator file: {details}") from None


def load(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return loads(text)


def _format(value):
    if isinstance(value, list):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Family):
        return value.value
    return str(value)


def dumps(spec):
    lines = []
    for key in OperatorFile.model_fields:
        value = getattr(spec, key)
        if value is None:
            continue
        lines.append(f"{key} = {_format(value)}")
    return "\n".join(lines) + "\n"


# ----------------------
# Operator construction
# ----------------------
def boundary(text):
    try:
        kind, A = parse_bc(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return BoundaryCondition(kind, A)


def fit_series(q, end, terms, window=0.2, degree=14):
    """
    Power series of u^2 q near an endpoint (branching order 1), by checking that
    the limit exists and fitting a Chebyshev expansion on (0, window].
    """
    end = Endpoint(end)

    def g(u):
        x = u if end is Endpoint.LEFT else 1.0 - u
        return q(x) * u * u

    nodes = 0.5 * window * (1.0 - np.cos(np.pi * (np.arange(4 * degree) + 0.5) / (4 * degree)))
    try:
        near = [g(u) for u in (1e-4, 1e-5, 1e-6)]
        values = [g(u) for u in nodes]
    except ExprEvalError as exc:
        raise InputError(f"potential cannot be evaluated near the {end.value} endpoint: {exc}") from None
    if not all(math.isfinite(v) for v in near) or abs(near[1] - near[2]) > 1e-3 * max(1.0, abs(near[2])):
        raise InputError(f"x^2 q has no limit at the {end.value} endpoint")
    fit = np.polynomial.Chebyshev.fit(nodes, values, degree, domain=[0.0, window])
    coeffs = fit.convert(kind=np.polynomial.Polynomial, domain=[0.0, window], window=[0.0, window]).coef
    out = np.zeros(max(terms, 3) + 1)
    n = min(len(coeffs), len(out))
    out[:n] = coeffs[:n]
    logger.info("fitted %d-term series at the %s endpoint (limit %.10g)", degree + 1, end.value, out[0])
    return tuple(float(v) for v in out)


def build_operator(spec, terms=None):
    """OperatorSpec for an OperatorFile, shift included."""
    family = spec.family
    bc0, bc1 = boundary(spec.bc0), boundary(spec.bc1)
    if family is Family.dirichlet:
        op = determinant.OperatorSpec(determinant.dirichlet_laplacian().potential, bc0, bc1)
    elif family is Family.bessel:
        op = determinant.model_operator(spec.nu)
    elif family is Family.jacobi:
        op = determinant.jacobi_potential(spec.alpha, spec.beta, terms)
    elif family is Family.factorized:
        op = determinant.rational_operator(spec.s0, spec.s1, spec.c or 0.0, terms)
    else:
        q = parse_expr(spec.potential_expr)
        if spec.series0 is not None:
            left = EndpointExpansion(Endpoint.LEFT, spec.N, tuple(spec.series0))
            right = EndpointExpansion(Endpoint.RIGHT, spec.N, tuple(spec.series1))
        else:
            count = 40 if terms is None else terms
            left = EndpointExpansion(Endpoint.LEFT, 1, fit_series(q, Endpoint.LEFT, count))
            right = EndpointExpansion(Endpoint.RIGHT, 1, fit_series(q, Endpoint.RIGHT, count))
        op = determinant.OperatorSpec(PotentialSpec(left, right, q), bc0, bc1)
    if family in (Family.bessel, Family.jacobi, Family.factorized):
        if (bc0.kind, bc1.kind) != (op.bc_left.kind, op.bc_right.kind):
            raise InputError(f"family {family.value} fixes the boundary conditions to "
                             f"{op.bc_left.kind.value}/{op.bc_right.kind.value}")
    return op.shifted(spec.shift) if spec.shift else op


def builtin(family, nu=None, alpha=None, beta=None, s0=None, s1=None, shift=0.0):
    """OperatorFile for a built-in family from command-line parameters."""
    values = {"family": family, "shift": shift}
    for key, value in (("nu", nu), ("alpha", alpha), ("beta", beta), ("s0", s0), ("s1", s1)):
        if value is not None:
            values[key] = value
    return validate(values)
