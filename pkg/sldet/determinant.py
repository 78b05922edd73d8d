"""
Zeta-regularized determinants.

det_wronskian is the general route:

    det L = pi * W(psi, phi) / (2^(nu0 + nu1) * Gamma(nu0 + 1) * Gamma(nu1 + 1))

with phi normalized at 0 and psi normalized at 1. The closed forms below (model
operator, factorized operators, Jacobi operators) are independent of it and
serve as oracles.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from sldet import ode, specfun
from sldet.config import settings
from sldet.errors import InputError
from sldet.ode import BoundaryCondition, Endpoint, EndpointExpansion, PotentialSpec
from sldet.regularize import AsymptoticExpansion, RegularizableFunction, Side, quad, reg_lim

logger = logging.getLogger(__name__)

DRIFT_POINTS = (0.2, 0.35, 0.5, 0.65, 0.8)


class Route(str, Enum):
    WRONSKIAN = "wronskian"
    MODEL_CLOSED = "model_closed"
    FACTORIZED_CLOSED = "factorized_closed"
    JACOBI_CLOSED = "jacobi_closed"
    ZETA_ORACLE = "zeta_oracle"
    TRACE = "trace"
    PRODUCT = "product"


@dataclass(frozen=True)
class OperatorSpec:
    potential: PotentialSpec
    bc_left: BoundaryCondition
    bc_right: BoundaryCondition
    shift: float = 0.0

    def __post_init__(self):
        self.bc_left.validate(self.potential.left)
        self.bc_right.validate(self.potential.right)

    @property
    def nu0(self):
        return self.bc_left.nu(self.potential.left.q0)

    @property
    def nu1(self):
        return self.bc_right.nu(self.potential.right.q0)

    def shifted(self, z):
        return replace(self, shift=float(z))

    def perturbed(self, chi, t):
        return replace(self, potential=self.potential.perturbed(chi, t))

    def solutions(self):
        """(phi, psi): normalized at 0 and at 1."""
        phi = ode.normalized_solution(self.potential, Endpoint.LEFT, self.bc_left, self.shift)
        psi = ode.normalized_solution(self.potential, Endpoint.RIGHT, self.bc_right, self.shift)
        return phi, psi


@dataclass(frozen=True)
class Diagnostics:
    wronskian_drift: float
    series_tail: float
    route: Route = Route.WRONSKIAN
    negative_eigenvalues: Optional[int] = None


@dataclass(frozen=True)
class DetResult:
    nu0: float
    nu1: float
    wronskian: float
    det: float
    log_det: Optional[float]
    diagnostics: Diagnostics

    @property
    def is_zero(self):
        return self.log_det is None


def normalization(nu0, nu1):
    """pi / (2^(nu0+nu1) Gamma(nu0+1) Gamma(nu1+1))."""
    return math.pi / (2.0 ** (nu0 + nu1) * specfun.gamma(nu0 + 1.0) * specfun.gamma(nu1 + 1.0))


def det_wronskian(op, zero_tol=None, count_negative=False):
    """
    Determinant from the Wronskian of the normalized solutions.

    Reports det = 0 (log_det None) when |W| falls below zero_tol relative to
    the size of the products psi*phi' and psi'*phi. log_det is log|det|; with
    count_negative the number of negative eigenvalues of op is recorded in
    the diagnostics, and a negative det is flagged with a warning.
    """
    zero_tol = settings.zero_tol if zero_tol is None else zero_tol
    phi, psi = op.solutions()
    sweep = {}
    for x in DRIFT_POINTS:
        psi_y, psi_dy = psi(x)
        phi_y, phi_dy = phi(x)
        sweep[x] = (psi_y * phi_dy - psi_dy * phi_y, abs(psi_y * phi_dy) + abs(psi_dy * phi_y))
    W = sweep[0.5][0]
    scale = max(s for _, s in sweep.values())
    drift = max(abs(w - W) for w, _ in sweep.values())
    nu0, nu1 = op.nu0, op.nu1
    tail = max(phi.seed.series_tail, psi.seed.series_tail)

    negative = None
    if count_negative:
        negative = ode.sturm_count(phi, psi).below
        if negative:
            logger.warning("operator has %d negative eigenvalue(s); reporting the real formula value", negative)

    if abs(W) <= zero_tol * scale:
        diagnostics = Diagnostics(wronskian_drift=drift, series_tail=tail, negative_eigenvalues=negative)
        return DetResult(nu0=nu0, nu1=nu1, wronskian=W, det=0.0, log_det=None, diagnostics=diagnostics)

    rel_drift = drift / abs(W)
    if rel_drift > 1e-8:
        logger.warning("Wronskian drift %.3g relative across the sweep", rel_drift)
    det = normalization(nu0, nu1) * W
    diagnostics = Diagnostics(wronskian_drift=rel_drift, series_tail=tail, negative_eigenvalues=negative)
    return DetResult(nu0=nu0, nu1=nu1, wronskian=W, det=det, log_det=math.log(abs(det)), diagnostics=diagnostics)


def det_shifted(op, z, **kwargs):
    """det(L + z)."""
    return det_wronskian(op.shifted(z), **kwargs)


# ----------------------
# Constructors
# ----------------------
def _zero_series(end, terms=3):
    return EndpointExpansion(end, 1, (0.0,) * terms)


def _free_potential():
    return PotentialSpec(_zero_series(Endpoint.LEFT), _zero_series(Endpoint.RIGHT), lambda x: 0.0)


def dirichlet_laplacian():
    """D1: q = 0, Dirichlet at both ends."""
    return OperatorSpec(_free_potential(), BoundaryCondition.dirichlet(), BoundaryCondition.dirichlet())


def dirichlet_neumann(A=0.0):
    """D2: q = 0, Dirichlet at 0, generalized Neumann at 1."""
    return OperatorSpec(_free_potential(), BoundaryCondition.dirichlet(), BoundaryCondition.neumann(A))


def neumann_laplacian(A0=0.0, A1=0.0):
    """D3: q = 0, generalized Neumann at both ends."""
    return OperatorSpec(_free_potential(), BoundaryCondition.neumann(A0), BoundaryCondition.neumann(A1))


def model_series(nu, end, terms=None):
    """Series of u^2 (nu^2 - 1/4)/x^2 at either end."""
    terms = max(settings.series_terms, 4) if terms is None else terms
    a = nu * nu - 0.25
    if Endpoint(end) is Endpoint.LEFT:
        coeffs = [a] + [0.0] * terms
    else:
        # x^2 = (1-u)^2: u^2 / (1-u)^2 = sum_{m>=2} (m-1) u^m
        coeffs = [0.0, 0.0] + [a * (m - 1) for m in range(2, terms + 1)]
    return EndpointExpansion(end, 1, tuple(coeffs))


def model_operator(nu):
    """L_nu = -d^2/dx^2 + (nu^2 - 1/4)/x^2, Friedrichs at 0, Dirichlet at 1."""
    if nu < 0.0:
        raise InputError(f"model operator needs nu >= 0, got {nu}")
    a = nu * nu - 0.25
    potential = PotentialSpec(model_series(nu, Endpoint.LEFT), model_series(nu, Endpoint.RIGHT),
                              lambda x: a / (x * x))
    return OperatorSpec(potential, BoundaryCondition.friedrichs(), BoundaryCondition.dirichlet())


def det_model_closed(nu):
    """sqrt(2 pi) / (2^nu Gamma(nu + 1))."""
    if nu < 0.0:
        raise InputError(f"nu must be >= 0, got {nu}")
    return math.sqrt(2.0 * math.pi) / (2.0 ** nu * specfun.gamma(nu + 1.0))


def det_derivative_model_check(nu, h=1e-3):
    """
    Central difference in nu of log det L_nu via the Wronskian route, and the
    closed value -log 2 - digamma(nu + 1).
    """
    if nu - h <= 0.0:
        raise InputError("need nu - h > 0")
    upper = det_wronskian(model_operator(nu + h)).log_det
    lower = det_wronskian(model_operator(nu - h)).log_det
    fd = (upper - lower) / (2.0 * h)
    closed = -math.log(2.0) - specfun.digamma(nu + 1.0)
    return fd, closed


# ----------------------
# Green's function and the variation formula
# ----------------------
def green_diagonal(op, x):
    """G(x, x) = phi(x) psi(x) / W(psi, phi) for the resolvent of op."""
    phi, psi = op.solutions()
    return phi(x)[0] * psi(x)[0] / ode.wronskian(psi, phi)


def potential_variation_check(op, chi, support, t=0.0, h=1e-3, nodes=64):
    """
    d/dt log det(L + t chi) two ways: a central difference of the Wronskian
    route, and the trace of chi against the Green's function diagonal.

    chi must vanish outside support = (a, b) with 0 < a < b < 1.
    """
    a, b = support
    if not 0.0 < a < b < 1.0:
        raise InputError(f"support {support} must lie strictly inside (0, 1)")
    fd = (det_wronskian(op.perturbed(chi, t + h)).log_det
          - det_wronskian(op.perturbed(chi, t - h)).log_det) / (2.0 * h)

    base = op.perturbed(chi, t)
    phi, psi = base.solutions()
    nodes_ref, weights = np.polynomial.legendre.leggauss(nodes)
    xs = 0.5 * (b - a) * nodes_ref + 0.5 * (a + b)
    phi_y, _ = phi.sample(xs)
    psi_y, _ = psi.sample(xs)
    W = ode.wronskian(psi, phi)
    chis = np.array([chi(x) for x in xs])
    trace = 0.5 * (b - a) * float(np.sum(weights * chis * phi_y * psi_y)) / W
    return fd, trace


# ----------------------
# Factorized operators  l = d^t d,  d = d/dx + S
# ----------------------
@dataclass(frozen=True)
class FactorizedSpec:
    """
    S = s0/x + S1(x) = s1/(1-x) + S2(x), S1 smooth on [0,1), S2 smooth on (0,1].
    int_S1 optionally gives x -> int_0^x S1 in closed form.
    """
    s0: float
    s1: float
    S: Callable[[float], float]
    S1: Callable[[float], float]
    S2: Callable[[float], float]
    dS: Optional[Callable[[float], float]] = None
    int_S1: Optional[Callable[[float], float]] = field(default=None, compare=False)

    @property
    def nu0(self):
        return abs(self.s0 + 0.5)

    @property
    def nu1(self):
        return abs(self.s1 - 0.5)

    def phase(self, x):
        """Finite-part integral of S over (0, x]."""
        if self.int_S1 is not None:
            return self.s0 * math.log(x) + self.int_S1(x)
        if x <= 0.5:
            return self.s0 * math.log(x) + quad(self.S1, 0.0, x)
        head = self.s0 * math.log(0.5) + quad(self.S1, 0.0, 0.5)
        return head + self.s1 * (math.log(0.5) - math.log(1.0 - x)) + quad(self.S2, 0.5, x)

    def phase_at_one(self):
        """LIM_{x -> 1} of the phase: the finite part over (0, 1)."""
        f = RegularizableFunction(
            evaluator=lambda t: self.phase(1.0 - t),
            expansion_at_0=AsymptoticExpansion(((-self.s1, 0.0, 1),), Side.AT_ZERO),
        )
        return reg_lim(f, Side.AT_ZERO)

    def potential(self, x):
        """S^2 - S'."""
        if self.dS is None:
            raise InputError("factorized spec has no derivative of S")
        s = self.S(x)
        return s * s - self.dS(x)


def det_factorized_closed(f):
    nu0, nu1 = f.nu0, f.nu1
    g = specfun.gamma
    if f.s0 <= -0.5 and f.s1 >= 0.5:
        return 0.0
    P1 = f.phase_at_one()
    if f.s0 > -0.5 and f.s1 < 0.5:
        integral = quad(lambda x: math.exp(2.0 * f.phase(x)), 0.0, 1.0)
        return (math.pi / (2.0 ** (nu0 + nu1 - 2.0) * g(nu0) * g(nu1))
                * math.exp(-P1) * integral)
    if f.s0 > -0.5:
        return math.pi / (2.0 ** (nu0 + nu1 - 1.0) * g(nu0) * g(nu1 + 1.0)) * math.exp(P1)
    return math.pi / (2.0 ** (nu0 + nu1 - 1.0) * g(nu0 + 1.0) * g(nu1)) * math.exp(-P1)


def rational_factorized(s0, s1, c=0.0):
    """S = s0/x + s1/(1-x) + c."""
    return FactorizedSpec(
        s0=s0,
        s1=s1,
        S=lambda x: s0 / x + s1 / (1.0 - x) + c,
        S1=lambda x: s1 / (1.0 - x) + c,
        S2=lambda x: s0 / x + c,
        dS=lambda x: -s0 / (x * x) + s1 / ((1.0 - x) ** 2),
        int_S1=lambda x: -s1 * math.log1p(-x) + c * x,
    )


def _rational_series(a, b, c, terms):
    """
    u^2 q near u = 0 for S = a/u + b/(1-u) + c written in the local coordinate.
    """
    coeffs = [a * a + a, 2.0 * a * b + 2.0 * c * a]
    for m in range(2, terms + 1):
        coeffs.append((b * b - b) * (m - 1) + 2.0 * a * b + 2.0 * c * b + (c * c if m == 2 else 0.0))
    return coeffs


def factorized_potential(f, left_series, right_series, N=1):
    """OperatorSpec for d^t d with Friedrichs conditions at both ends."""
    potential = PotentialSpec(
        EndpointExpansion(Endpoint.LEFT, N, tuple(left_series)),
        EndpointExpansion(Endpoint.RIGHT, N, tuple(right_series)),
        f.potential,
    )
    op = OperatorSpec(potential, BoundaryCondition.friedrichs(), BoundaryCondition.friedrichs())
    for nu, expected, end in ((op.nu0, f.nu0, "left"), (op.nu1, f.nu1, "right")):
        if abs(nu - expected) > 1e-9:
            raise InputError(f"{end} series gives nu={nu}, factorization gives {expected}")
    return op


def rational_operator(s0, s1, c=0.0, terms=None):
    """The operator d^t d for the rational S, with analytic endpoint series."""
    terms = settings.series_terms if terms is None else terms
    f = rational_factorized(s0, s1, c)
    # at x = 1 the roles of (s0, s1) swap and u = 1 - x flips the sign of S
    left = _rational_series(s0, s1, c, terms)
    right = _rational_series(-s1, -s0, -c, terms)
    return factorized_potential(f, left, right)


# ----------------------
# Jacobi operators
# ----------------------
def jacobi_factorized(alpha, beta):
    """S for the Jacobi operator; s0 = 1/2 + beta, s1 = -1/2 - alpha."""
    b = 0.5 + beta
    a = 0.5 + alpha
    half = 0.5 * math.pi

    def S(x):
        return b * half / math.tan(half * x) - a * half * math.tan(half * x)

    def dS(x):
        return -b * half * half / math.sin(half * x) ** 2 - a * half * half / math.cos(half * x) ** 2

    def int_S1(x):
        return b * (math.log(math.sin(half * x) / x) - math.log(half)) + a * math.log(math.cos(half * x))

    return FactorizedSpec(
        s0=b,
        s1=-a,
        S=S,
        S1=lambda x: S(x) - b / x,
        S2=lambda x: S(x) + a / (1.0 - x),
        dS=dS,
        int_S1=int_S1,
    )


def _series_reciprocal(a):
    r = np.zeros_like(a)
    r[0] = 1.0 / a[0]
    for n in range(1, len(a)):
        r[n] = -np.dot(a[1:n + 1], r[n - 1::-1]) / a[0]
    return r


def _truncated_mul(a, b):
    return np.polynomial.polynomial.polymul(a, b)[:len(a)]


def jacobi_series(alpha, beta, terms=None):
    """
    Taylor coefficients of x^2 q(x) at x = 0 for the Jacobi potential.
    The series at x = 1 is the same with alpha and beta exchanged.
    """
    terms = settings.series_terms if terms is None else terms
    n = terms + 1
    # sin(pi x)/(pi x) and cos(pi x) as power series in x
    s = np.zeros(n)
    c = np.zeros(n)
    for j in range(0, n, 2):
        s[j] = (-1) ** (j // 2) * math.pi ** j / math.factorial(j + 1)
        c[j] = (-1) ** (j // 2) * math.pi ** j / math.factorial(j)
    A, B, C, D = _jacobi_weights(alpha, beta)
    inv_s2 = _series_reciprocal(_truncated_mul(s, s))
    numerator = A * _truncated_mul(c, c) - C * c
    numerator[0] += B
    out = 0.25 * _truncated_mul(numerator, inv_s2)
    if n > 2:
        out[2] += 0.25 * math.pi ** 2 * D
    return tuple(float(v) for v in out)


def _jacobi_weights(alpha, beta):
    A = (alpha + beta + 2.0) ** 2 - 1.0
    B = (alpha - beta) ** 2
    C = 2.0 * (alpha - beta) * (alpha + beta + 2.0)
    D = 2.0 * (alpha + beta + 1.0)
    return A, B, C, D


def jacobi_potential(alpha, beta, terms=None):
    """OperatorSpec of the Jacobi operator, Friedrichs at both ends."""
    if alpha <= -1.0 or beta <= -1.0:
        raise InputError(f"Jacobi operator needs alpha, beta > -1, got ({alpha}, {beta})")
    A, B, C, D = _jacobi_weights(alpha, beta)
    pi = math.pi

    def q(x):
        sin = math.sin(pi * x)
        cos = math.cos(pi * x)
        return 0.25 * pi * pi * (A * (cos / sin) ** 2 + B / sin ** 2 - C * cos / sin ** 2 + D)

    potential = PotentialSpec(
        EndpointExpansion(Endpoint.LEFT, 1, jacobi_series(alpha, beta, terms)),
        EndpointExpansion(Endpoint.RIGHT, 1, jacobi_series(beta, alpha, terms)),
        q,
    )
    return OperatorSpec(potential, BoundaryCondition.friedrichs(), BoundaryCondition.friedrichs())


def det_jacobi_closed(alpha, beta):
    """2 pi^(-1-alpha-beta) / Gamma(2 + alpha + beta); 0 at alpha = beta = -1."""
    if alpha < -1.0 or beta < -1.0:
        raise InputError(f"Jacobi determinant needs alpha, beta >= -1, got ({alpha}, {beta})")
    x = 2.0 + alpha + beta
    if x == 0.0:
        return 0.0
    return 2.0 * math.pi ** (-1.0 - alpha - beta) / specfun.gamma(x)
