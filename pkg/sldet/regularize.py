"""
Regularized limits and Hadamard finite-part integrals.

A RegularizableFunction carries its evaluator together with caller-supplied
power-log expansions at 0 and at infinity. The expansions are never fitted
automatically; check_expansion only warns when they look inconsistent.

Evaluators must be safe to call concurrently if the same function object is
shared between threads.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Tuple

import numpy as np
from scipy import integrate

from sldet import specfun
from sldet.config import settings
from sldet.errors import ConvergenceError, ExpansionMismatchError, InputError, QuadratureError

logger = logging.getLogger(__name__)


class Side(str, Enum):
    AT_ZERO = "at_zero"
    AT_INFINITY = "at_infinity"


Term = Tuple[float, float, int]


@dataclass(frozen=True)
class AsymptoticExpansion:
    """
    Finite sum of terms a * x**alpha * log(x)**k.
    terms: tuple of (a, alpha, k)
    """
    terms: Tuple[Term, ...] = ()
    side: Side = Side.AT_ZERO

    def __post_init__(self):
        normalized = tuple((float(a), float(alpha), int(k)) for a, alpha, k in self.terms)
        seen = set()
        for a, alpha, k in normalized:
            if k < 0:
                raise InputError(f"log power must be >= 0, got {k}")
            if (alpha, k) in seen:
                raise InputError(f"duplicate expansion term (alpha={alpha}, k={k})")
            seen.add((alpha, k))
            if self.side is Side.AT_ZERO and alpha > 0.0:
                raise InputError(f"expansion at 0 only lists exponents <= 0, got {alpha}")
            if self.side is Side.AT_INFINITY and alpha < -1.0:
                raise InputError(f"expansion at infinity only lists exponents >= -1, got {alpha}")
        object.__setattr__(self, "terms", normalized)

    def __call__(self, x):
        return self.partial_sum(x)

    def partial_sum(self, x, include_constant=True):
        log_x = math.log(x)
        total = 0.0
        for a, alpha, k in self.terms:
            if not include_constant and alpha == 0.0 and k == 0:
                continue
            total += a * x ** alpha * log_x ** k
        return total

    def constant(self):
        for a, alpha, k in self.terms:
            if alpha == 0.0 and k == 0:
                return a
        return 0.0

    def scaled(self, c):
        return AsymptoticExpansion(tuple((c * a, alpha, k) for a, alpha, k in self.terms), self.side)

    def merged(self, other):
        if other.side is not self.side:
            raise InputError("cannot merge expansions taken at different ends")
        coeffs = {}
        for a, alpha, k in self.terms + other.terms:
            coeffs[(alpha, k)] = coeffs.get((alpha, k), 0.0) + a
        return AsymptoticExpansion(tuple((a, alpha, k) for (alpha, k), a in coeffs.items()), self.side)


@dataclass(frozen=True)
class RegularizableFunction:
    evaluator: Callable[[float], float]
    expansion_at_0: AsymptoticExpansion = field(default_factory=lambda: AsymptoticExpansion((), Side.AT_ZERO))
    expansion_at_inf: AsymptoticExpansion = field(default_factory=lambda: AsymptoticExpansion((), Side.AT_INFINITY))

    def __call__(self, x):
        return self.evaluator(x)

    def expansion(self, side):
        return self.expansion_at_0 if side is Side.AT_ZERO else self.expansion_at_inf

    def linear_combination(self, a, other, b):
        """a*self + b*other, expansions combined term by term."""
        f, g = self.evaluator, other.evaluator
        return RegularizableFunction(
            evaluator=lambda x: a * f(x) + b * g(x),
            expansion_at_0=self.expansion_at_0.scaled(a).merged(other.expansion_at_0.scaled(b)),
            expansion_at_inf=self.expansion_at_inf.scaled(a).merged(other.expansion_at_inf.scaled(b)),
        )


# ----------------------
# Regularized limit
# ----------------------
def _ladder(side, x0, ratio, points):
    if side is Side.AT_ZERO:
        start = 1e-2 if x0 is None else x0
        return [start * ratio ** j for j in range(points)]
    start = 1e2 if x0 is None else x0
    return [start / ratio ** j for j in range(points)]


def reg_lim(f, end=Side.AT_ZERO, x0=None, ratio=0.5, points=12, tol=1e-8):
    """
    LIM of f at the given end: the constant coefficient a_00 of its expansion.

    f is evaluated on a geometric ladder, the non-constant expansion terms are
    subtracted and the remainder is extrapolated with Richardson (Aitken) steps
    on its leading uncancelled power.
    """
    end = Side(end)
    expansion = f.expansion(end)
    xs = _ladder(end, x0, ratio, points)
    values = np.array([f(x) for x in xs], dtype=float)
    singular = np.array([expansion.partial_sum(x, include_constant=False) for x in xs], dtype=float)
    remainder = values - singular
    if not np.all(np.isfinite(remainder)):
        raise ConvergenceError("regularized limit: non-finite values on the ladder")

    noise = 1e-13 * np.maximum(np.abs(values), np.abs(singular)).max()
    diffs = np.diff(remainder)
    if np.abs(diffs[-4:]).max() <= max(noise, 1e-15):
        return float(remainder[-1])

    def aitken(r0, r1, r2):
        denom = (r2 - r1) - (r1 - r0)
        if denom == 0.0:
            return r2
        return r2 - (r2 - r1) ** 2 / denom

    first = aitken(*remainder[-4:-1])
    second = aitken(*remainder[-3:])
    if abs(first - second) > tol * max(1.0, abs(second)) + 10.0 * noise:
        raise ConvergenceError(
            f"regularized limit did not stabilize: {first!r} vs {second!r} (tolerance {tol})"
        )
    return float(second)


# ----------------------
# Finite parts of monomials
# ----------------------
def pf_integral_01_monomial(alpha, k):
    """Finite part of the integral of x**alpha log(x)**k over (0, 1]."""
    if alpha == -1.0:
        return 0.0
    return (-1.0) ** k * math.factorial(k) / (alpha + 1.0) ** (k + 1)


def pf_integral_1inf_monomial(alpha, k):
    """Finite part of the integral of x**alpha log(x)**k over [1, oo)."""
    if alpha == -1.0:
        return 0.0
    return (-1.0) ** (k + 1) * math.factorial(k) / (alpha + 1.0) ** (k + 1)


def pf_integral_0inf_monomial(alpha, k):
    """Always 0: the two halves cancel."""
    return pf_integral_01_monomial(alpha, k) + pf_integral_1inf_monomial(alpha, k)


# ----------------------
# Quadrature
# ----------------------
def quad(func, a, b, error_cls=QuadratureError, epsabs=None, epsrel=1e-11, limit=None, **kwargs):
    """scipy quad with the configured tolerances; raises error_cls on divergence."""
    epsabs = settings.quad_epsabs if epsabs is None else epsabs
    limit = settings.quad_limit if limit is None else limit
    result = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1, **kwargs)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        logger.debug("quad on [%s, %s]: %s (abserr %.3g)", a, b, result[3], abserr)
    if not math.isfinite(value) or abserr > max(1e-7, 1e-7 * abs(value)):
        raise error_cls(f"quadrature on [{a}, {b}] did not converge: value {value!r}, error estimate {abserr!r}")
    return value


def _lower_remainder(f):
    expansion = f.expansion_at_0

    def integrand(x):
        return f(x) - expansion.partial_sum(x)
    return integrand


def _upper_remainder_mapped(f):
    """[1, oo) mapped onto (0, 1] by x = 1/t."""
    expansion = f.expansion_at_inf

    def integrand(t):
        x = 1.0 / t
        return (f(x) - expansion.partial_sum(x)) / (t * t)
    return integrand


def check_expansion(f, side, points=8):
    """
    Warn when the expansion-subtracted remainder does not decay fast enough.

    Fits log|remainder| against log x by least squares on a short ladder and
    returns the fitted exponent (None when the remainder is at rounding level).
    Never raises and never modifies the expansion.
    """
    side = Side(side)
    expansion = f.expansion(side)
    xs = np.array(_ladder(side, None, 0.5, points))
    rem = np.array([f(x) - expansion.partial_sum(x) for x in xs])
    scale = np.array([max(abs(f(x)), abs(expansion.partial_sum(x)), 1e-300) for x in xs])
    if not np.all(np.isfinite(rem)) or np.all(np.abs(rem) <= 1e-12 * scale):
        return None
    mask = np.abs(rem) > 1e-12 * scale
    if mask.sum() < 3:
        return None
    slope = float(np.polyfit(np.log(xs[mask]), np.log(np.abs(rem[mask])), 1)[0])
    if side is Side.AT_ZERO and slope <= -1.0 + 1e-3:
        logger.warning("expansion at 0 leaves a non-integrable remainder (fitted exponent %.3f)", slope)
    if side is Side.AT_INFINITY and slope >= -1.0 - 1e-3:
        logger.warning("expansion at infinity leaves a non-integrable remainder (fitted exponent %.3f)", slope)
    return slope


def pf_integral(f, diagnose=True):
    """
    Hadamard finite part of the integral of f over (0, oo).

    Splits at x = 1. On each half the expansion terms are subtracted, the
    remainder is integrated by adaptive Gauss-Kronrod quadrature and the closed
    finite parts of the subtracted monomials are added back.
    """
    if diagnose:
        check_expansion(f, Side.AT_ZERO)
        check_expansion(f, Side.AT_INFINITY)
    lower = quad(_lower_remainder(f), 0.0, 1.0, error_cls=ExpansionMismatchError)
    lower += sum(a * pf_integral_01_monomial(alpha, k) for a, alpha, k in f.expansion_at_0.terms)
    upper = quad(_upper_remainder_mapped(f), 0.0, 1.0, error_cls=ExpansionMismatchError)
    upper += sum(a * pf_integral_1inf_monomial(alpha, k) for a, alpha, k in f.expansion_at_inf.terms)
    return lower + upper


# ----------------------
# Mellin definition
# ----------------------
def _monomial_mellin(s, alpha, k, upper):
    """Continuation of int x**(s+alpha) log(x)**k over (0,1] (upper=False) or [1,oo)."""
    sign = (-1.0) ** (k + 1) if upper else (-1.0) ** k
    return sign * math.factorial(k) / (s + alpha + 1.0) ** (k + 1)


def _real_mellin_part(f, s):
    """Re(F_1(s) + F_2(s)) for complex s."""
    sigma, tau = s.real, s.imag
    lower_rem = _lower_remainder(f)
    upper_rem = _upper_remainder_mapped(f)

    def lower(x):
        return x ** sigma * math.cos(tau * math.log(x)) * lower_rem(x)

    def upper(t):
        # x = 1/t, x^s = t^-s
        return t ** -sigma * math.cos(tau * math.log(t)) * upper_rem(t)

    value = quad(lower, 0.0, 1.0, error_cls=ExpansionMismatchError)
    value += quad(upper, 0.0, 1.0, error_cls=ExpansionMismatchError)
    for a, alpha, k in f.expansion_at_0.terms:
        value += (a * _monomial_mellin(s, alpha, k, upper=False)).real
    for a, alpha, k in f.expansion_at_inf.terms:
        value += (a * _monomial_mellin(s, alpha, k, upper=True)).real
    return value


def mellin_constant_term(f, radius=None, nodes=16):
    """
    Constant Laurent coefficient at s = 0 of the Mellin transform of f.

    F(s) is sampled on a circle |s| = radius and averaged (trapezoid rule for
    the Cauchy integral of F(s)/s). F is real on the real axis, so only the
    upper half of the circle is evaluated.
    """
    if nodes % 2:
        raise InputError("nodes must be even")
    if radius is None:
        poles = [abs(alpha + 1.0) for _, alpha, _ in f.expansion_at_0.terms + f.expansion_at_inf.terms
                 if alpha != -1.0]
        radius = min([0.1] + [0.5 * p for p in poles])
    total = 0.0
    for j in range(nodes // 2 + 1):
        s = radius * complex(math.cos(2.0 * math.pi * j / nodes), math.sin(2.0 * math.pi * j / nodes))
        weight = 1.0 if j in (0, nodes // 2) else 2.0
        total += weight * _real_mellin_part(f, s)
    return total / nodes


# ----------------------
# The integral of x^s I_nu K_nu
# ----------------------
def mellin_iknu_closed(s, nu):
    """Finite part of int_0^oo x^s I_nu(x) K_nu(x) dx in Gamma functions."""
    g = specfun.gamma
    return (g((s + 1.0) / 2.0) * g(-s / 2.0) * g(nu + (s + 1.0) / 2.0)
            / (4.0 * math.sqrt(math.pi) * g(nu - (s - 1.0) / 2.0)))


def iknu_mellin_function(s, nu):
    """x^s I_nu K_nu(x) with its expansions (nu > 0)."""
    if nu <= 0.0:
        raise InputError("iknu_mellin_function needs nu > 0")
    at_zero = ((1.0 / (2.0 * nu), s, 0),) if s <= 0.0 else ()
    mu = 4.0 * nu * nu
    at_inf = []
    coeff = 0.5
    k = 0
    while s - 1.0 - 2.0 * k >= -1.0:
        at_inf.append((coeff, s - 1.0 - 2.0 * k, 0))
        k += 1
        coeff *= -(2.0 * k - 1.0) / (2.0 * k) * (mu - (2.0 * k - 1.0) ** 2) / 4.0
    return RegularizableFunction(
        evaluator=lambda x: x ** s * specfun.bessel_ik_product(nu, x),
        expansion_at_0=AsymptoticExpansion(at_zero, Side.AT_ZERO),
        expansion_at_inf=AsymptoticExpansion(tuple(at_inf), Side.AT_INFINITY),
    )
