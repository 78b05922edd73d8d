"""
Special functions for the determinant routes.

Everything here is a pure function of its arguments. The coefficient tables
are module-level tuples and are never mutated, so the functions are safe to
call from any number of threads.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from sldet.config import settings
from sldet.errors import BesselOverflowError, ConvergenceError, InputError, PoleError

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
LOG_2PI = math.log(2.0 * math.pi)

_EPS = 1e-16
_MAXIT = 10000

# ----------------------
# Gamma family
# ----------------------
# Lanczos approximation, g = 6.0246800407767296, 13 terms, as a rational function
# in descending powers. The denominator is x(x+1)...(x+11).
_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_NUM = (
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
)
_LANCZOS_DEN = (
    1.0, 66.0, 1925.0, 32670.0, 357423.0, 2637558.0, 13339535.0,
    45995730.0, 105258076.0, 150917976.0, 120543840.0, 39916800.0, 0.0,
)


def _lanczos_sum_expg_scaled(x):
    if x <= 1.0:
        return np.polyval(_LANCZOS_NUM, x) / np.polyval(_LANCZOS_DEN, x)
    y = 1.0 / x
    return np.polyval(_LANCZOS_NUM[::-1], y) / np.polyval(_LANCZOS_DEN[::-1], y)


def _check_pole(x, name):
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"{name} has a pole at x={x}")


def _sinpi(x):
    """sin(pi*x), exactly zero at the integers."""
    n = round(x)
    value = math.sin(math.pi * (x - n))
    return -value if n % 2 else value


def _cospi(x):
    n = round(x)
    value = math.cos(math.pi * (x - n))
    return -value if n % 2 else value


def gamma(x):
    """Gamma function; reflection for x < 1/2."""
    x = float(x)
    _check_pole(x, "gamma")
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    zgh = x + _LANCZOS_G - 0.5
    return float(_lanczos_sum_expg_scaled(x)) * math.exp((x - 0.5) * (math.log(zgh) - 1.0))


def log_gamma(x):
    """log|Gamma(x)|."""
    x = float(x)
    _check_pole(x, "log_gamma")
    if x < 0.5:
        return math.log(math.pi / abs(_sinpi(x))) - log_gamma(1.0 - x)
    zgh = x + _LANCZOS_G - 0.5
    return math.log(float(_lanczos_sum_expg_scaled(x))) + (x - 0.5) * (math.log(zgh) - 1.0)


def digamma(x):
    """
    psi(x) = Gamma'(x)/Gamma(x).

    Shifts the argument up to x >= 10 with psi(x) = psi(x+1) - 1/x, then sums the
    Stirling series. Reflection handles x < 0.
    """
    x = float(x)
    _check_pole(x, "digamma")
    if x < 0.0:
        return digamma(1.0 - x) - math.pi * _cospi(x) / _sinpi(x)
    value = 0.0
    while x < 10.0:
        value -= 1.0 / x
        x += 1.0
    r = 1.0 / x
    value += math.log(x) - 0.5 * r
    r2 = r * r
    value -= r2 * (1.0 / 12.0
               - r2 * (1.0 / 120.0
               - r2 * (1.0 / 252.0
               - r2 * (1.0 / 240.0
               - r2 * (1.0 / 132.0
               - r2 * 691.0 / 32760.0)))))
    return value


# ----------------------
# Riemann / Hurwitz zeta
# ----------------------
def riemann_zeta_at_zero():
    """(zeta_R(0), zeta_R'(0))."""
    return -0.5, -0.5 * LOG_2PI


_BERNOULLI_2J = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)


def _hurwitz_parts(sigma, a, n_direct=20):
    """
    Split zeta(sigma, a) = regular + pole / (sigma - 1).

    Direct sum of n_direct terms followed by Euler-Maclaurin with four Bernoulli
    corrections. Keeping the pole part separate lets callers cancel it against a
    vanishing prefactor.
    """
    regular = 0.0
    for n in range(n_direct):
        regular += (n + a) ** -sigma
    b = n_direct + a
    regular += 0.5 * b ** -sigma
    rising = sigma
    power = b ** (-sigma - 1.0)
    for j, bern in enumerate(_BERNOULLI_2J, start=1):
        regular += bern / math.factorial(2 * j) * rising * power
        rising *= (sigma + 2 * j - 1) * (sigma + 2 * j)
        power /= b * b
    return regular, b ** (1.0 - sigma)


def hurwitz_zeta(sigma, a):
    """Hurwitz zeta sum_{n>=0} (n+a)^-sigma, continued to sigma != 1 (a > 0)."""
    sigma = float(sigma)
    if a <= 0:
        raise InputError(f"hurwitz_zeta needs a > 0, got a={a}")
    if sigma == 1.0:
        raise PoleError("hurwitz_zeta has a pole at sigma=1")
    regular, pole = _hurwitz_parts(sigma, a)
    return regular + pole / (sigma - 1.0)


def riemann_zeta(sigma):
    return hurwitz_zeta(sigma, 1.0)


# ----------------------
# Two-parameter zeta zeta_lambda(s) = sum n^-s (n+lambda)^-s
# ----------------------
@dataclass(frozen=True)
class ZetaLambdaResult:
    lam: float
    value_at_0: float
    derivative_at_0: float
    derivative_fd: float

    @property
    def closed_value_at_0(self):
        return -(1.0 + self.lam) / 2.0


def _binomial_neg_s_derivative(s, k):
    """d/ds C(-s, k) at a simple zero s = -j0, 0 <= j0 < k."""
    j0 = int(round(-s))
    value = -1.0
    for j in range(k):
        if j != j0:
            value *= -s - j
    return value / math.factorial(k)


def zeta_lambda(s, lam, tol=1e-12, max_terms=5000, pole_guard=1e-10):
    """
    Continuation of sum_{n>=1} n^-s (n+lam)^-s.

    The terms with n <= lam+1 are summed directly; the rest are expanded
    binomially, (n+lam)^-s = sum_k C(-s,k) lam^k n^(-s-k), which turns the tail
    into Hurwitz zeta values at 2s+k. Where 2s+k = 1 and C(-s,k) vanishes the
    product has a finite limit; otherwise it is a pole.
    """
    s = float(s)
    lam = float(lam)
    if lam <= -1.0:
        raise InputError(f"zeta_lambda needs lambda > -1, got {lam}")
    n0 = int(math.floor(lam + 1.0))
    total = 0.0
    for n in range(1, n0 + 1):
        total += n ** -s * (n + lam) ** -s
    a = float(n0 + 1)

    # past this index no removable singularity is left
    last_special = 1.0 - 2.0 * s
    binom = 1.0
    lam_k = 1.0
    small_run = 0
    for k in range(max_terms):
        if k > 0:
            binom *= (-s - k + 1) / k
            lam_k *= lam
        sigma = 2.0 * s + k
        weight = binom * lam_k
        regular, pole = _hurwitz_parts(sigma, a)
        if sigma == 1.0:
            if k % 2 == 1 and s == math.floor(s) and binom == 0.0:
                term = _binomial_neg_s_derivative(s, k) * lam_k * pole / 2.0
            else:
                raise PoleError(f"zeta_lambda has a pole at s={s}")
        elif abs(sigma - 1.0) < pole_guard and weight != 0.0:
            raise PoleError(f"zeta_lambda evaluated too close to the pole at s={(1.0 - k) / 2.0}")
        else:
            term = weight * (regular + pole / (sigma - 1.0)) if weight != 0.0 else 0.0
        total += term
        if k > last_special and abs(term) < tol * max(1.0, abs(total)):
            small_run += 1
            if small_run >= 2:
                return total
        else:
            small_run = 0
    raise ConvergenceError(f"zeta_lambda binomial expansion did not settle (s={s}, lambda={lam})")


def zeta_lambda_deriv0(lam, h=1e-4, tol=1e-6):
    """
    zeta_lambda'(0) = -log(2 pi) + log Gamma(lam + 1).

    The closed form is returned after it has been checked against a central
    difference of the continuation.
    """
    return zeta_lambda_at_zero(lam, h=h, tol=tol).derivative_at_0


def zeta_lambda_at_zero(lam, h=1e-4, tol=1e-6):
    lam = float(lam)
    if lam <= -1.0:
        raise InputError(f"zeta_lambda needs lambda > -1, got {lam}")
    closed = -LOG_2PI + log_gamma(lam + 1.0)
    fd = (zeta_lambda(h, lam) - zeta_lambda(-h, lam)) / (2.0 * h)
    if abs(fd - closed) > tol:
        raise ConvergenceError(
            f"zeta_lambda'(0) mismatch for lambda={lam}: closed {closed!r}, difference quotient {fd!r}"
        )
    return ZetaLambdaResult(lam=lam, value_at_0=zeta_lambda(0.0, lam),
                            derivative_at_0=closed, derivative_fd=fd)


# ----------------------
# Modified Bessel functions I, K
# ----------------------
def _switch_point(nu):
    return max(12.0, 2.0 * nu)


def _check_bessel_args(nu, x):
    if nu < 0.0:
        raise InputError(f"Bessel order must be >= 0, got {nu}")
    if x <= 0.0:
        raise InputError(f"Bessel argument must be > 0, got {x}")


def _hankel_sum(nu, x, sign):
    """sum_k sign^k a_k(nu) / x^k, truncated at its smallest term."""
    mu = 4.0 * nu * nu
    total = 1.0
    term = 1.0
    for k in range(1, _MAXIT):
        odd = (2 * k - 1) ** 2
        factor = sign * (mu - odd) / (8.0 * k * x)
        if odd > mu and abs(factor) >= 1.0:
            break
        term *= factor
        total += term
        if abs(term) < _EPS * abs(total):
            break
    return total


def _bessel_i_series(nu, x):
    half = 0.5 * x
    term = half ** nu / gamma(nu + 1.0)
    q = half * half
    total = term
    for k in range(1, _MAXIT):
        term *= q / (k * (nu + k))
        total += term
        if term < _EPS * total:
            return total
    raise ConvergenceError(f"I_nu ascending series did not converge (nu={nu}, x={x})")


def bessel_i_scaled(nu, x):
    """exp(-x) I_nu(x)."""
    nu, x = float(nu), float(x)
    _check_bessel_args(nu, x)
    if x >= _switch_point(nu):
        return _hankel_sum(nu, x, -1.0) / math.sqrt(2.0 * math.pi * x)
    return _bessel_i_series(nu, x) * math.exp(-x)


def bessel_i(nu, x, x_cap=None):
    """I_nu(x), ascending series below max(12, 2 nu), Hankel expansion above."""
    nu, x = float(nu), float(x)
    _check_bessel_args(nu, x)
    cap = settings.bessel_x_cap if x_cap is None else x_cap
    if x > cap:
        raise BesselOverflowError(f"I_nu({x}) exceeds the configured cap {cap}")
    if x >= _switch_point(nu):
        return _hankel_sum(nu, x, -1.0) * math.exp(x) / math.sqrt(2.0 * math.pi * x)
    return _bessel_i_series(nu, x)


# Taylor coefficients of 1/Gamma(1+mu) = sum c_k mu^(k-1), even k only.
_RGAMMA_EVEN = (
    0.5772156649015329,
    -0.0420026350340952,
    -0.0421977345555443,
    0.0072189432466630,
    -0.0002152416741149,
    -0.0000201348547807,
    0.0000011330272320,
)


def _temme_gammas(mu):
    gampl = 1.0 / gamma(1.0 + mu)
    gammi = 1.0 / gamma(1.0 - mu)
    if abs(mu) < 0.2:
        mu2 = mu * mu
        gam1 = -sum(c * mu2 ** i for i, c in enumerate(_RGAMMA_EVEN))
    else:
        gam1 = (gammi - gampl) / (2.0 * mu)
    gam2 = 0.5 * (gammi + gampl)
    return gam1, gam2, gampl, gammi


def _bessel_k_temme(mu, x):
    """(K_mu, K_mu+1) for |mu| <= 1/2 and x <= 2."""
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = x2 * x2
    total1 = p
    mu2 = mu * mu
    for i in range(1, _MAXIT):
        ff = (i * ff + p + q) / (i * i - mu2)
        c *= d / i
        p /= i - mu
        q /= i + mu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * _EPS:
            return total, total1 * 2.0 / x
    raise ConvergenceError(f"K_nu Temme series did not converge (mu={mu}, x={x})")


def _bessel_k_steed_scaled(mu, x):
    """(e^x K_mu, e^x K_mu+1) for |mu| <= 1/2 and x > 2, Steed's continued fraction."""
    mu2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25 - mu2
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise ConvergenceError(f"K_nu continued fraction did not converge (mu={mu}, x={x})")
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) / s
    return kmu, kmu * (mu + x + 0.5 - h) / x


def bessel_k_scaled(nu, x):
    """exp(x) K_nu(x)."""
    nu, x = float(nu), float(x)
    _check_bessel_args(nu, x)
    if x >= _switch_point(nu):
        return math.sqrt(math.pi / (2.0 * x)) * _hankel_sum(nu, x, 1.0)
    nl = int(nu + 0.5)
    mu = nu - nl
    if x <= 2.0:
        kmu, k1 = _bessel_k_temme(mu, x)
        kmu, k1 = kmu * math.exp(x), k1 * math.exp(x)
    else:
        kmu, k1 = _bessel_k_steed_scaled(mu, x)
    # forward recurrence K_{v+1} = K_{v-1} + (2v/x) K_v is stable for K
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * (2.0 / x) * k1 + kmu
    return kmu


def bessel_k(nu, x, x_cap=None):
    """K_nu(x); Temme series for x <= 2, Steed's fraction up to max(12, 2 nu), Hankel above."""
    nu, x = float(nu), float(x)
    _check_bessel_args(nu, x)
    cap = settings.bessel_x_cap if x_cap is None else x_cap
    if x > cap:
        raise BesselOverflowError(f"K_nu({x}) exceeds the configured cap {cap}")
    return bessel_k_scaled(nu, x) * math.exp(-x)


def bessel_ip(nu, x):
    """I_nu'(x) = I_nu+1(x) + (nu/x) I_nu(x)."""
    return bessel_i(nu + 1.0, x) + nu / x * bessel_i(nu, x)


def bessel_kp(nu, x):
    """K_nu'(x) = -K_nu+1(x) + (nu/x) K_nu(x)."""
    return -bessel_k(nu + 1.0, x) + nu / x * bessel_k(nu, x)


def bessel_ik_product(nu, x):
    """I_nu(x) K_nu(x) without overflow for large x."""
    return bessel_i_scaled(nu, x) * bessel_k_scaled(nu, x)


# ----------------------
# Bessel J and its zeros
# ----------------------
def _bessel_j_series(nu, x):
    half = 0.5 * x
    term = half ** nu / gamma(nu + 1.0)
    q = -half * half
    total = term
    scale = abs(term)
    for k in range(1, _MAXIT):
        term *= q / (k * (nu + k))
        total += term
        scale = max(scale, abs(term))
        if abs(term) < _EPS * max(abs(total), _EPS * scale):
            return total
    raise ConvergenceError(f"J_nu ascending series did not converge (nu={nu}, x={x})")


def _bessel_j_hankel(nu, x):
    mu = 4.0 * nu * nu
    p = 1.0
    q = 0.0
    term = 1.0
    for k in range(1, _MAXIT):
        odd = (2 * k - 1) ** 2
        factor = (mu - odd) / (8.0 * k * x)
        if odd > mu and abs(factor) >= 1.0:
            break
        term *= factor
        # a_k/x^k enters P for even k and Q for odd k, with alternating signs
        if k % 2 == 0:
            p += term if k % 4 == 0 else -term
        else:
            q += term if k % 4 == 1 else -term
        if abs(term) < _EPS:
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j(nu, x):
    nu, x = float(nu), float(x)
    _check_bessel_args(nu, x)
    if x >= _switch_point(nu):
        return _bessel_j_hankel(nu, x)
    return _bessel_j_series(nu, x)


def bessel_jp(nu, x):
    return nu / x * bessel_j(nu, x) - bessel_j(nu + 1.0, x)


def _mcmahon(nu, n):
    mu = 4.0 * nu * nu
    beta = (n + 0.5 * nu - 0.25) * math.pi
    eb = 8.0 * beta
    return beta - (mu - 1.0) / eb - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * eb ** 3)


def _safeguarded_newton(f, fprime, lo, hi, guess, tol=1e-13, maxit=200):
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ConvergenceError(f"root not bracketed in [{lo}, {hi}]")
    if flo > 0.0:
        lo, hi = hi, lo
    x = guess if min(lo, hi) < guess < max(lo, hi) else 0.5 * (lo + hi)
    dxold = dx = abs(hi - lo)
    fx, dfx = f(x), fprime(x)
    for _ in range(maxit):
        if ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0 or abs(2.0 * fx) > abs(dxold * dfx):
            dxold = dx
            dx = 0.5 * (hi - lo)
            x = lo + dx
        else:
            dxold = dx
            dx = fx / dfx
            x -= dx
        if abs(dx) < tol * max(1.0, abs(x)):
            return x
        fx, dfx = f(x), fprime(x)
        if fx < 0.0:
            lo = x
        else:
            hi = x
    raise ConvergenceError("safeguarded Newton did not converge")


def bessel_j_zero(nu, n):
    """n-th positive zero of J_nu: McMahon guess, bracketed, refined by safeguarded Newton."""
    nu = float(nu)
    if nu < 0.0:
        raise InputError(f"Bessel order must be >= 0, got {nu}")
    if n < 1:
        raise InputError(f"zero index must be >= 1, got {n}")
    guess = _mcmahon(nu, n)
    width = 1.3
    lo, hi = max(guess - width, 1e-8), guess + width

    def f(x):
        return bessel_j(nu, x)

    def fp(x):
        return bessel_jp(nu, x)

    for _ in range(8):
        if f(lo) * f(hi) <= 0.0:
            break
        logger.debug("widening J_%s zero bracket for n=%d", nu, n)
        width *= 0.5
        lo, hi = max(lo - width, 1e-8), hi + width
    return _safeguarded_newton(f, fp, lo, hi, guess)
