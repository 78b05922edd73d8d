"""
Independent routes to the determinant: eigenvalues by Wronskian shooting,
zeta regularization of known spectra, the resolvent trace of the model
operator, and the product expansion over eigenvalues.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from sldet import ode, specfun
from sldet.determinant import OperatorSpec, det_shifted, det_wronskian
from sldet.errors import BracketError, ConvergenceError, InputError
from sldet.regularize import quad

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: Tuple[float, ...]
    operator: OperatorSpec
    count_certificate: Tuple[int, ...]

    def __len__(self):
        return len(self.eigenvalues)


# ----------------------
# Eigenvalues
# ----------------------
def _at(op, mu):
    """Operator L + shift - mu, whose kernel is the eigenspace at mu."""
    return op.shifted(op.shift - mu)


def characteristic(op, mu):
    """mu -> W(psi, phi) at spectral parameter mu; zero exactly on the spectrum."""
    phi, psi = _at(op, mu).solutions()
    return ode.wronskian(psi, phi)


def oscillation_count(op, mu):
    """Number of eigenvalues of op strictly below mu."""
    phi, psi = _at(op, mu).solutions()
    return ode.sturm_count(phi, psi).below


def _eigenfunction_zeros(op, mu, c=0.5):
    """Interior sign changes of the eigenfunction at mu, phi and psi joined at c."""
    phi, psi = _at(op, mu).solutions()
    phi_y, phi_dy = phi(c)
    psi_y, psi_dy = psi(c)
    # psi = k phi on the spectrum; the sign of k from either component
    k = psi_y * phi_y + psi_dy * phi_dy
    left, _ = phi.sample(ode.zero_grid(phi.handoff / 4.0, c, phi.shift))
    right, _ = psi.sample(ode.zero_grid(c, 1.0 - psi.handoff / 4.0, psi.shift)[1:])
    return ode.sign_changes(np.concatenate([left, math.copysign(1.0, k) * right]))


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _lower_bound(op, max_doublings):
    mu = -1.0
    for _ in range(max_doublings + 1):
        if oscillation_count(op, mu) == 0:
            return mu
        mu = 2.0 * mu - 1.0
    raise BracketError(f"no lower spectral bound found above {mu}")


def eigenvalues(op, count, tol=1e-9, max_doublings=12, workers=None):
    """
    The first `count` eigenvalues of op.

    A Weyl grid pi^2 (n + 1/2)^2 is refined by bisection on the oscillation
    count until every bracket holds exactly one eigenvalue, which is then
    polished by Brent's method on the characteristic function.
    """
    if count < 1:
        raise InputError(f"eigenvalue count must be >= 1, got {count}")
    lo = _lower_bound(op, max_doublings)
    weyl = (math.pi ** 2 * (n + 0.5) ** 2 for n in range(count + 1))
    grid = [lo] + sorted(g for g in weyl if g > lo)
    counts = _map(lambda mu: oscillation_count(op, mu), grid, workers)

    for _ in range(max_doublings):
        if counts[-1] >= count:
            break
        logger.debug("doubling the eigenvalue search range past %.6g", grid[-1])
        grid.append(2.0 * grid[-1])
        counts.append(oscillation_count(op, grid[-1]))
    else:
        raise BracketError(f"only {counts[-1]} eigenvalues found below {grid[-1]}")

    brackets = []
    stack = list(zip(zip(grid[:-1], counts[:-1]), zip(grid[1:], counts[1:])))
    while stack:
        (a, na), (b, nb) = stack.pop()
        if nb == na or na >= count:
            continue
        if nb - na == 1:
            brackets.append((a, b, nb))
            continue
        if b - a < tol * (1.0 + abs(b)):
            raise BracketError(f"eigenvalues {na + 1}..{nb} could not be separated near {a}")
        mid = 0.5 * (a + b)
        nm = oscillation_count(op, mid)
        stack.append(((a, na), (mid, nm)))
        stack.append(((mid, nm), (b, nb)))
    brackets.sort()

    def polish(bracket):
        a, b, index = bracket
        try:
            return brentq(lambda mu: characteristic(op, mu), a, b,
                          xtol=tol * (1.0 + abs(b)), rtol=4.0 * np.finfo(float).eps)
        except ValueError as exc:
            raise BracketError(
                f"eigenvalue {index} bracket [{a:.10g}, {b:.10g}] (counts {index - 1}, {index}) "
                f"does not change sign: {exc}"
            ) from None

    roots = _map(polish, brackets[:count], workers)
    certificate = tuple(_map(lambda mu: _eigenfunction_zeros(op, mu), roots, workers))
    for index, zeros in enumerate(certificate, start=1):
        if zeros != index - 1:
            logger.warning("eigenfunction %d has %d sign changes, expected %d", index, zeros, index - 1)
    return Spectrum(eigenvalues=tuple(roots), operator=op, count_certificate=certificate)


# ----------------------
# Zeta-function oracle
# ----------------------
class ZetaFamily(str, Enum):
    DIRICHLET_LAPLACIAN = "dirichlet_laplacian"
    DIRICHLET_NEUMANN = "dirichlet_neumann"
    JACOBI = "jacobi"


def log_det_via_zeta(family, alpha=None, beta=None):
    family = ZetaFamily(family)
    zeta0, dzeta0 = specfun.riemann_zeta_at_zero()
    if family is ZetaFamily.DIRICHLET_LAPLACIAN:
        # zeta_L(s) = pi^-2s zeta_R(2s)
        return -(-2.0 * math.log(math.pi) * zeta0 + 2.0 * dzeta0)
    if family is ZetaFamily.DIRICHLET_NEUMANN:
        # zeta_L(s) = pi^-2s (2^2s - 1) zeta_R(2s)
        return -(2.0 * math.log(2.0) * zeta0)
    if alpha is None or beta is None:
        raise InputError("the Jacobi family needs alpha and beta")
    lam = 1.0 + alpha + beta
    result = specfun.zeta_lambda_at_zero(lam)
    return 2.0 * math.log(math.pi) * result.value_at_0 - result.derivative_at_0


def det_via_zeta_oracle(family, alpha=None, beta=None):
    try:
        family = ZetaFamily(family)
    except ValueError:
        raise InputError(f"unsupported family {family!r}") from None
    return math.exp(log_det_via_zeta(family, alpha, beta))


# ----------------------
# Resolvent trace of the model operator
# ----------------------
def _model_kernel_diagonal(nu, z):
    ratio = specfun.bessel_k_scaled(nu, z) / specfun.bessel_i_scaled(nu, z)

    def k(x):
        xz = x * z
        i = specfun.bessel_i_scaled(nu, xz)
        return x * (i * specfun.bessel_k_scaled(nu, xz) - ratio * i * i * math.exp(-2.0 * z * (1.0 - x)))
    return k


def trace_resolvent_model(nu, z, epsrel=1e-10):
    """Tr (L_nu + z^2)^-1 from the diagonal of the modified-Bessel kernel."""
    if z <= 0.0:
        raise InputError(f"trace needs z > 0, got {z}")
    return quad(_model_kernel_diagonal(nu, z), 0.0, 1.0, epsrel=epsrel, epsabs=1e-13)


def model_trace_constants(nu):
    """(a0, c0) of z Tr ~ a0 + c0/z."""
    return 0.5, -(nu + 0.5) / 2.0


def model_trace_asymptotics(nu, zs):
    """[(z, z Tr, z^2 (Tr - 1/(2z)))] for the leading-constant checks."""
    rows = []
    for z in zs:
        tr = trace_resolvent_model(nu, z)
        rows.append((z, z * tr, z * z * (tr - 0.5 / z)))
    return rows


def _fitted_tail(g, upper, fit_points):
    values = np.array([g(z) for z in fit_points])
    if np.all(np.abs(values) < 1e-8):
        return 0.0
    if np.any(values == 0.0) or np.any(np.sign(values) != np.sign(values[-1])):
        raise ConvergenceError("trace tail changes sign on the fitting decade")
    slope = float(np.polyfit(np.log(fit_points), np.log(np.abs(values)), 1)[0])
    eta = -1.0 - slope
    if eta <= 0.05:
        raise ConvergenceError(f"trace tail decays too slowly (fitted exponent {slope:.3f})")
    return g(upper) * upper / eta


def det_via_trace_model(nu, upper=60.0, workers=None):
    """
    exp of -2 int_0^1 [z Tr - a0] dz - 2 int_1^oo [z Tr - a0 - c0/z] dz,
    the integral above `upper` replaced by a fitted c z^(-1-eta) tail.
    """
    if nu < 0.0:
        raise InputError(f"nu must be >= 0, got {nu}")
    a0, c0 = model_trace_constants(nu)

    def low(z):
        return z * trace_resolvent_model(nu, z, epsrel=1e-9) - a0

    def high(z):
        return z * trace_resolvent_model(nu, z, epsrel=1e-9) - a0 - c0 / z

    fit_points = np.linspace(upper / 2.0, upper, 4)
    parts = _map(lambda task: task(), [
        lambda: quad(low, 0.0, 1.0, epsabs=1e-9, epsrel=1e-8),
        lambda: quad(high, 1.0, upper, epsabs=1e-9, epsrel=1e-8),
        lambda: _fitted_tail(high, upper, fit_points),
    ], workers)
    T = -2.0 * (parts[0] + parts[1] + parts[2])
    return math.exp(T)


# ----------------------
# Product expansion
# ----------------------
def weyl_tail(eigs):
    """
    Estimate of sum_{n>K} 1/lambda_n from lambda_n ~ pi^2 (n + delta)^2, with
    delta fitted to the last computed eigenvalue.
    """
    K = len(eigs)
    delta = math.sqrt(eigs[-1]) / math.pi - K
    return 1.0 / (math.pi ** 2 * (K + 0.5 + delta))


def product_expansion_check(op, z, count, eigs: Optional[Sequence[float]] = None):
    """
    (partial, target): prod_{n<=K} (1 + z/lambda_n) with the Weyl tail folded
    in as exp(z * tail), against det(L + z) / det(L).
    """
    if z == 0.0:
        return 1.0, 1.0
    if eigs is None:
        eigs = eigenvalues(op, count).eigenvalues
    eigs = list(eigs)[:count]
    if len(eigs) < count:
        raise InputError(f"need {count} eigenvalues, got {len(eigs)}")
    if eigs[0] + z <= 0.0:
        raise InputError(f"z={z} must exceed -lambda_1 = {-eigs[0]}")
    log_partial = float(np.sum(np.log1p(z / np.asarray(eigs))))
    partial = math.exp(log_partial + z * weyl_tail(eigs))
    target = det_shifted(op, z).det / det_wronskian(op).det
    return partial, target
