"""
Normalized solutions of (l + z) y = 0, i.e. y'' = (q + z) y, at the regular
singular endpoints of [0, 1].

Near an endpoint the recessive Frobenius series is summed directly; away from
it the first-order system (y, y') is integrated with scipy's DOP853 pair,
always starting from the handoff point so that every value depends on x only.
"""
import functools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from sldet.config import settings
from sldet.errors import ConvergenceError, InputError, ResonanceError, StepFailureError

logger = logging.getLogger(__name__)


class Endpoint(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class BCKind(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    FRIEDRICHS = "friedrichs"


# Integrated points kept per solution.
CACHE_SIZE = 512

# Tolerance for "q_0 is zero" and "q is continuous at the endpoint".
_Q0_TOL = 1e-12


@dataclass(frozen=True)
class EndpointExpansion:
    """
    Series u^2 q = sum_m coeffs[m] * u^(m/N) in the local coordinate
    u = x (left) or u = 1 - x (right).
    """
    endpoint: Endpoint
    order: int
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "endpoint", Endpoint(self.endpoint))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if self.order < 1:
            raise InputError(f"branching order must be a positive integer, got {self.order}")
        if len(self.coeffs) < 2 * self.order + 1:
            raise InputError(
                f"{self.endpoint.value} series needs at least {2 * self.order + 1} coefficients "
                f"(the shift enters at order 2N), got {len(self.coeffs)}"
            )
        if self.q0 < -0.25 - _Q0_TOL:
            raise InputError(f"leading coefficient {self.q0} below -1/4 (limit circle oscillatory)")

    @property
    def q0(self):
        return self.coeffs[0]

    def local(self, x):
        return x if self.endpoint is Endpoint.LEFT else 1.0 - x

    def __call__(self, u):
        """Partial sum of u^2 q(u)."""
        return sum(c * u ** (m / self.order) for m, c in enumerate(self.coeffs))

    def is_continuous(self):
        """q bounded at the endpoint: no terms below u^2."""
        return all(abs(c) <= _Q0_TOL for c in self.coeffs[:2 * self.order])


@dataclass(frozen=True)
class PotentialSpec:
    left: EndpointExpansion
    right: EndpointExpansion
    interior: Callable[[float], float]
    matching_window: Tuple[float, float] = (0.05, 0.95)
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.left.endpoint is not Endpoint.LEFT or self.right.endpoint is not Endpoint.RIGHT:
            raise InputError("PotentialSpec needs a left and a right endpoint expansion")
        lo, hi = self.matching_window
        if not 0.0 < lo < hi < 1.0:
            raise InputError(f"matching window {self.matching_window} must satisfy 0 < lo < hi < 1")
        if self.check:
            self.check_matching()

    def __call__(self, x):
        return self.interior(x)

    def expansion(self, end):
        return self.left if Endpoint(end) is Endpoint.LEFT else self.right

    def check_matching(self, rtol=1e-6):
        """Warn when the interior evaluator disagrees with an endpoint series."""
        lo, hi = self.matching_window
        worst = 0.0
        for expansion, u0 in ((self.left, lo), (self.right, 1.0 - hi)):
            for u in (u0, u0 / 2.0):
                x = expansion.local(u) if expansion.endpoint is Endpoint.RIGHT else u
                exact = self.interior(x) * u * u
                series = expansion(u)
                diff = abs(exact - series) / max(1.0, abs(exact))
                worst = max(worst, diff)
                if diff > rtol:
                    logger.warning(
                        "%s series disagrees with the interior potential at x=%.4g: %.6g vs %.6g",
                        expansion.endpoint.value, x, series, exact,
                    )
        return worst

    def perturbed(self, chi, t):
        """q + t*chi for chi supported strictly inside (0, 1)."""
        base = self.interior
        return PotentialSpec(self.left, self.right, lambda x: base(x) + t * chi(x),
                             self.matching_window, self.check)


@dataclass(frozen=True)
class BoundaryCondition:
    kind: BCKind
    A: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", BCKind(self.kind))
        object.__setattr__(self, "A", float(self.A))

    @classmethod
    def dirichlet(cls):
        return cls(BCKind.DIRICHLET)

    @classmethod
    def neumann(cls, A=0.0):
        return cls(BCKind.NEUMANN, A)

    @classmethod
    def friedrichs(cls):
        return cls(BCKind.FRIEDRICHS)

    def validate(self, expansion):
        if self.kind is BCKind.FRIEDRICHS:
            return
        if abs(expansion.q0) > _Q0_TOL:
            raise InputError(
                f"{self.kind.value} condition at the {expansion.endpoint.value} endpoint needs q_0 = 0, "
                f"got {expansion.q0}; use friedrichs"
            )
        if self.kind is BCKind.NEUMANN and not expansion.is_continuous():
            raise InputError(
                f"generalized Neumann at the {expansion.endpoint.value} endpoint needs q continuous there"
            )

    def nu(self, q0):
        if self.kind is BCKind.DIRICHLET:
            return 0.5
        if self.kind is BCKind.NEUMANN:
            return -0.5
        return math.sqrt(max(q0 + 0.25, 0.0))

    def sigma(self, q0):
        return 0.5 - self.nu(q0)


# ----------------------
# Frobenius seed
# ----------------------
@dataclass(frozen=True)
class FrobeniusSeed:
    nu: float
    order: int
    coeffs: Tuple[float, ...]
    handoff: float
    series_tail: float

    @property
    def rho(self):
        return self.nu + 0.5

    def evaluate(self, u):
        """(Y(u), Y'(u)) in the local coordinate."""
        y = 0.0
        dy = 0.0
        for m, c in enumerate(self.coeffs):
            p = self.rho + m / self.order
            y += c * u ** p
            if p != 0.0:
                dy += c * p * u ** (p - 1.0)
        return y, dy


def _frobenius_coeffs(expansion, bc, nu, z, terms):
    N = expansion.order
    qt = np.zeros(terms + 1)
    n = min(len(expansion.coeffs), terms + 1)
    qt[:n] = expansion.coeffs[:n]
    if 2 * N <= terms:
        qt[2 * N] += z
    c = np.zeros(terms + 1)
    c[0] = 1.0
    for m in range(1, terms + 1):
        rhs = float(np.dot(qt[1:m + 1], c[m - 1::-1]))
        denom = (m / N) * (m / N + 2.0 * nu)
        if bc.kind is BCKind.NEUMANN and m == N:
            if abs(rhs) > 1e-12:
                raise ResonanceError(f"Frobenius resonance at m={m} is not log-free (residual {rhs})")
            c[m] = -bc.A
            continue
        if abs(denom) < 1e-14:
            raise ResonanceError(f"Frobenius denominator vanished at m={m} (nu={nu})")
        c[m] = rhs / denom
    return c


def frobenius_seed(p, end, bc, z=0.0, terms=None, handoff=None, tail_tol=1e-12):
    """
    Recessive Frobenius solution u^(nu+1/2) * sum c_m u^(m/N), c_0 = 1, and a
    handoff point where the estimated truncation tail is below tail_tol.
    """
    end = Endpoint(end)
    expansion = p.expansion(end)
    bc.validate(expansion)
    nu = bc.nu(expansion.q0)
    N = expansion.order
    M = max(settings.series_terms, 4 * N) if terms is None else int(terms)
    if M < 2 * N:
        raise InputError(f"need at least {2 * N} Frobenius terms, got {M}")
    c = _frobenius_coeffs(expansion, bc, nu, float(z), M)

    x0 = settings.handoff if handoff is None else float(handoff)
    for _ in range(40):
        powers = x0 ** (np.arange(M + 1) / N)
        body = abs(float(np.dot(c, powers)))
        tail = abs(c[M] * powers[M]) + abs(c[M - 1] * powers[M - 1])
        if tail <= tail_tol * max(body, 1e-300):
            break
        logger.debug("Frobenius tail %.3g at handoff %.4g, shrinking", tail / max(body, 1e-300), x0)
        x0 *= 0.5
    else:
        raise ConvergenceError(f"Frobenius series at the {end.value} endpoint does not converge (z={z})")
    return FrobeniusSeed(nu=nu, order=N, coeffs=tuple(float(v) for v in c), handoff=x0,
                         series_tail=tail / max(body, 1e-300))


# ----------------------
# Normalized solutions
# ----------------------
class NormalizedSolution:
    """
    The recessive solution normalized at one endpoint. Calling it returns
    (y(x), y'(x)). The last CACHE_SIZE integrated values are kept in an LRU
    cache, so a single instance may be queried from several threads.
    """

    def __init__(self, potential, end, bc, z=0.0, seed=None, rtol=None, atol=None):
        self.potential = potential
        self.endpoint = Endpoint(end)
        self.bc = bc
        self.shift = float(z)
        self.seed = seed if seed is not None else frobenius_seed(potential, self.endpoint, bc, self.shift)
        self.rtol = settings.ode_rtol if rtol is None else rtol
        self.atol = settings.ode_atol if atol is None else atol
        self._cached = functools.lru_cache(maxsize=CACHE_SIZE)(self._integrate)

    @property
    def nu(self):
        return self.seed.nu

    @property
    def coeffs(self):
        return self.seed.coeffs

    @property
    def handoff(self):
        return self.seed.handoff

    @property
    def handoff_x(self):
        return self.handoff if self.endpoint is Endpoint.LEFT else 1.0 - self.handoff

    def series(self, x):
        """Frobenius evaluation in x; valid only near the endpoint."""
        if self.endpoint is Endpoint.LEFT:
            return self.seed.evaluate(x)
        y, dy = self.seed.evaluate(1.0 - x)
        return y, -dy

    def _rhs(self, x, state):
        return [state[1], (self.potential(x) + self.shift) * state[0]]

    def _integrate(self, x):
        start = self.handoff_x
        sol = solve_ivp(
            fun=self._rhs,
            t_span=(start, x),
            y0=list(self.series(start)),
            method="DOP853",
            rtol=self.rtol,
            atol=self.atol,
            dense_output=False,
        )
        if not sol.success:
            raise StepFailureError(f"integration from {start:.4g} to {x:.4g} failed: {sol.message}")
        return float(sol.y[0, -1]), float(sol.y[1, -1])

    def __call__(self, x):
        if not 0.0 < x < 1.0:
            raise InputError(f"evaluation point {x} outside (0, 1)")
        u = x if self.endpoint is Endpoint.LEFT else 1.0 - x
        if u <= self.handoff:
            return self.series(x)
        return self._cached(float(x))

    def cache_info(self):
        return self._cached.cache_info()

    def sample(self, xs):
        """
        Values (y, y') at many points from a single integration pass.
        Not cached; used for zero counting and quadrature on a fixed grid.
        """
        xs = np.asarray(xs, dtype=float)
        ys = np.empty_like(xs)
        dys = np.empty_like(xs)
        u = xs if self.endpoint is Endpoint.LEFT else 1.0 - xs
        near = u <= self.handoff
        for i in np.flatnonzero(near):
            ys[i], dys[i] = self.series(xs[i])
        far = np.flatnonzero(~near)
        if far.size:
            # order by distance from the handoff point
            order = far[np.argsort(u[far])]
            start = self.handoff_x
            sol = solve_ivp(
                fun=self._rhs,
                t_span=(start, float(xs[order[-1]])),
                y0=list(self.series(start)),
                method="DOP853",
                t_eval=xs[order],
                rtol=self.rtol,
                atol=self.atol,
            )
            if not sol.success:
                raise StepFailureError(f"integration from {start:.4g} failed: {sol.message}")
            ys[order] = sol.y[0]
            dys[order] = sol.y[1]
        return ys, dys

    def residual(self, x, h=1e-3):
        """|-y'' + (q+z) y| at x with a fourth-order difference of y'."""
        d = [self(x + k * h)[1] for k in (-2, -1, 1, 2)]
        ypp = (d[0] - 8.0 * d[1] + 8.0 * d[2] - d[3]) / (12.0 * h)
        y = self(x)[0]
        return abs(-ypp + (self.potential(x) + self.shift) * y)


def normalized_solution(p, end, bc, z=0.0, **kwargs):
    return NormalizedSolution(p, end, bc, z, **kwargs)


def wronskian(psi, phi, x=0.5):
    """W(psi, phi) = psi phi' - psi' phi."""
    psi_y, psi_dy = psi(x)
    phi_y, phi_dy = phi(x)
    return psi_y * phi_dy - psi_dy * phi_y


# ----------------------
# Sturm counting
# ----------------------
def sign_changes(values):
    signs = np.sign(np.asarray(values, dtype=float))
    signs = signs[signs != 0.0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def zero_grid(lo, hi, shift):
    wave = math.sqrt(max(-shift, 0.0))
    n = 64 + int(math.ceil(8.0 * (hi - lo) * wave / (2.0 * math.pi)))
    return np.linspace(lo, hi, n)


def _prufer_angle(y, dy):
    """Pruefer angle atan2(y, y') reduced to [0, pi)."""
    return math.atan2(y, dy) % math.pi


@dataclass(frozen=True)
class SturmCount:
    below: int
    phi_zeros: int
    psi_zeros: int


def sturm_count(phi, psi, c=0.5):
    """
    Number of eigenvalues strictly below the common shift point of phi and psi,
    i.e. the eigenvalues of L + z below 0.

    Counts zeros of phi on (0, c] and of psi on (c, 1), then adds one when the
    Pruefer angle of phi at c has passed that of psi. Both grids include c, so
    a zero in the first cell on either side of c is seen.
    """
    lo = phi.handoff / 4.0
    hi = 1.0 - psi.handoff / 4.0
    phi_y, phi_dy = phi.sample(zero_grid(lo, c, phi.shift))
    psi_y, psi_dy = psi.sample(zero_grid(c, hi, psi.shift))
    phi_zeros = sign_changes(phi_y)
    psi_zeros = sign_changes(psi_y)
    # angles from the same samples the zeros were counted on
    theta_phi = _prufer_angle(phi_y[-1], phi_dy[-1])
    theta_psi = _prufer_angle(psi_y[0], psi_dy[0])
    extra = 1 if theta_phi > theta_psi else 0
    return SturmCount(below=phi_zeros + psi_zeros + extra, phi_zeros=phi_zeros, psi_zeros=psi_zeros)
