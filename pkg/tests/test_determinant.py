import math

import pytest

from sldet import determinant, specfun
from sldet.determinant import (
    det_factorized_closed,
    det_jacobi_closed,
    det_model_closed,
    det_shifted,
    det_wronskian,
)
from sldet.errors import InputError
from sldet.spectrum import det_via_zeta_oracle


@pytest.fixture
def d1():
    return determinant.dirichlet_laplacian()


@pytest.fixture
def d2():
    return determinant.dirichlet_neumann()


@pytest.fixture
def d3():
    return determinant.neumann_laplacian()


def bump(a=0.3, b=0.7):
    def chi(x):
        if not a < x < b:
            return 0.0
        return math.sin(math.pi * (x - a) / (b - a)) ** 2
    return chi

# ----------------------
# Laplacians
# ----------------------
def test_dirichlet_laplacian(d1):
    result = det_wronskian(d1)
    assert result.det == pytest.approx(2.0, abs=1e-8)
    assert result.nu0 == result.nu1 == 0.5
    assert result.log_det == pytest.approx(math.log(2.0), abs=1e-8)
    assert result.diagnostics.wronskian_drift < 1e-8


def test_dirichlet_neumann(d2):
    result = det_wronskian(d2)
    assert result.det == pytest.approx(2.0, abs=1e-8)
    assert (result.nu0, result.nu1) == (0.5, -0.5)


def test_neumann_laplacian_has_zero_mode(d3):
    result = det_wronskian(d3)
    assert result.is_zero
    assert result.det == 0.0


@pytest.mark.parametrize("z", [0.5, 1.0, 4.0])
def test_shifted_laplacians(d1, d3, z):
    r = math.sqrt(z)
    assert det_shifted(d1, z).det == pytest.approx(2.0 * math.sinh(r) / r, rel=1e-7)
    assert det_shifted(d3, z).det == pytest.approx(2.0 * r * math.sinh(r), rel=1e-7)


def test_eigenvalue_shift_reports_zero(d1):
    result = det_shifted(d1, -math.pi ** 2)
    assert result.is_zero
    assert result.log_det is None


def test_negative_eigenvalue_flag(d1):
    result = det_wronskian(d1.shifted(-15.0), count_negative=True)
    # one eigenvalue (pi^2) lies below 15
    assert result.diagnostics.negative_eigenvalues == 1
    assert result.det < 0.0
    assert result.log_det == pytest.approx(math.log(abs(result.det)))


def test_generalized_neumann_parameter():
    A = 0.8
    op = determinant.dirichlet_neumann(A)
    # phi = x, psi = 1 - A(1 - x): W = psi - psi' x = 1 - A
    assert det_wronskian(op).det == pytest.approx(2.0 * (1.0 - A), rel=1e-8)

# ----------------------
# Model operator
# ----------------------
@pytest.mark.parametrize("nu", [0.0, 0.3, 0.5, 1.0, 1.7, 2.5])
def test_model_operator(nu):
    result = det_wronskian(determinant.model_operator(nu))
    assert result.det == pytest.approx(det_model_closed(nu), rel=1e-7)
    assert result.nu0 == pytest.approx(nu)
    assert result.nu1 == 0.5


def test_model_closed_values():
    assert det_model_closed(0.5) == pytest.approx(2.0, rel=1e-14)
    assert det_model_closed(1.0) == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-14)
    with pytest.raises(InputError):
        det_model_closed(-0.1)


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0])
def test_model_derivative_in_nu(nu):
    fd, closed = determinant.det_derivative_model_check(nu, h=1e-3)
    assert closed == pytest.approx(-math.log(2.0) - specfun.digamma(nu + 1.0))
    assert fd == pytest.approx(closed, abs=1e-5)

# ----------------------
# Variation formulas
# ----------------------
def test_interior_variation_matches_green_trace(d1):
    fd, trace = determinant.potential_variation_check(d1, bump(), (0.3, 0.7), t=0.5)
    assert fd == pytest.approx(trace, rel=1e-6)


def test_interior_variation_on_singular_operator():
    op = determinant.model_operator(1.5).shifted(2.0)
    fd, trace = determinant.potential_variation_check(op, bump(0.2, 0.6), (0.2, 0.6))
    assert fd == pytest.approx(trace, rel=1e-6)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5])
def test_interior_variation_with_bump_near_regular_end(nu):
    op = determinant.model_operator(nu)
    fd, trace = determinant.potential_variation_check(op, bump(0.5, 0.9), (0.5, 0.9), t=1.5)
    assert fd == pytest.approx(trace, rel=1e-6)


def test_green_diagonal_dirichlet(d1):
    # G(x, x) = x (1 - x) for -d^2/dx^2 with Dirichlet conditions
    assert determinant.green_diagonal(d1, 0.3) == pytest.approx(0.21, rel=1e-9)


@pytest.mark.parametrize("t", [0.0, 0.7, 2.0])
def test_det_over_wronskian_constant_along_interior_deformation(d1, t):
    result = det_wronskian(d1.perturbed(bump(), t))
    assert result.det / result.wronskian == pytest.approx(2.0, rel=1e-7)


@pytest.mark.parametrize("A", [0.0, 0.4, -1.2])
def test_det_over_wronskian_constant_along_neumann_parameter(A):
    result = det_wronskian(determinant.neumann_laplacian(A, 0.3).shifted(1.0))
    assert result.det / result.wronskian == pytest.approx(2.0, rel=1e-7)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5])
def test_det_ratio_constant_along_order_deformation(nu):
    result = det_wronskian(determinant.model_operator(nu).perturbed(bump(0.5, 0.9), 1.5))
    ratio = result.det * 2.0 ** nu * specfun.gamma(nu + 1.0) / result.wronskian
    assert ratio == pytest.approx(math.sqrt(2.0 * math.pi), rel=1e-6)


def test_variation_support_must_be_interior(d1):
    with pytest.raises(InputError):
        determinant.potential_variation_check(d1, bump(), (0.0, 0.5))

# ----------------------
# Factorized operators
# ----------------------
def test_factorized_case_both_recessive_is_zero():
    f = determinant.rational_factorized(-0.5, 0.5)
    assert det_factorized_closed(f) == 0.0
    assert det_wronskian(determinant.rational_operator(-0.5, 0.5)).is_zero


def test_factorized_half_over_x_matches_model():
    f = determinant.rational_factorized(0.5, 0.0)
    expected = math.sqrt(math.pi / 2.0)
    assert det_factorized_closed(f) == pytest.approx(expected, rel=1e-8)
    assert det_factorized_closed(f) == pytest.approx(det_model_closed(1.0), rel=1e-8)
    assert det_wronskian(determinant.rational_operator(0.5, 0.0)).det == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize("s0,s1,c", [
    (0.3, -0.2, 0.5),   # s0 > -1/2, s1 < 1/2
    (0.2, 1.2, 0.0),    # s0 > -1/2, s1 >= 1/2
    (-0.8, 0.1, 0.0),   # s0 <= -1/2, s1 < 1/2
])
def test_factorized_closed_matches_wronskian(s0, s1, c):
    f = determinant.rational_factorized(s0, s1, c)
    op = determinant.rational_operator(s0, s1, c)
    assert (op.nu0, op.nu1) == pytest.approx((f.nu0, f.nu1))
    assert det_factorized_closed(f) == pytest.approx(det_wronskian(op).det, rel=1e-6)


def test_factorized_phase_at_one():
    f = determinant.rational_factorized(0.3, -0.2, 0.5)
    # int_0^x S1 = 0.2 log(1 - x) + 0.5 x, plus 0.3 log x; the log(1 - x) is dropped
    assert f.phase_at_one() == pytest.approx(0.5, abs=1e-7)


def test_rational_series_matches_potential():
    op = determinant.rational_operator(0.3, -0.2, 0.5)
    assert op.potential.check_matching() < 1e-6

# ----------------------
# Jacobi operators
# ----------------------
JACOBI = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.5), (1.0, 1.0)]


@pytest.mark.parametrize("alpha,beta", JACOBI)
def test_jacobi_triangle(alpha, beta):
    wronskian = det_wronskian(determinant.jacobi_potential(alpha, beta)).det
    closed = det_jacobi_closed(alpha, beta)
    zeta = det_via_zeta_oracle("jacobi", alpha, beta)
    assert wronskian == pytest.approx(closed, rel=1e-5)
    assert zeta == pytest.approx(closed, rel=1e-5)
    assert wronskian == pytest.approx(zeta, rel=1e-5)


@pytest.mark.parametrize("alpha,beta", [(1.0, 0.5), (0.5, 0.5)])
def test_jacobi_factorized_closed(alpha, beta):
    f = determinant.jacobi_factorized(alpha, beta)
    assert det_factorized_closed(f) == pytest.approx(det_jacobi_closed(alpha, beta), rel=1e-6)


def test_jacobi_closed_edge():
    assert det_jacobi_closed(-1.0, -1.0) == 0.0
    assert det_jacobi_closed(1.0, 1.0) == pytest.approx(math.pi ** -3 / 3.0, rel=1e-14)
    with pytest.raises(InputError):
        det_jacobi_closed(-1.5, 0.0)
    with pytest.raises(InputError):
        determinant.jacobi_potential(-1.0, 0.0)


def test_jacobi_series_endpoint_data():
    alpha, beta = 1.0, 0.5
    left = determinant.jacobi_series(alpha, beta, terms=10)
    right = determinant.jacobi_series(beta, alpha, terms=10)
    # q0 = nu^2 - 1/4 with nu = beta + 1 at 0 and alpha + 1 at 1
    assert left[0] == pytest.approx((beta + 1.0) ** 2 - 0.25, abs=1e-12)
    assert right[0] == pytest.approx((alpha + 1.0) ** 2 - 0.25, abs=1e-12)
    symmetric = determinant.jacobi_series(0.5, 0.5, terms=10)
    assert all(abs(c) < 1e-12 for c in symmetric[1::2])


def test_jacobi_series_matches_potential():
    op = determinant.jacobi_potential(1.0, 0.5)
    assert op.potential.check_matching() < 1e-6
    assert (op.nu0, op.nu1) == pytest.approx((1.5, 2.0))
