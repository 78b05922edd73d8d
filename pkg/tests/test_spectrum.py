import math

import pytest
import scipy.special as sp

from sldet import determinant, specfun, spectrum
from sldet.errors import BracketError, InputError


@pytest.fixture
def d1():
    return determinant.dirichlet_laplacian()


@pytest.fixture
def bessel_model():
    return determinant.model_operator(0.0)

# ----------------------
# Eigenvalues
# ----------------------
def test_dirichlet_eigenvalues(d1):
    found = spectrum.eigenvalues(d1, 20, workers=4)
    assert len(found) == 20
    for n, mu in enumerate(found.eigenvalues, start=1):
        assert mu == pytest.approx(n * n * math.pi ** 2, rel=1e-8)
    assert found.count_certificate == tuple(range(20))


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (1.0, 0.5), (1.0, 1.0)])
def test_jacobi_eigenvalues(alpha, beta):
    op = determinant.jacobi_potential(alpha, beta)
    found = spectrum.eigenvalues(op, 10)
    assert len(found) == 10
    for n, mu in enumerate(found.eigenvalues, start=1):
        assert mu == pytest.approx(math.pi ** 2 * n * (n + alpha + beta + 1.0), rel=1e-6)
    assert found.count_certificate == tuple(range(10))


@pytest.mark.parametrize("n", range(1, 11))
def test_oscillation_count_around_jacobi_eigenvalues(n):
    # every second eigenfunction of the symmetric Jacobi operator vanishes at 1/2
    op = determinant.jacobi_potential(0.0, 0.0)
    mu = math.pi ** 2 * n * (n + 1.0)
    assert spectrum.oscillation_count(op, mu + 0.1) == n
    assert spectrum.oscillation_count(op, mu - 0.1) == n - 1


@pytest.mark.parametrize("nu", [0.0, 1.0])
def test_bessel_eigenvalues(nu):
    found = spectrum.eigenvalues(determinant.model_operator(nu), 10)
    zeros = sp.jn_zeros(int(nu), 10)
    for mu, j in zip(found.eigenvalues, zeros):
        assert mu == pytest.approx(j * j, rel=1e-7)


def test_negative_eigenvalue_found(d1):
    found = spectrum.eigenvalues(d1.shifted(-20.0), 2)
    assert found.eigenvalues[0] == pytest.approx(math.pi ** 2 - 20.0, rel=1e-8)


def test_characteristic_vanishes_on_spectrum(d1):
    assert abs(spectrum.characteristic(d1, 4.0 * math.pi ** 2)) < 1e-9
    assert abs(spectrum.characteristic(d1, 30.0)) > 1e-3


def test_oscillation_count(d1):
    assert spectrum.oscillation_count(d1, 1.0) == 0
    assert spectrum.oscillation_count(d1, 50.0) == 2


def test_eigenvalue_count_must_be_positive(d1):
    with pytest.raises(InputError):
        spectrum.eigenvalues(d1, 0)


def test_unbracketed_root_raises_bracket_error(d1, monkeypatch):
    monkeypatch.setattr(spectrum, "characteristic", lambda op, mu: 1.0)
    with pytest.raises(BracketError):
        spectrum.eigenvalues(d1, 2)

# ----------------------
# Zeta oracle
# ----------------------
def test_zeta_oracle_laplacians():
    assert spectrum.det_via_zeta_oracle("dirichlet_laplacian") == pytest.approx(2.0, rel=1e-14)
    assert spectrum.det_via_zeta_oracle("dirichlet_neumann") == pytest.approx(2.0, rel=1e-14)


def test_zeta_oracle_matches_wronskian(d1):
    assert spectrum.det_via_zeta_oracle("dirichlet_laplacian") == pytest.approx(
        determinant.det_wronskian(d1).det, abs=1e-8)


def test_zeta_oracle_rejects_unknown_family():
    with pytest.raises(InputError):
        spectrum.det_via_zeta_oracle("bessel")
    with pytest.raises(InputError):
        spectrum.log_det_via_zeta("jacobi")

# ----------------------
# Resolvent trace
# ----------------------
@pytest.mark.parametrize("z", [0.5, 3.0, 20.0])
def test_trace_free_dirichlet(z):
    # sum 1/(pi^2 n^2 + z^2) = (z coth z - 1) / (2 z^2)
    expected = (z / math.tanh(z) - 1.0) / (2.0 * z * z)
    assert spectrum.trace_resolvent_model(0.5, z) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("nu", [0.0, 1.0])
def test_trace_asymptotics(nu):
    a0, c0 = spectrum.model_trace_constants(nu)
    assert (a0, c0) == (0.5, -(nu + 0.5) / 2.0)
    rows = spectrum.model_trace_asymptotics(nu, [20.0, 40.0, 80.0])
    leading = [abs(z_tr - a0) for _, z_tr, _ in rows]
    assert leading[0] > leading[1] > leading[2]
    for (z, z_tr, second), gap in zip(rows, leading):
        # z Tr - a0 is carried by c0 / z
        assert gap == pytest.approx(abs(c0) / z, rel=0.05)
        assert second == pytest.approx(c0, abs=0.02)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0])
def test_det_via_trace(nu):
    expected = determinant.det_model_closed(nu)
    assert spectrum.det_via_trace_model(nu, workers=3) == pytest.approx(expected, rel=1e-3)


def test_trace_needs_positive_z():
    with pytest.raises(InputError):
        spectrum.trace_resolvent_model(1.0, 0.0)

# ----------------------
# Product expansion
# ----------------------
def test_weyl_tail_dirichlet():
    eigs = [math.pi ** 2 * n * n for n in range(1, 201)]
    exact = sp.polygamma(1, 201) / math.pi ** 2
    assert spectrum.weyl_tail(eigs) == pytest.approx(exact, rel=1e-4)


def test_product_expansion_dirichlet(d1):
    eigs = [math.pi ** 2 * n * n for n in range(1, 201)]
    partial, target = spectrum.product_expansion_check(d1, 1.0, 200, eigs=eigs)
    assert target == pytest.approx(math.sinh(1.0), rel=1e-7)
    assert partial == pytest.approx(target, rel=1e-5)


def test_product_expansion_bessel(bessel_model):
    eigs = [specfun.bessel_j_zero(0.0, n) ** 2 for n in range(1, 201)]
    partial, target = spectrum.product_expansion_check(bessel_model, 1.0, 200, eigs=eigs)
    assert target == pytest.approx(1.2660658778, rel=1e-8)
    assert partial == pytest.approx(target, rel=1e-5)


def test_product_expansion_trivial_and_errors(d1):
    assert spectrum.product_expansion_check(d1, 0.0, 5) == (1.0, 1.0)
    with pytest.raises(InputError):
        spectrum.product_expansion_check(d1, 1.0, 5, eigs=[1.0, 2.0])
    with pytest.raises(InputError):
        spectrum.product_expansion_check(d1, -20.0, 2, eigs=[math.pi ** 2, 4.0 * math.pi ** 2])


def test_product_expansion_from_computed_dirichlet_spectrum(d1):
    partial, target = spectrum.product_expansion_check(d1, 1.0, 20)
    assert target == pytest.approx(math.sinh(1.0), rel=1e-7)
    assert partial == pytest.approx(target, rel=1e-5)


def test_product_expansion_from_computed_bessel_spectrum(bessel_model):
    eigs = spectrum.eigenvalues(bessel_model, 20).eigenvalues
    partial, target = spectrum.product_expansion_check(bessel_model, 1.0, 20, eigs=eigs)
    assert target == pytest.approx(1.2660658778, rel=1e-8)
    assert partial == pytest.approx(target, rel=1e-5)
