import numpy as np

from conftest import kron
from qmod.kempf_ness import kempf_ness_flow, omega, random_skew_hermitian
from qmod.line_bundle import (
    LineBundleData,
    PolynomialSection,
    ambient_chern_exact,
    ambient_chern_fd,
    ambient_line_metric,
    character_chi,
    chart_chern_density,
    chern_integral,
    connection_covariance_residual,
    descended_metric_chart,
    descended_metric_closed_form,
    minimal_n,
    random_tangent,
)
from qmod.moduli import kronecker_theta_density
from qmod.quiver import random_representation


def test_minimal_n():
    assert minimal_n((1, -1), (1, 1)) == 1
    assert minimal_n(("1/2", 0), (1, 1)) == 4
    assert minimal_n((3, 1), (1, 1)) == 1


def test_character_kronecker(rng):
    data = LineBundleData.of((1, -1), (1, 1))
    g1, g2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    assert np.isclose(character_chi([np.array([[g1]]), np.array([[g2]])], data), g2 / g1)
    assert np.isclose(character_chi([np.array([[g1]]), np.array([[g1]])], data), 1)


def test_character_unitary_and_identity(rng):
    data = LineBundleData.of((3, -1), (2, 1))
    k = [np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))[0] for d in (2, 1)]
    assert np.isclose(abs(character_chi(k, data)), 1)
    assert character_chi([np.eye(2), np.eye(1)], data) == 1
    assert data.balance() == 0


def test_line_metric_examples():
    x = kron(0.6, 0.8).mats
    assert ambient_line_metric(kron(0, 0).mats, 2.0, 1j, -1.0) == 2.0 * np.conj(1j)
    assert np.isclose(ambient_line_metric(x, 1, 1, -1.0), np.exp(-1))
    assert np.isclose(ambient_line_metric(x, 3.0, 1.0, -1.0), 3 * ambient_line_metric(x, 1, 1, -1.0))


def test_ambient_chern(rng):
    x = kron(0.2, -0.5j).mats
    v = [np.array([[1.0]]), np.array([[0.0]])]
    w = [np.array([[1j]]), np.array([[0.0]])]
    assert np.isclose(omega(v, w), 2)
    assert abs(ambient_chern_fd(x, v, w, -1.0) - 1 / np.pi) < 1e-6
    assert abs(ambient_chern_fd(x, v, v, -1.0)) < 1e-12
    vals = []
    for _ in range(10):
        base = kron(*(rng.standard_normal(2) + 1j * rng.standard_normal(2))).mats
        vals.append(ambient_chern_fd(base, v, w, -1.0))
    assert max(vals) - min(vals) <= 1e-8
    assert np.isclose(ambient_chern_exact(v, w, -1.0), 1 / np.pi)


def test_connection_identity(kq, rng):
    data = LineBundleData.of((2, -1), (1, 2))
    x = random_representation(kq, (1, 2), seed=5)
    xi = random_skew_hermitian(x.dims, rng)
    n = sum(m.size for m in x.mats)
    assert connection_covariance_residual(x, xi, PolynomialSection.constant(n), data) < 1e-10
    zero = [np.zeros((d, d), dtype=complex) for d in x.dims]
    assert connection_covariance_residual(x, zero, PolynomialSection.constant(n), data) == 0
    lin = PolynomialSection.linear(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    assert connection_covariance_residual(x, xi, lin, data) < 1e-8


def test_descended_metric(rng):
    assert np.isclose(descended_metric_chart(0j, 1), np.exp(-1))
    for n in (1, 2):
        for _ in range(5):
            z = complex(*rng.standard_normal(2)) * 2
            assert abs(descended_metric_chart(z, n) - descended_metric_closed_form(z, n)) < 1e-8


def test_chart_chern_density(rng):
    assert abs(chart_chern_density(0j, 1) - 1 / np.pi) < 1e-6
    for n in (1, 2):
        z = complex(*rng.standard_normal(2))
        ratio = chart_chern_density(z, n) / kronecker_theta_density(z)
        assert abs(ratio - n / (2 * np.pi)) < 1e-3


def test_chern_integral():
    assert abs(chern_integral(1).total - 1) < 1e-2


def test_random_tangent_norm(kq):
    t = random_tangent(kempf_ness_flow(kron(1, 2), (1, -1)).final, np.random.default_rng(0))
    assert np.isclose(np.sqrt(sum(np.vdot(m, m).real for m in t)), 1)
