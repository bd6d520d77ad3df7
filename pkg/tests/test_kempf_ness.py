import numpy as np
import pytest

from conftest import kron, random_quiver
from qmod.errors import NotEinsteinHermitian
from qmod.kempf_ness import (
    eh_orthogonal_decomposition,
    eh_uniqueness_check,
    inner,
    k_operator,
    kempf_ness_flow,
    lie_pairing,
    moment_identity_residual,
    moment_map_L,
    newton_direction,
    orbit_action,
    random_skew_hermitian,
    skew_endomorphism_nullity,
    summand_representations,
)
from qmod.quiver import direct_sum, is_isomorphic, random_representation, zero_representation
from qmod.weight import Weight


def test_k_operator_kronecker():
    a, b = 0.3 - 1.2j, 2.0 + 0.5j
    k1, k2 = k_operator(kron(a, b), (1, -1))
    s = abs(a) ** 2 + abs(b) ** 2
    assert np.isclose(k1[0, 0], 1 - s) and np.isclose(k2[0, 0], -1 + s)


def test_k_operator_zero(kq):
    k = k_operator(zero_representation(kq, (2, 1)), ("1/2", 3))
    assert np.allclose(k[0], 0.5 * np.eye(2)) and np.allclose(k[1], 3 * np.eye(1))


def test_coordinate_line_is_einstein_hermitian():
    k1, k2 = k_operator(kron(1, 0), (1, -1))
    assert k1[0, 0] == 0 and k2[0, 0] == 0
    assert moment_map_L(kron(1, 0), (1, -1))[1] == 0


def test_L_of_zero_kronecker(kq):
    ell, norm = moment_map_L(zero_representation(kq, (1, 1)), (1, -1))
    assert np.isclose(ell[0][0, 0], 1j) and np.isclose(ell[1][0, 0], -1j)
    assert np.isclose(norm**2, 2)


def test_L_phase_invariant(rng):
    rep = kron(rng.standard_normal() + 1j, rng.standard_normal())
    c = np.exp(0.7j)
    a, _ = moment_map_L(rep, (2, -3))
    b, _ = moment_map_L(rep.scaled(c), (2, -3))
    assert all(np.allclose(x, y) for x, y in zip(a, b))


def test_moment_identity_central_and_zero(kq, rng):
    rep = random_representation(kq, (2, 1), seed=3)
    central = [1j * np.eye(d) for d in rep.dims]
    assert all(np.allclose(x, 0) for x in orbit_action(rep, central))
    assert moment_identity_residual(rep, central, (1, -2)) < 1e-12
    xi = random_skew_hermitian(rep.dims, rng)
    assert moment_identity_residual(zero_representation(kq, (2, 1)), xi, (1, -2)) < 1e-14


def test_moment_identity_against_direct_formula(kq, rng):
    # independent evaluation: Phi(xi) = -tr-pairing of L with xi, versus
    # alpha(xi) + 1/2 Omega(D xi, rho) with alpha(xi) = (i theta - i mu) paired with xi
    th = Weight((1, -2))
    for seed in range(10):
        rep = random_representation(kq, (2, 1), seed=seed)
        xi = random_skew_hermitian(rep.dims, rng)
        ell, _ = moment_map_L(rep, th)
        lhs = lie_pairing(ell, xi)
        mu = float(th.slope(rep.dims))
        alpha = lie_pairing([1j * (float(t) - mu) * np.eye(d) for t, d in zip(th, rep.dims)], xi)
        dx = orbit_action(rep, xi)
        rhs = alpha + 0.5 * (-2.0 * inner(dx, rep.mats).imag)
        assert abs(lhs - rhs) < 1e-10
        assert moment_identity_residual(rep, xi, th) < 1e-10


def test_flow_rescales_coordinate_line():
    r = kempf_ness_flow(kron(2, 0), (1, -1))
    assert r.converged and abs(abs(r.final.mats[0][0, 0]) - 1) < 1e-6
    assert all(b <= a for a, b in zip(r.history, r.history[1:]))
    assert r.group_residual() < 1e-8


def test_flow_zero_kronecker_is_fixed(kq):
    r = kempf_ness_flow(zero_representation(kq, (1, 1)), (1, -1))
    assert not r.converged and r.critical
    assert all(np.isclose(f, 1.0) for f in r.history)


def test_flow_starting_at_eh_point():
    r = kempf_ness_flow(kron(1, 0), (1, -1))
    assert r.iterations == 0 and r.converged


def test_flow_budget_zero():
    r = kempf_ness_flow(kron(3, 1), (1, -1), max_iters=0)
    assert r.iterations == 0 and not r.converged and r.status == "budget"


def test_gradient_method_also_converges():
    r = kempf_ness_flow(kron(0.2, 0.1j), (1, -1), method="gradient")
    assert r.converged and all(b <= a for a, b in zip(r.history, r.history[1:]))


def test_newton_direction_solves_linearisation(kq):
    from qmod.kempf_ness import deviation, k_differential

    rep = random_representation(kq, (2, 2), seed=11)
    y, _ = deviation(rep, (1, -1))
    x = newton_direction(rep, y)
    dk = k_differential(rep, x)
    # trace-free part of Y lies in the range of dK on a Schur point
    assert np.sqrt(sum(np.linalg.norm(a + b) ** 2 for a, b in zip(dk, y))) < 1e-8


def test_decompose_stable():
    parts = eh_orthogonal_decomposition(kron(1, 0), (1, -1))
    assert len(parts) == 1 and parts[0].subdim == (1, 1)


def test_decompose_sum_of_lines():
    m = direct_sum([kron(1, 0), kron(0, 1)])
    parts = eh_orthogonal_decomposition(m, (1, -1))
    assert sorted(p.subdim for p in parts) == [(1, 1), (1, 1)]
    for a in range(2):
        assert np.allclose(parts[0].bases[a].conj().T @ parts[1].bases[a], 0, atol=1e-8)
    reps = summand_representations(m, parts)
    assert sorted(is_isomorphic(r, kron(1, 0)).isomorphic for r in reps) == [False, True]


def test_decompose_double():
    r = kron(1, 1) .scaled(1 / np.sqrt(2))
    parts = summand_representations(direct_sum([r, r]), eh_orthogonal_decomposition(direct_sum([r, r]), (1, -1)))
    assert len(parts) == 2 and all(is_isomorphic(p, r) for p in parts)


def test_decompose_needs_eh():
    with pytest.raises(NotEinsteinHermitian):
        eh_orthogonal_decomposition(kron(3, 0), (1, -1))


def test_uniqueness_unitary(rng):
    rho = kron(0.6, 0.8)
    k = [np.array([[np.exp(0.4j)]]), np.array([[np.exp(-1.1j)]])]
    rep = eh_uniqueness_check(rho, rho.act(k), (1, -1), g=k)
    assert rep.passed and abs(rep.scale - 1) < 1e-12


def test_uniqueness_central_scaling():
    rho = kron(0.6, 0.8)
    g = [2 * np.eye(1), 2 * np.eye(1)]
    rep = eh_uniqueness_check(rho, rho.act(g), (1, -1), g=g)
    assert rep.passed and abs(rep.scale - 2) < 1e-12 and all(np.allclose(m, 1) for m in rep.unitary_part)


def test_uniqueness_two_flow_limits(kq):
    start = random_representation(kq, (1, 2), seed=4)
    g0 = [np.array([[1.5 - 0.5j]]), np.array([[2.0, 1.0], [0.5, 1.0]])]
    a = kempf_ness_flow(start, (2, -1), eps=1e-12).final
    b = kempf_ness_flow(start.act(g0), (2, -1), eps=1e-12).final
    assert eh_uniqueness_check(a, b, (2, -1)).passed


def test_skew_nullity_stable_point():
    r = kempf_ness_flow(kron(1.3, -0.4j), (1, -1)).final
    assert skew_endomorphism_nullity(r) == 1


def test_random_quiver_moment_identity(rng):
    for _ in range(5):
        q = random_quiver(rng)
        d = [int(x) for x in rng.integers(1, 4, q.n_vertices)]
        rep = random_representation(q, d, seed=int(rng.integers(1 << 30)))
        th = Weight(int(x) for x in rng.integers(-3, 4, q.n_vertices))
        assert moment_identity_residual(rep, random_skew_hermitian(d, rng), th) < 1e-10
