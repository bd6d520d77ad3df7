"""The character ``chi``, the weighted metric on the trivial line bundle, and Chern form checks.

``E = A x C`` with ``(x, a) g = (x g, chi(g)^{-1} a)`` and fibre metric
``h(x)(a, b) = exp(lam ||x||^2) a conj(b)``.  The Chern form of the
canonical connection is ``c_1 = -(i / 2 pi) d d-bar log h``; as a real
2-form this is ``-(1 / 2 pi) * 1/2 [H(Jv, w) - H(v, Jw)]`` where ``H`` is the
real Hessian of the potential and ``J`` is multiplication by ``i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ShapeMismatch
from .kempf_ness import inner, omega, orbit_action
from .quiver import Representation, kronecker_quiver
from .weight import as_weight


def minimal_n(theta, d) -> int:
    """Least ``n > 0`` with ``n (theta_a - mu_theta(d))`` integral for every vertex."""
    theta = as_weight(theta)
    mu = theta.slope(d)
    return lcm(*[(t - mu).denominator for t in theta])


@dataclass(frozen=True)
class LineBundleData:
    theta: tuple
    d: tuple
    n: int
    lam: float
    exponents: tuple  # n (mu - theta_a)

    @classmethod
    def of(cls, theta, d, n: int | None = None) -> "LineBundleData":
        theta = as_weight(theta)
        d = tuple(int(x) for x in d)
        mu = theta.slope(d)
        n = minimal_n(theta, d) if n is None else int(n)
        if n <= 0:
            raise ValueError("n must be a positive integer")
        ex = [n * (mu - t) for t in theta]
        if any(Fraction(x).denominator != 1 for x in ex):
            raise ValueError(f"n = {n} does not clear the denominators of theta - mu")
        return cls(tuple(theta), d, n, float(-n), tuple(int(x) for x in ex))

    def balance(self) -> int:
        """``sum_a n (mu - theta_a) d_a``; zero means scalars lie in the kernel of chi."""
        return sum(e * x for e, x in zip(self.exponents, self.d))


def character_chi(g: Sequence[np.ndarray], data: LineBundleData) -> complex:
    """``prod_a det(g_a)^{n (mu - theta_a)}``."""
    if len(g) != len(data.exponents):
        raise ShapeMismatch("group element has the wrong number of blocks")
    out = 1.0 + 0j
    for ga, ex, d in zip(g, data.exponents, data.d):
        ga = np.asarray(ga, dtype=complex)
        if ga.shape != (d, d):
            raise ShapeMismatch("group element block has the wrong shape")
        if d == 0 or ex == 0:
            continue
        det = np.linalg.det(ga)
        if abs(det) == 0.0:
            raise ValueError("group element is singular")
        out *= det**ex
    return complex(out)


def chi_tangent(xi: Sequence[np.ndarray], data: LineBundleData) -> complex:
    """``T_e chi (xi) = sum_a n (mu - theta_a) tr xi_a``."""
    return complex(sum(ex * np.trace(x) for ex, x in zip(data.exponents, xi)))


def ambient_line_metric(x, a: complex, b: complex, lam: float) -> complex:
    """``exp(lam ||x||^2) a conj(b)``."""
    n2 = sum(float(np.vdot(m, m).real) for m in x)
    return complex(np.exp(lam * n2) * a * np.conj(b))


def _norm2(x) -> float:
    return sum(float(np.vdot(m, m).real) for m in x)


def _axpy(x, v, t):
    return [a + t * b for a, b in zip(x, v)]


def hessian_fd(phi: Callable, x, u, w, step: float) -> float:
    """Central second difference of a real function ``phi`` on the arrow space along ``u, w``."""
    h = step
    pp = phi(_axpy(_axpy(x, u, h), w, h))
    pm = phi(_axpy(_axpy(x, u, h), w, -h))
    mp = phi(_axpy(_axpy(x, u, -h), w, h))
    mm = phi(_axpy(_axpy(x, u, -h), w, -h))
    return (pp - pm - mp + mm) / (4.0 * h * h)


def chern_form_fd(phi: Callable, x, v, w, step: float = 1e-3) -> float:
    """``c_1(v, w)`` of the metric ``exp(phi)`` on a trivial bundle, by finite differences."""
    jv = [1j * m for m in v]
    jw = [1j * m for m in w]
    i_ddbar = 0.5 * (hessian_fd(phi, x, jv, w, step) - hessian_fd(phi, x, v, jw, step))
    return -i_ddbar / (2.0 * np.pi)


def ambient_chern_fd(x, v, w, lam: float, step: float = 1e-3, richardson: bool = False) -> float:
    """Finite-difference ``c_1(E, h)(v, w)`` for the potential ``lam ||x||^2``."""
    phi = lambda y: lam * _norm2(y)  # noqa: E731
    if not richardson:
        return chern_form_fd(phi, x, v, w, step)
    coarse = chern_form_fd(phi, x, v, w, 10.0 * step)
    fine = chern_form_fd(phi, x, v, w, step)
    return (100.0 * fine - coarse) / 99.0


def ambient_chern_exact(v, w, lam: float) -> float:
    """``-(lam / 2 pi) Omega(v, w)``."""
    return -lam / (2.0 * np.pi) * omega(v, w)


# -- connection versus infinitesimal action ----------------------------------------------


class PolynomialSection:
    """Holomorphic polynomial ``f`` in the flattened arrow coordinates; ``s = f s_0``.

    ``coeffs`` maps exponent tuples (one entry per coordinate) to complex
    coefficients.
    """

    def __init__(self, coeffs: Mapping[tuple, complex], n_coords: int):
        self.coeffs = {tuple(int(e) for e in k): complex(c) for k, c in coeffs.items()}
        self.n_coords = n_coords
        for k in self.coeffs:
            if len(k) != n_coords:
                raise ValueError("exponent tuple has the wrong length")

    @classmethod
    def constant(cls, n_coords: int, c: complex = 1.0) -> "PolynomialSection":
        return cls({(0,) * n_coords: c}, n_coords)

    @classmethod
    def linear(cls, weights: Sequence[complex]) -> "PolynomialSection":
        n = len(weights)
        return cls({tuple(int(i == j) for i in range(n)): c for j, c in enumerate(weights)}, n)

    @classmethod
    def random(cls, n_coords: int, degree: int, rng, terms: int = 4) -> "PolynomialSection":
        coeffs = {}
        for _ in range(terms):
            ex = [0] * n_coords
            for _ in range(int(rng.integers(0, degree + 1))):
                ex[int(rng.integers(n_coords))] += 1
            coeffs[tuple(ex)] = complex(rng.standard_normal() + 1j * rng.standard_normal())
        return cls(coeffs, n_coords)

    def __call__(self, z: np.ndarray) -> complex:
        return complex(sum(c * np.prod(z ** np.array(k)) for k, c in self.coeffs.items()))

    def derivative(self, z: np.ndarray, v: np.ndarray) -> complex:
        """Complex directional derivative ``df_z(v)`` in closed form."""
        total = 0j
        for k, c in self.coeffs.items():
            k = np.array(k)
            for j in np.nonzero(k)[0]:
                kk = k.copy()
                kk[j] -= 1
                total += c * k[j] * np.prod(z**kk) * v[j]
        return complex(total)


def _flat(x) -> np.ndarray:
    return np.concatenate([np.asarray(m, dtype=complex).ravel() for m in x] + [np.zeros(0, dtype=complex)])


def moment_alpha(x: Representation, xi, data: LineBundleData) -> float:
    """``Phi_alpha(x)(xi) = Omega(xi#(x), x) / 2 + alpha(xi)`` with ``alpha = -(i / lam) T_e chi``."""
    alpha = (-1j / data.lam) * chi_tangent(xi, data)
    return 0.5 * omega(orbit_action(x, xi), x.mats) + float(alpha.real)


def connection_covariance_residual(
    x: Representation, xi, s: PolynomialSection, data: LineBundleData, step: float = 1e-3
) -> float:
    """Residual of ``nabla_{xi#} s = xi s - lam i Phi_alpha^xi s`` at ``x``.

    The left side uses the connection form ``lam <v, x>`` of the frame
    ``s_0`` and the closed-form derivative of ``f``.  The right side
    differentiates the defining formula ``t -> chi(exp(t xi)) f(x exp(t xi))``
    numerically (fourth-order central differences, exact matrix exponentials).
    """
    from scipy.linalg import expm

    for m in xi:
        if not np.allclose(m, -m.conj().T, atol=1e-12 * max(1.0, np.abs(m).max(initial=0.0))):
            raise ValueError("xi must be skew-Hermitian")
    z = _flat(x.mats)
    v = _flat(orbit_action(x, xi))
    f0 = s(z)
    lhs = s.derivative(z, v) + f0 * data.lam * inner(orbit_action(x, xi), x.mats)

    def moved(t):
        g = [expm(t * m) for m in xi]
        return character_chi(g, data) * s(_flat(x.act(g).mats))

    h = step
    xi_s = (8.0 * (moved(h) - moved(-h)) - (moved(2 * h) - moved(-2 * h))) / (12.0 * h)
    rhs = xi_s - data.lam * 1j * moment_alpha(x, xi, data) * f0
    return abs(lhs - rhs) / (1.0 + abs(lhs))


# -- descended metric on the Kronecker chart ---------------------------------------------


def descended_metric_chart(z: complex, n: int = 1) -> float:
    """``k_s(z)`` for the frame given by the slice ``sigma(z) = (1, z)`` (Kronecker, theta = (1,-1)).

    The slice point is moved to its Einstein-Hermitian lift by
    ``g = ((1 + |z|^2)^{-1/2}, 1)``; the frame value ``1`` becomes
    ``chi(g)^{-1}`` and ``k_s`` is the ambient metric there.
    """
    data = LineBundleData.of((1, -1), (1, 1), n)
    sigma = Representation(kronecker_quiver(), (1, 1), {"a": [[1.0]], "b": [[z]]})
    g = [np.array([[1.0 / np.sqrt(1.0 + abs(z) ** 2)]], dtype=complex), np.eye(1, dtype=complex)]
    x = sigma.act(g)
    a = 1.0 / character_chi(g, data)
    return float(ambient_line_metric(x.mats, a, a, data.lam).real)


def descended_metric_closed_form(z: complex, n: int = 1) -> float:
    return float(np.exp(-n) * (1.0 + abs(z) ** 2) ** (-n))


def chart_chern_density(z: complex, n: int = 1, step: float = 1e-3, metric=descended_metric_chart) -> float:
    """``c_1(d/dx, d/dy) = -(1 / 4 pi) Laplacian log k_s`` by the five-point stencil."""
    f = lambda w: np.log(metric(w, n))  # noqa: E731
    h = step
    lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4.0 * f(z)) / (h * h)
    return -lap / (4.0 * np.pi)


def chern_integral(n: int = 1, n_grid: int = 200, n_angle: int = 32, radius: float = 20.0):
    """``int c_1(F_s, k_s)`` over the Kronecker moduli (same quadrature as for ``Theta_s``)."""
    from .moduli import kronecker_moduli_report

    return kronecker_moduli_report(
        n_grid, n_angle=n_angle, radius=radius, density=lambda w: chart_chern_density(w, n)
    )


def random_tangent(rep: Representation, rng, scale: float = 1.0) -> list[np.ndarray]:
    out = []
    for m in rep.mats:
        out.append(scale * (rng.standard_normal(m.shape) + 1j * rng.standard_normal(m.shape)))
    nrm = np.sqrt(sum(float(np.vdot(a, a).real) for a in out))
    return [a * (scale / nrm) for a in out] if nrm > 0 else out


def all_exponents(n_coords: int, degree: int):
    """Every exponent tuple of total degree ``<= degree``."""
    for k in itertools.product(range(degree + 1), repeat=n_coords):
        if sum(k) <= degree:
            yield k
