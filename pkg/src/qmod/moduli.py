"""Metric of the stable moduli space evaluated through horizontal lifts.

At an Einstein-Hermitian Schur point the tangent space of the moduli space
is identified with the Hermitian orthocomplement of the complex orbit
directions ``Im D_rho`` (equivalently ``Ker D_rho^*``).  Tangent vectors are
lifted there and paired with the ambient Hermitian product and
``Omega = -2 Im <.,.>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import GridTooCoarse, NotEinsteinHermitian, NotSchur, ShapeMismatch
from .kempf_ness import EPS_EH, inner, moment_map_L, omega
from .quiver import Representation, _unflatten, dim_end, hom_constraint_matrix, kronecker_quiver


def _flatten(mats) -> np.ndarray:
    return np.concatenate([np.asarray(m, dtype=complex).ravel() for m in mats] + [np.zeros(0, dtype=complex)])


class OrbitOperator:
    """``D_rho : Lie G -> A``, ``xi -> (rho_alpha xi_s - xi_t rho_alpha)``, as a dense matrix.

    Lie G is flattened vertex by vertex (row-major), A arrow by arrow; both
    carry the trace Hermitian products, for which these flattenings are
    isometries, so the adjoint is the conjugate transpose.
    """

    def __init__(self, rep: Representation):
        self.rep = rep
        self.matrix = -hom_constraint_matrix(rep, rep)
        self._shapes = [m.shape for m in rep.mats]

    @property
    def shape(self) -> tuple:
        return self.matrix.shape

    def apply(self, xi) -> list[np.ndarray]:
        v = self.matrix @ _flatten(xi)
        return self._split_arrows(v)

    def adjoint(self, delta) -> list[np.ndarray]:
        v = self.matrix.conj().T @ _flatten(delta)
        return list(_unflatten(v, self.rep.dims, self.rep.dims))

    def adjoint_direct(self, delta) -> list[np.ndarray]:
        """``D^*`` by its closed form ``sum_{s=a} rho^H delta - sum_{t=a} delta rho^H``."""
        q = self.rep.quiver
        out = [np.zeros((d, d), dtype=complex) for d in self.rep.dims]
        for k, (rho, dl) in enumerate(zip(self.rep.mats, delta)):
            out[q.src(k)] += rho.conj().T @ dl
            out[q.dst(k)] -= dl @ rho.conj().T
        return out

    def _split_arrows(self, v) -> list[np.ndarray]:
        out, pos = [], 0
        for r, c in self._shapes:
            out.append(v[pos:pos + r * c].reshape(r, c))
            pos += r * c
        return out

    def rank(self, tol: float | None = None) -> int:
        return linalg.numerical_rank(self.matrix, tol)

    def kernel_dim(self, tol: float | None = None) -> int:
        return self.matrix.shape[1] - self.rank(tol)

    def horizontal_dim(self, tol: float | None = None) -> int:
        """``dim Ker D^*`` on the arrow space."""
        return self.matrix.shape[0] - self.rank(tol)


def arrow_space_dim(rep: Representation) -> int:
    return sum(m.size for m in rep.mats)


def group_dim(rep: Representation) -> int:
    return sum(d * d for d in rep.dims)


def _check_base_point(rep: Representation, theta, eps: float):
    if moment_map_L(rep, theta)[1] > eps:
        raise NotEinsteinHermitian("base point is not Einstein-Hermitian")
    if dim_end(rep) != 1:
        raise NotSchur("base point is not Schur")


def _check_tangent(rep: Representation, delta):
    if len(delta) != len(rep.mats) or any(np.shape(d) != m.shape for d, m in zip(delta, rep.mats)):
        raise ShapeMismatch("tangent vector shapes do not match the representation")


def horizontal_project(rep: Representation, delta, theta=None, eps: float = 1e-6, check: bool = True, op=None):
    """``delta - D (D^+ delta)``: the component orthogonal to the complex orbit directions."""
    _check_tangent(rep, delta)
    if check:
        if theta is None:
            raise ValueError("theta is needed to check the base point")
        _check_base_point(rep, theta, eps)
    op = op or OrbitOperator(rep)
    v = _flatten(delta)
    if op.matrix.size == 0:
        return [np.asarray(d, dtype=complex) for d in delta]
    xi, *_ = np.linalg.lstsq(op.matrix, v, rcond=None)
    return op._split_arrows(v - op.matrix @ xi)


@dataclass
class MetricValue:
    h: complex
    theta_form: float


def moduli_metric(rep: Representation, d1, d2, theta, eps: float = 1e-6, check: bool = True) -> MetricValue:
    """``h_s = <d1_h, d2_h>`` and ``Theta_s = Omega(d1_h, d2_h)`` through horizontal lifts."""
    if check:
        _check_base_point(rep, theta, eps)
    op = OrbitOperator(rep)
    h1 = horizontal_project(rep, d1, check=False, op=op)
    h2 = horizontal_project(rep, d2, check=False, op=op)
    return MetricValue(inner(h1, h2), omega(h1, h2))


def moduli_dimension(rep: Representation) -> int:
    """Expected complex dimension ``dim A - dim G + 1`` at a Schur point."""
    return arrow_space_dim(rep) - group_dim(rep) + 1


# -- Kronecker chart ----------------------------------------------------------------------


def kronecker_lift(z: complex) -> Representation:
    """Einstein-Hermitian lift ``(1, z) / sqrt(1 + |z|^2)`` for ``theta = (1, -1)``."""
    nrm = 1.0 / np.sqrt(1.0 + abs(z) ** 2)
    return Representation(kronecker_quiver(), (1, 1), {"a": [[nrm]], "b": [[z * nrm]]})


def kronecker_chart_tangents(z: complex) -> tuple[list, list]:
    """Derivatives of :func:`kronecker_lift` along ``Re z`` and ``Im z`` (closed form)."""
    n = 1.0 / np.sqrt(1.0 + abs(z) ** 2)
    n3 = n**3
    dx = [np.array([[-z.real * n3]], dtype=complex), np.array([[n - z * z.real * n3]], dtype=complex)]
    dy = [np.array([[-z.imag * n3]], dtype=complex), np.array([[1j * n - z * z.imag * n3]], dtype=complex)]
    return dx, dy


def kronecker_theta_density(z: complex) -> float:
    """``Theta_s(d/dx, d/dy)`` at the chart point ``z``."""
    rep = kronecker_lift(z)
    dx, dy = kronecker_chart_tangents(z)
    return moduli_metric(rep, dx, dy, (1, -1), check=False).theta_form


@dataclass
class ModuliReport:
    n_grid: int
    n_angle: int
    radius: float
    bulk: float
    tail: float
    tail_error: float
    total: float
    density_at_zero: float
    positive: bool
    samples: list = field(default_factory=list)


def kronecker_moduli_report(
    n_grid: int = 200, theta=(1, -1), n_angle: int = 32, radius: float = 20.0, density=None
) -> ModuliReport:
    """Integrate ``Theta_s`` over the Kronecker moduli through the chart ``z``.

    Gauss-Legendre in ``r`` on ``[0, R]``, a uniform periodic rule in the
    angle, and the tail ``|z| > R`` from the ``c / r^4`` decay of the
    density, with ``c`` read off at ``R``.  Summation is index ordered.
    """
    if n_grid < 8 or n_angle < 4:
        raise GridTooCoarse("need at least 8 radial and 4 angular nodes")
    if tuple(int(t) for t in theta) != (1, -1):
        raise NotImplementedError("the chart is set up for theta = (1, -1)")
    density = density or kronecker_theta_density
    nodes, weights = np.polynomial.legendre.leggauss(n_grid)
    r = 0.5 * radius * (nodes + 1.0)
    wr = 0.5 * radius * weights
    phis = 2.0 * np.pi * np.arange(n_angle) / n_angle
    bulk, positive, samples = 0.0, True, []
    for i in range(n_grid):
        ring = 0.0
        for phi in phis:
            val = density(r[i] * np.exp(1j * phi))
            positive = positive and val > 0
            ring += val
        bulk += wr[i] * r[i] * ring * (2.0 * np.pi / n_angle)
        if i % max(1, n_grid // 20) == 0:
            samples.append([float(r[i]), float(ring / n_angle)])

    def tail_at(rad):
        c = density(complex(rad)) * rad**4
        return 2.0 * np.pi * c / (2.0 * radius**2)

    tail = tail_at(radius)
    tail_error = abs(tail - tail_at(2.0 * radius))
    total = bulk + tail
    return ModuliReport(n_grid, n_angle, radius, bulk, tail, tail_error, total, density(0j), positive, samples)


# -- symplectic versus metric orthocomplements -------------------------------------------


def _realify(vecs: np.ndarray) -> np.ndarray:
    """Columns of complex vectors as real vectors ``[Re; Im]``."""
    return np.vstack([vecs.real, vecs.imag])


def omega_orthocomplement(w: np.ndarray) -> np.ndarray:
    """Real basis of ``{v : Omega(u, v) = 0 for u in W}``; ``W`` given by complex columns spanning it over R."""
    n = w.shape[0]
    if w.shape[1] == 0:
        return np.eye(2 * n)
    # Omega(u, v) = 2 (Re u . Im v - Im u . Re v)
    rows = np.hstack([-2.0 * w.imag.T, 2.0 * w.real.T])
    return linalg.null_space(rows).real


def b_orthocomplement(w: np.ndarray) -> np.ndarray:
    """Real basis of ``{v : B(u, v) = 0 for u in W}`` with ``B = 2 Re <.,.>``."""
    n = w.shape[0]
    if w.shape[1] == 0:
        return np.eye(2 * n)
    rows = 2.0 * _realify(w).T
    return linalg.null_space(rows).real


def orthocomplement_identity_residual(w: np.ndarray) -> float:
    """Compare ``W^{perp Omega}`` with ``(i W)^{perp B}``; 0 means equal subspaces."""
    w = np.asarray(w, dtype=complex)
    left = omega_orthocomplement(w)
    right = b_orthocomplement(1j * w)
    if left.shape[1] != right.shape[1]:
        return 1.0
    if left.shape[1] == 0:
        return 0.0
    return linalg.principal_angle_gap(left.astype(complex), right.astype(complex))


def random_real_subspace(n: int, k: int, rng) -> np.ndarray:
    """``k`` complex vectors in ``C^n`` spanning a random real ``k``-dimensional subspace."""
    return rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
