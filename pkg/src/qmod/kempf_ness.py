"""Hermitian metrics, the moment map ``L_theta`` and descent flows to Einstein-Hermitian points.

The flow keeps the standard metric fixed and moves the representation
along its complexified orbit, ``rho <- rho . exp(s Y)`` with
``Y = K_theta(rho) - mu_theta(d) id`` Hermitian per vertex.  Along this
path ``dF/ds = -2 ||D_rho(Y)||^2`` where ``F = 1/2 ||L_theta||^2``, so it is
a descent direction whenever the infinitesimal action of ``Y`` is non-zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import NotEinsteinHermitian, NotIsomorphic, NotSchur, ShapeMismatch
from .quiver import (
    Representation,
    SubrepWitness,
    _unflatten,
    dim_end,
    direct_sum,
    hom_basis,
    hom_constraint_matrix,
    is_isomorphic,
    subquotient,
)
from .weight import as_weight

EPS_EH = 1e-8


@dataclass
class HermitianFamily:
    """Per-vertex positive-definite Hermitian matrices ``h_a``."""

    mats: tuple

    def __post_init__(self):
        for h in self.mats:
            if h.size == 0:
                continue
            if not np.allclose(h, h.conj().T, atol=1e-12 * max(1.0, np.abs(h).max())):
                raise ValueError("metric block is not Hermitian")
            if np.linalg.eigvalsh(h)[0] <= 0:
                raise ValueError("metric block is not positive definite")

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "HermitianFamily":
        return cls(tuple(np.eye(d, dtype=complex) for d in dims))


def adjoint(rho: np.ndarray, h_src: np.ndarray, h_dst: np.ndarray) -> np.ndarray:
    """Adjoint of ``rho : V_s -> V_t`` for ``h(x, y) = y^H h x`` on both ends."""
    if rho.size == 0:
        return rho.conj().T
    return np.linalg.solve(h_src, rho.conj().T @ h_dst)


def k_operator(rep: Representation, theta, h: HermitianFamily | None = None) -> list[np.ndarray]:
    theta = as_weight(theta)
    q = rep.quiver
    if h is None:
        h = HermitianFamily.identity(rep.dims)
    elif len(h.mats) != q.n_vertices or any(m.shape != (d, d) for m, d in zip(h.mats, rep.dims)):
        raise ShapeMismatch("metric shapes do not match the dimension vector")
    out = [float(theta[a]) * np.eye(d, dtype=complex) for a, d in enumerate(rep.dims)]
    for k, rho in enumerate(rep.mats):
        s, t = q.src(k), q.dst(k)
        if rho.size == 0:
            continue
        rs = adjoint(rho, h.mats[s], h.mats[t])
        out[t] += rho @ rs
        out[s] -= rs @ rho
    return out


def deviation(rep: Representation, theta) -> tuple[list[np.ndarray], float]:
    """Hermitian family ``Y = K_theta - mu id`` and ``||L_theta|| = ||Y||``."""
    theta = as_weight(theta)
    mu = float(theta.slope(rep.dims))
    y = k_operator(rep, theta)
    for a, d in enumerate(rep.dims):
        y[a] = y[a] - mu * np.eye(d)
        y[a] = 0.5 * (y[a] + y[a].conj().T)
    return y, float(np.sqrt(sum(np.vdot(m, m).real for m in y)))


def moment_map_L(rep: Representation, theta) -> tuple[list[np.ndarray], float]:
    """``L_theta(rho)_a`` (skew-Hermitian per vertex) and its Frobenius norm."""
    y, norm = deviation(rep, theta)
    return [1j * m for m in y], norm


def is_einstein_hermitian(rep: Representation, theta, eps: float = EPS_EH) -> bool:
    return moment_map_L(rep, theta)[1] <= eps


# -- Lie algebra and symplectic pairings -------------------------------------------------


def scalar_part(xi: Sequence[np.ndarray]) -> complex:
    rk = sum(m.shape[0] for m in xi)
    return sum(np.trace(m) for m in xi) / rk


def traceless_part(xi: Sequence[np.ndarray]) -> list[np.ndarray]:
    c = scalar_part(xi)
    return [m - c * np.eye(m.shape[0]) for m in xi]


def lie_pairing(xi: Sequence[np.ndarray], eta: Sequence[np.ndarray]) -> float:
    """Real inner product ``-sum tr(xi_a eta_a)`` on Lie K."""
    return float(-sum(np.trace(x @ y) for x, y in zip(xi, eta)).real)


def inner(sigma: Sequence[np.ndarray], tau: Sequence[np.ndarray]) -> complex:
    """Hermitian inner product on the arrow space, linear in the first slot."""
    return complex(sum(np.vdot(t, s) for s, t in zip(sigma, tau)))


def omega(sigma, tau) -> float:
    return -2.0 * inner(sigma, tau).imag


def orbit_action(rep: Representation, xi: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Infinitesimal right action ``D_rho(xi)_alpha = rho_alpha xi_s - xi_t rho_alpha``."""
    q = rep.quiver
    return [rho @ xi[q.src(k)] - xi[q.dst(k)] @ rho for k, rho in enumerate(rep.mats)]


def orbit_matrix(rep: Representation) -> np.ndarray:
    """Complex matrix of ``D_rho`` on row-major flattened Lie G."""
    return -hom_constraint_matrix(rep, rep)


def random_skew_hermitian(dims, rng) -> list[np.ndarray]:
    out = []
    for d in dims:
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        out.append(0.5 * (z - z.conj().T))
    return out


def moment_identity_residual(rep: Representation, xi: Sequence[np.ndarray], theta) -> float:
    """``|Phi(rho)(xi) - (Omega(xi#(rho), rho)/2 + alpha(xi))|``, relative to ``1 + |LHS|``."""
    theta = as_weight(theta)
    for m in xi:
        if not np.allclose(m, -m.conj().T, atol=1e-12 * max(1.0, np.abs(m).max(initial=0.0))):
            raise ValueError("xi must be skew-Hermitian at every vertex")
    mu = theta.slope(rep.dims)
    lhs = lie_pairing(xi, moment_map_L(rep, theta)[0])
    eta = [1j * float(theta[a] - mu) * np.eye(d) for a, d in enumerate(rep.dims)]
    rhs = 0.5 * omega(orbit_action(rep, xi), rep.mats) + lie_pairing(xi, eta)
    return abs(lhs - rhs) / (1.0 + abs(lhs))


# -- flow --------------------------------------------------------------------------------


@dataclass
class FlowReport:
    initial: Representation
    final: Representation
    iterations: int
    history: list
    final_norm: float
    converged: bool
    status: str
    grad_norm: float
    group: tuple = field(repr=False, default=())

    @property
    def critical(self) -> bool:
        return self.status in ("critical", "stalled", "stagnant")

    def group_residual(self) -> float:
        """Relative mismatch between ``final`` and ``initial . group``."""
        moved = self.initial.act(self.group)
        diff = np.sqrt(sum(np.linalg.norm(a - b) ** 2 for a, b in zip(moved.mats, self.final.mats)))
        return float(diff / max(1.0, self.final.norm()))


def k_differential(rep: Representation, x: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Derivative of ``K_theta`` along ``rho . exp(s x)`` at ``s = 0`` (``x`` Hermitian)."""
    q = rep.quiver
    out = [np.zeros((d, d), dtype=complex) for d in rep.dims]
    for k, (rho, d_rho) in enumerate(zip(rep.mats, orbit_action(rep, x))):
        if rho.size == 0:
            continue
        s, t = q.src(k), q.dst(k)
        out[t] += d_rho @ rho.conj().T + rho @ d_rho.conj().T
        out[s] -= d_rho.conj().T @ rho + rho.conj().T @ d_rho
    return out


def _hermitian_basis(dims) -> list[list[np.ndarray]]:
    basis = []
    for a, d in enumerate(dims):
        for i in range(d):
            for j in range(i, d):
                for part in ((1.0,) if i == j else (1.0, 1j)):
                    h = [np.zeros((dd, dd), dtype=complex) for dd in dims]
                    h[a][i, j] = part
                    h[a][j, i] = np.conj(part)
                    basis.append(h)
    return basis


def _real_vec(mats) -> np.ndarray:
    v = np.concatenate([m.ravel() for m in mats] + [np.zeros(0)])
    return np.concatenate([v.real, v.imag])


def newton_direction(rep: Representation, y: Sequence[np.ndarray], rcond: float = 1e-10):
    """Least-squares solution ``x`` of ``dK(x) = -Y`` over Hermitian families.

    The minimum-norm solution has no component along the stabiliser, and
    ``<Y, dK(x)> = -||P Y||^2 <= 0`` for the projector ``P`` onto the range
    of ``dK``, so ``x`` is a descent direction for ``F``.
    """
    basis = _hermitian_basis(rep.dims)
    if not basis:
        return None
    jac = np.array([_real_vec(k_differential(rep, b)) for b in basis]).T
    coef, *_ = np.linalg.lstsq(jac, -_real_vec(y), rcond=rcond)
    x = [sum(c * b[a] for c, b in zip(coef, basis)) for a in range(rep.quiver.n_vertices)]
    return [0.5 * (m + m.conj().T) for m in x]


def _line_search(rho, theta, x, f0, slope0, s0, armijo, shrink, max_exponent):
    """Armijo backtracking with quadratic interpolation along ``rho . exp(s x)``."""
    eig = [np.linalg.eigh(m) for m in x]
    xmax = max(float(np.abs(w).max(initial=0.0)) for w, _ in eig)
    if xmax == 0.0 or not slope0 < 0:
        return None
    cap = max_exponent / xmax

    def trial_at(s):
        gs = [(u * np.exp(s * w)) @ u.conj().T for w, u in eig]
        trial = rho.act(gs)
        yt, nt = deviation(trial, theta)
        return gs, trial, yt, nt, 0.5 * nt**2

    s = min(s0, cap)
    cand = trial_at(s)
    while s * xmax > 1e-15:
        ft = cand[4]
        curv = ft - f0 - slope0 * s
        s_quad = -slope0 * s * s / (2.0 * curv) if curv > 0 else np.inf
        if ft <= f0 + armijo * s * slope0:
            if np.isfinite(s_quad) and s_quad < cap and abs(s_quad - s) > 0.1 * s:
                alt = trial_at(s_quad)
                if alt[4] < ft and alt[4] <= f0 + armijo * s_quad * slope0:
                    return s_quad, alt
            return s, cand
        s = float(np.clip(s_quad, 0.1 * s, shrink * s))
        cand = trial_at(s)
    return None


def kempf_ness_flow(
    rep: Representation,
    theta,
    eps: float = EPS_EH,
    max_iters: int = 10_000,
    step0: float = 1.0,
    armijo: float = 1e-4,
    shrink: float = 0.5,
    grad_tol: float = 1e-10,
    max_exponent: float = 10.0,
    stagnation: int = 50,
    method: str = "newton",
) -> FlowReport:
    """Monotone descent of ``F = 1/2 ||L_theta||^2`` along the G-orbit of ``rep``.

    ``method="gradient"`` moves along ``rho . exp(s Y)``, the gradient flow
    of ``F``.  ``method="newton"`` first tries the Gauss-Newton direction of
    :func:`newton_direction` (same orbit parametrisation, same Armijo
    safeguard) and falls back to the gradient step when it is rejected; this
    matters on non-closed orbits, where the gradient flow slows to
    ``||L|| ~ 1/t``.

    Terminates with status ``converged`` (``||L|| <= eps``), ``critical``
    (``||D_rho(Y)|| <= grad_tol * ||L||``, a critical point that is not a
    zero of the moment map), ``stagnant`` (after ``stagnation`` iterations
    ``||L||`` has not halved since iteration ``k // 2``: it is tending to a
    positive limit), ``stalled`` (line search collapsed) or ``budget``.
    Accepted steps never increase ``F``.
    """
    if method not in ("newton", "gradient"):
        raise ValueError(f"unknown flow method {method!r}")
    theta = as_weight(theta)
    rho = rep
    g = [np.eye(d, dtype=complex) for d in rep.dims]
    y, norm = deviation(rho, theta)
    history = [0.5 * norm**2]
    step = step0
    status = "budget"
    gnorm = float("nan")
    it = 0
    while True:
        if norm <= eps:
            status = "converged"
            break
        dy = orbit_action(rho, y)
        gsq = sum(np.vdot(m, m).real for m in dy)
        gnorm = float(np.sqrt(gsq))
        if gnorm <= grad_tol * norm:
            status = "critical"
            break
        if stagnation and it >= stagnation and norm >= 0.5 * np.sqrt(2.0 * history[it // 2]):
            status = "stagnant"
            break
        if it >= max_iters:
            status = "budget"
            break
        f0 = history[-1]
        found = None
        if method == "newton":
            x = newton_direction(rho, y)
            if x is not None:
                slope0 = float(sum(np.vdot(a, b).real for a, b in zip(y, k_differential(rho, x))))
                found = _line_search(rho, theta, x, f0, slope0, 1.0, armijo, shrink, max_exponent)
        if found is None:
            found = _line_search(rho, theta, y, f0, -2.0 * gsq, step, armijo, shrink, max_exponent)
            if found is not None:
                step = 2.0 * found[0]
        if found is None:
            status = "stalled"
            break
        gs, trial, yt, nt, ft = found[1]
        rho, y, norm = trial, yt, nt
        with np.errstate(over="ignore", invalid="ignore"):
            # g diverges on unstable orbits; only the representation itself matters there
            g = [a @ b for a, b in zip(g, gs)]
        history.append(ft)
        it += 1
    return FlowReport(
        initial=rep,
        final=rho,
        iterations=it,
        history=history,
        final_norm=norm,
        converged=status == "converged",
        status=status,
        grad_norm=gnorm if status != "converged" else 0.0,
        group=tuple(g),
    )


def gradient_norm(rep: Representation, theta) -> float:
    y, _ = deviation(rep, theta)
    return float(np.sqrt(sum(np.linalg.norm(m) ** 2 for m in orbit_action(rep, y))))


# -- limits and decompositions -----------------------------------------------------------


def _split_hermitian(rep: Representation, algebra: list, rng, cluster_tol: float) -> list[tuple]:
    """Split the vertex spaces along eigenspaces of a random Hermitian element of ``algebra``.

    ``algebra`` is a list of per-vertex matrix tuples spanning a *-closed
    subalgebra of End(V).  Returns per-cluster tuples of orthonormal bases.
    """
    n_v = rep.quiver.n_vertices
    coef = rng.standard_normal(len(algebra)) + 1j * rng.standard_normal(len(algebra))
    x = [sum(c * el[a] for c, el in zip(coef, algebra)) for a in range(n_v)]
    x = [m + m.conj().T for m in x]
    scale = max([1.0] + [float(np.abs(m).max(initial=0.0)) for m in x])
    values, owners = [], []
    vecs = []
    for a, m in enumerate(x):
        if m.shape[0] == 0:
            continue
        w, u = np.linalg.eigh(m / scale)
        for j in range(len(w)):
            values.append(w[j])
            owners.append(a)
            vecs.append(u[:, j])
    if not values:
        return []
    values = np.array(values)
    spread = float(values.max() - values.min())
    groups = linalg.cluster_values(values, cluster_tol * (1.0 + spread))
    out = []
    for grp in groups:
        bases = []
        for a in range(n_v):
            cols = [vecs[i] for i in grp if owners[i] == a]
            d = rep.dims[a]
            bases.append(np.array(cols).T.reshape(d, len(cols)) if cols else np.zeros((d, 0), dtype=complex))
        out.append(tuple(bases))
    return out


def block_diagonal_part(rep: Representation, clusters: list[tuple]) -> Representation:
    """Keep only the diagonal blocks of every arrow matrix w.r.t. the cluster decomposition."""
    q = rep.quiver
    mats = []
    for k, rho in enumerate(rep.mats):
        s, t = q.src(k), q.dst(k)
        acc = np.zeros_like(rho)
        for c in clusters:
            pt = c[t] @ c[t].conj().T
            ps = c[s] @ c[s].conj().T
            acc += pt @ rho @ ps
        mats.append(acc)
    return Representation(q, rep.dims, mats)


@dataclass
class FlowLimit:
    """The Einstein-Hermitian limit realised by a flow, with off-diagonal drift removed."""

    limit: Representation
    polished: Representation
    final_norm: float
    stabilizer_dim: int
    summands: list


def flow_limit(
    rep: Representation,
    theta,
    polish_eps: float = 1e-13,
    polish_iters: int = 4000,
    vanish_ratio: float = 1e3,
    cluster_tol: float = 1e-4,
    seed: int = 0,
) -> FlowLimit:
    """Identify the polystable limit of the flow started (near convergence) at ``rep``.

    The flow is continued to ``polish_eps``.  Singular values ``s`` of the
    orbit operator with ``s^2 <= vanish_ratio * ||L||`` belong to the
    stabiliser of the limit point: on a polystable orbit ``||L||`` converges
    to zero much faster than such ``s`` shrink, while on a non-closed orbit
    they vanish like ``sqrt(||L||)``.  The limit is then obtained by
    splitting along a random Hermitian element of that near-stabiliser and
    discarding off-diagonal blocks.
    """
    theta = as_weight(theta)
    polished = kempf_ness_flow(rep, theta, eps=polish_eps, max_iters=polish_iters)
    p = polished.final
    lnorm = polished.final_norm
    dmat = orbit_matrix(p)
    n = dmat.shape[1]
    if dmat.shape[0] == 0:
        s, vh = np.zeros(0), np.eye(n, dtype=complex)
    else:
        _, s, vh = np.linalg.svd(dmat, full_matrices=True)
    cut = vanish_ratio * lnorm + linalg.rank_threshold(s, dmat.shape) ** 2
    keep = int(np.sum(s**2 > cut))
    near = vh[keep:].conj().T
    algebra = [_unflatten(near[:, j], p.dims, p.dims) for j in range(near.shape[1])]
    rng = np.random.default_rng(seed)
    clusters = _split_hermitian(p, algebra, rng, cluster_tol) if algebra else []
    limit = block_diagonal_part(p, clusters) if len(clusters) > 1 else p
    if len(clusters) > 1:
        limit = kempf_ness_flow(limit, theta, eps=polish_eps, max_iters=200).final
    return FlowLimit(limit, p, lnorm, n - keep, clusters)


def eh_orthogonal_decomposition(
    rep: Representation, theta, eps: float = 1e-6, seed: int = 0, cluster_tol: float = 1e-6
) -> list[SubrepWitness]:
    """Split an Einstein-Hermitian representation into pairwise orthogonal stable summands."""
    theta = as_weight(theta)
    if moment_map_L(rep, theta)[1] > eps:
        raise NotEinsteinHermitian("input is not Einstein-Hermitian for theta")
    rng = np.random.default_rng(seed)
    return _decompose(rep, SubrepWitness.full(rep), theta, rng, cluster_tol, depth=0)


def _decompose(parent, w: SubrepWitness, theta, rng, cluster_tol, depth) -> list[SubrepWitness]:
    sub, _ = subquotient(parent, w)
    if sub.rank == 0:
        return []
    end = hom_basis(sub, sub)
    if len(end) <= 1 or depth > 16:
        return [w]
    clusters = _split_hermitian(sub, [f.maps for f in end], rng, cluster_tol)
    if len(clusters) <= 1:
        return [w]
    out = []
    for c in clusters:
        bases = [w.bases[a] @ c[a] for a in range(len(c))]
        out.extend(_decompose(parent, SubrepWitness(parent, bases), theta, rng, cluster_tol, depth + 1))
    return out


def gram_residual(summands: Sequence[SubrepWitness]) -> float:
    """Largest cross inner product between bases of distinct summands."""
    worst = 0.0
    for i in range(len(summands)):
        for j in range(i + 1, len(summands)):
            for a, b in zip(summands[i].bases, summands[j].bases):
                if a.size and b.size:
                    worst = max(worst, float(np.abs(a.conj().T @ b).max()))
    return worst


def summand_representations(rep: Representation, summands: Sequence[SubrepWitness]) -> list[Representation]:
    return [subquotient(rep, w)[0] for w in summands]


@dataclass
class UniquenessReport:
    scale: float
    residual: float
    unitary_part: tuple
    passed: bool


def eh_uniqueness_check(
    rho: Representation,
    sigma: Representation,
    theta,
    g: Sequence[np.ndarray] | None = None,
    eps: float = 1e-6,
    tol: float = 1e-6,
    seed: int = 0,
) -> UniquenessReport:
    """Check that the group element connecting two EH Schur points lies in ``H K``.

    If ``g`` is not supplied it is read off from an isomorphism ``rho -> sigma``
    (``sigma = rho . f^{-1}``).
    """
    theta = as_weight(theta)
    for r in (rho, sigma):
        if moment_map_L(r, theta)[1] > eps:
            raise NotEinsteinHermitian("both inputs must be Einstein-Hermitian")
        if dim_end(r) != 1:
            raise NotSchur("both inputs must be Schur")
    if g is None:
        iso = is_isomorphic(rho, sigma, seed=seed)
        if not iso:
            raise NotIsomorphic("inputs are not isomorphic")
        g = [np.linalg.inv(f) for f in iso.witness.maps]
    elif not rho.act(g).allclose(sigma, atol=1e-8 * max(1.0, sigma.norm())):
        raise NotIsomorphic("rho . g does not reproduce sigma")
    grams = [m.conj().T @ m for m in g if m.size]
    c2 = float(np.mean([np.trace(m).real / m.shape[0] for m in grams]))
    resid = max(float(np.linalg.norm(m - c2 * np.eye(m.shape[0]))) for m in grams) / c2
    c = float(np.sqrt(c2))
    k = tuple(m / c for m in g)
    return UniquenessReport(c, resid, k, resid <= tol)


def skew_endomorphism_nullity(rep: Representation, tol: float = 1e-9) -> int:
    """Real dimension of the skew-Hermitian endomorphisms of ``rep``.

    Solved as a real linear system: ``xi_a = i H_a`` with ``H_a`` Hermitian.
    """
    basis = []
    for a, d in enumerate(rep.dims):
        for i in range(d):
            for j in range(i, d):
                for part in ((1.0,) if i == j else (1.0, 1j)):
                    h = [np.zeros((dd, dd), dtype=complex) for dd in rep.dims]
                    h[a][i, j] = part
                    h[a][j, i] = np.conj(part)
                    basis.append([1j * m for m in h])
    if not basis:
        return 0
    cols = []
    for xi in basis:
        v = np.concatenate([m.ravel() for m in orbit_action(rep, xi)] + [np.zeros(0)])
        cols.append(np.concatenate([v.real, v.imag]))
    a = np.array(cols).T
    if a.shape[0] == 0:
        return a.shape[1]
    s = np.linalg.svd(a, compute_uv=False)
    return a.shape[1] - int(np.sum(s > tol * max(1.0, s[0])))


def direct_sum_of_summands(rep: Representation, summands: Sequence[SubrepWitness]) -> Representation:
    return direct_sum(summand_representations(rep, summands), quiver=rep.quiver)
