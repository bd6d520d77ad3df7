"""Search for (destabilising) subrepresentations.

Three passes, cheapest first:

1. coordinate subspaces ``e_a in {0, d_a}`` closed under the arrows;
2. kernels and images of powers of ``f - lambda id`` for endomorphisms ``f``;
3. multi-start projected gradient descent of the invariance residual over
   a product of Grassmannians, retracting by thin QR.

Between passes 2 and 3 every remaining dimension vector ``e`` is bracketed
exactly: any subrepresentation of dimension ``e`` contains the one generated
by the vertices with ``e_a = d_a`` and lies inside the largest one supported
where ``e_a > 0``.  Iterating the bracket settles many ``e`` outright, and
what is left is searched inside the bracket's subquotient.

Passes 1-2 and the bracket are exact up to the rank threshold; pass 3 is
evidence only.  A subdimension vector counts as *covered* when an exact step
decided it (found a witness or ruled it out).
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .quiver import Representation, SubrepWitness, hom_basis
from .weight import as_weight


@dataclass
class SearchOptions:
    tol: float = 1e-8
    starts: int = 32
    iters: int = 500
    seed: int = 0
    heuristic: bool = True
    threads: int | None = None


@dataclass
class SearchResult:
    witness: SubrepWitness | None
    exhaustive: bool
    method: str | None = None
    candidates_checked: int = 0
    notes: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.witness is not None


def _threads(opts: SearchOptions) -> int:
    if opts.threads is not None:
        return max(1, opts.threads)
    try:
        return max(1, int(os.environ.get("QMOD_THREADS", "1")))
    except ValueError:
        return 1


def subdimension_vectors(d) -> list[tuple]:
    """All ``0 < e < d`` (proper, non-zero), lexicographic."""
    out = []
    for e in itertools.product(*(range(x + 1) for x in d)):
        if sum(e) == 0 or tuple(e) == tuple(d):
            continue
        out.append(tuple(e))
    return out


def is_coordinate_type(e, d) -> bool:
    return all(x in (0, y) for x, y in zip(e, d))


def _accept(w: SubrepWitness, tol: float) -> bool:
    return w.relative_residual() <= tol


def structural_candidates(m: Representation, tol: float = 1e-8) -> list[SubrepWitness]:
    """Pass 1: invariant coordinate subspaces (subsets of the support closed under arrows)."""
    support = [a for a, d in enumerate(m.dims) if d > 0]
    out = []
    for r in range(1, len(support) + 1):
        for subset in itertools.combinations(support, r):
            w = SubrepWitness.coordinate(m, subset)
            if w.subdim == m.dims:
                continue
            if _accept(w, tol):
                out.append(w)
    return out


def endomorphism_candidates(m: Representation, tol: float = 1e-8, seed: int = 0) -> list[SubrepWitness]:
    """Pass 2: kernels/images of powers of ``f - lambda`` for endomorphisms ``f`` of ``m``."""
    basis = hom_basis(m, m)
    if len(basis) <= 1:
        return []
    rng = np.random.default_rng(seed)
    n_v = m.quiver.n_vertices
    gens = [f.maps for f in basis]
    coef = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    gens.append(tuple(sum(c * f.maps[a] for c, f in zip(coef, basis)) for a in range(n_v)))
    found: list[SubrepWitness] = []
    for f in gens:
        fnorm = max([1.0] + [float(np.linalg.norm(x)) for x in f])
        eig = np.concatenate([np.linalg.eigvals(x) for x in f if x.size] + [np.zeros(0)])
        lams = []
        for lam in eig:
            if all(abs(lam - l0) > 1e-6 * fnorm for l0 in lams):
                lams.append(lam)
        for lam in lams:
            g = [x - lam * np.eye(x.shape[0]) for x in f]
            power = list(g)
            for _ in range(max(m.dims)):
                kt = 1e-7 * fnorm
                ker = [linalg.null_space(p, kt) if p.size else np.zeros((p.shape[1], p.shape[1])) for p in power]
                img = [linalg.orth(p, kt) if p.size else np.zeros((p.shape[0], 0)) for p in power]
                for bases in (ker, img):
                    bases = [np.asarray(b, dtype=complex).reshape(d, -1) if d else np.zeros((0, 0)) for b, d in zip(bases, m.dims)]
                    w = SubrepWitness(m, bases, orthonormalize=False)
                    if w.rank == 0 or w.subdim == m.dims:
                        continue
                    if not _accept(w, tol):
                        continue
                    if not any(w.same_span(o, 1e-6) for o in found):
                        found.append(w)
                power = [p @ x for p, x in zip(power, g)]
    return found


# -- exact bracketing -------------------------------------------------------------------


def _rank_tol(m: Representation, tol: float) -> float:
    return tol * m.scale()


def largest_subrep_within(m: Representation, caps, tol: float = 1e-8) -> list[np.ndarray]:
    """Largest subrepresentation with ``W_a`` inside ``span(caps[a])`` (greatest fixed point)."""
    q = m.quiver
    ws = [linalg.orth(np.asarray(c, dtype=complex).reshape(d, -1)) if d else np.zeros((0, 0), dtype=complex) for c, d in zip(caps, m.dims)]
    rt = _rank_tol(m, tol)
    changed = True
    while changed:
        changed = False
        for k, rho in enumerate(m.mats):
            s, t = q.src(k), q.dst(k)
            ws_, wt = ws[s], ws[t]
            if ws_.shape[1] == 0 or rho.shape[0] == 0:
                continue
            img = rho @ ws_
            r = img - wt @ (wt.conj().T @ img)
            ker = linalg.null_space(r, rt)
            if ker.shape[1] < ws_.shape[1]:
                ws[s] = linalg.orth(ws_ @ ker) if ker.shape[1] else np.zeros((ws_.shape[0], 0), dtype=complex)
                changed = True
    return ws


def generated_subrep(m: Representation, gens, tol: float = 1e-8) -> list[np.ndarray]:
    """Smallest subrepresentation containing ``span(gens[a])`` (least fixed point)."""
    q = m.quiver
    ws = [linalg.orth(np.asarray(g, dtype=complex).reshape(d, -1)) if d else np.zeros((0, 0), dtype=complex) for g, d in zip(gens, m.dims)]
    rt = _rank_tol(m, tol)
    changed = True
    while changed:
        changed = False
        for k, rho in enumerate(m.mats):
            s, t = q.src(k), q.dst(k)
            if ws[s].shape[1] == 0 or rho.shape[0] == 0:
                continue
            new = linalg.orth(np.hstack([ws[t], rho @ ws[s]]), rt)
            if new.shape[1] > ws[t].shape[1]:
                ws[t] = new
                changed = True
    return ws


def _dims(ws) -> tuple:
    return tuple(w.shape[1] for w in ws)


def bracket(m: Representation, e, tol: float = 1e-8):
    """Exact bracket ``L <= W <= U`` for any subrepresentation ``W`` of dimension ``e``.

    Returns ``("none", None)`` when no such ``W`` exists, ``("found", w)``
    with a witness when the bracket pins ``W`` down, else ``("open", (L, U))``.
    """
    e = tuple(e)
    d = m.dims
    eye = [np.eye(x, dtype=complex) for x in d]
    empty = [np.zeros((x, 0), dtype=complex) for x in d]
    upper = largest_subrep_within(m, [eye[a] if e[a] > 0 else empty[a] for a in range(len(d))], tol)
    lower = generated_subrep(m, [eye[a] if e[a] == d[a] else empty[a] for a in range(len(d))], tol)
    while True:
        lo, up = _dims(lower), _dims(upper)
        if any(x < y for x, y in zip(e, lo)) or any(x > y for x, y in zip(e, up)):
            return "none", None
        if up == e:
            return "found", SubrepWitness(m, upper, orthonormalize=False)
        if lo == e:
            return "found", SubrepWitness(m, lower, orthonormalize=False)
        new_lower = generated_subrep(m, [upper[a] if e[a] == up[a] else lower[a] for a in range(len(d))], tol)
        new_upper = largest_subrep_within(m, [lower[a] if e[a] == lo[a] else upper[a] for a in range(len(d))], tol)
        if _dims(new_lower) == lo and _dims(new_upper) == up:
            return "open", (lower, upper)
        lower, upper = new_lower, new_upper


def _search_in_bracket(m: Representation, e, lower, upper, tol: float, seed: int):
    """Run the endomorphism pass on ``U / L`` and lift a witness of dimension ``e``."""
    from .quiver import subquotient

    uw = SubrepWitness(m, upper, orthonormalize=False)
    sub_u, _ = subquotient(m, uw, tol=np.inf)
    l_in_u = SubrepWitness(sub_u, [u.conj().T @ l for u, l in zip(upper, lower)])
    _, quot = subquotient(sub_u, l_in_u, tol=np.inf)
    comp = l_in_u.complement_bases()
    target = tuple(x - y for x, y in zip(e, _dims(lower)))
    for w in structural_candidates(quot, tol) + endomorphism_candidates(quot, tol, seed):
        if w.subdim != target:
            continue
        bases = [np.hstack([l, u @ c @ b]) for l, u, c, b in zip(lower, upper, comp, w.bases)]
        lifted = SubrepWitness(m, bases)
        if lifted.subdim == e and _accept(lifted, tol):
            return lifted
    return None


# -- pass 3: Grassmannian search ---------------------------------------------------------


def _random_stiefel(d, e, rng):
    if e == 0:
        return np.zeros((d, 0), dtype=complex)
    z = rng.standard_normal((d, e)) + 1j * rng.standard_normal((d, e))
    q, _ = np.linalg.qr(z)
    return q


def _objective(mats, src, dst, ws):
    total = 0.0
    for rho, s, t in zip(mats, src, dst):
        if ws[s].shape[1] == 0 or rho.shape[0] == 0:
            continue
        img = rho @ ws[s]
        r = img - ws[t] @ (ws[t].conj().T @ img)
        total += float(np.vdot(r, r).real)
    return total


def _gradient(mats, src, dst, ws):
    grads = [np.zeros_like(w) for w in ws]
    for rho, s, t in zip(mats, src, dst):
        if ws[s].shape[1] == 0 or rho.shape[0] == 0:
            continue
        img = rho @ ws[s]
        r = img - ws[t] @ (ws[t].conj().T @ img)
        grads[s] += 2.0 * rho.conj().T @ r
        if ws[t].shape[1]:
            grads[t] -= 2.0 * img @ (img.conj().T @ ws[t])
    # Riemannian gradient: horizontal projection
    return [g - w @ (w.conj().T @ g) for g, w in zip(grads, ws)]


def _retract(ws, dirs, step):
    out = []
    for w, d in zip(ws, dirs):
        if w.shape[1] == 0 or w.shape[1] == w.shape[0]:
            out.append(w)
            continue
        q, r = np.linalg.qr(w - step * d)
        out.append(q * np.sign(np.diag(r)).conj())
    return out


def grassmann_descent(m: Representation, e, rng, iters: int = 500, target: float = 0.0):
    """One start of projected gradient descent; returns ``(bases, objective)``."""
    q = m.quiver
    src = [q.src(k) for k in range(q.n_arrows)]
    dst = [q.dst(k) for k in range(q.n_arrows)]
    mats = [x / m.scale() for x in m.mats]
    ws = []
    for a, (d, ea) in enumerate(zip(m.dims, e)):
        ws.append(np.eye(d, dtype=complex) if ea == d else _random_stiefel(d, ea, rng))
    f = _objective(mats, src, dst, ws)
    step = 1.0
    prev_w, prev_g = None, None
    for _ in range(iters):
        if f <= target:
            break
        g = _gradient(mats, src, dst, ws)
        gsq = sum(float(np.vdot(x, x).real) for x in g)
        if gsq < 1e-30:
            break
        if prev_g is not None:
            # Barzilai-Borwein step on the ambient differences
            sdiff = sum(float(np.vdot(a - b, a - b).real) for a, b in zip(ws, prev_w))
            ydot = sum(float(np.vdot(a - b, x - y).real) for a, b, x, y in zip(ws, prev_w, g, prev_g))
            if ydot > 0:
                step = min(max(sdiff / ydot, 1e-6), 1e3)
        while True:
            trial = _retract(ws, g, step)
            ft = _objective(mats, src, dst, trial)
            if ft <= f - 1e-4 * step * gsq or step < 1e-12:
                break
            step *= 0.5
        prev_w, prev_g = ws, g
        ws, f = trial, ft
    return ws, f


def grassmann_search(m: Representation, e, opts: SearchOptions) -> SubrepWitness | None:
    """Multi-start heuristic search for a subrepresentation of dimension ``e``."""
    seq = np.random.SeedSequence([opts.seed, *e])
    seeds = seq.spawn(opts.starts)
    target = (opts.tol * 1e-2) ** 2

    def run(child):
        rng = np.random.default_rng(child)
        return grassmann_descent(m, e, rng, opts.iters, target)

    n_threads = _threads(opts)
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = []
        for child in seeds:
            results.append(run(child))
            if results[-1][1] <= target:
                break
    # scheduling-independent reduction: the first start (by index) that reached the
    # target, which is also where the sequential loop stops; else the best objective
    hits = [i for i, r in enumerate(results) if r[1] <= target]
    best = hits[0] if hits else min(range(len(results)), key=lambda i: (results[i][1], i))
    w = SubrepWitness(m, results[best][0])
    return w if w.subdim == tuple(e) and _accept(w, opts.tol) else None


# -- driver ------------------------------------------------------------------------------


def _priority(e, theta):
    return (-theta.slope(e), -sum(e), tuple(e))


def find_subrep(
    m: Representation,
    theta,
    predicate,
    opts: SearchOptions | None = None,
    order: str = "slope",
) -> SearchResult:
    """Best proper non-zero subrepresentation whose dimension vector satisfies ``predicate``.

    ``order="slope"`` ranks candidates by (slope desc, rank desc, lex);
    ``order="rank"`` by (rank asc, lex).
    """
    opts = opts or SearchOptions()
    theta = as_weight(theta)
    exact = structural_candidates(m, opts.tol) + endomorphism_candidates(m, opts.tol, opts.seed)
    by_dim: dict[tuple, SubrepWitness] = {}
    for w in exact:
        if predicate(w.subdim):
            cur = by_dim.get(w.subdim)
            if cur is None or w.relative_residual() < cur.relative_residual():
                by_dim[w.subdim] = w
    cands = [e for e in subdimension_vectors(m.dims) if predicate(e)]
    if order == "slope":
        cands.sort(key=lambda e: _priority(e, theta))
    else:
        cands.sort(key=lambda e: (sum(e), e))
    exhaustive = True
    checked = 0
    for e in cands:
        checked += 1
        if e in by_dim:
            return SearchResult(by_dim[e], exhaustive, "structural" if is_coordinate_type(e, m.dims) else "endomorphism", checked)
        if is_coordinate_type(e, m.dims):
            continue
        kind, info = bracket(m, e, opts.tol)
        if kind == "none":
            continue
        if kind == "found" and _accept(info, opts.tol):
            return SearchResult(info, exhaustive, "bracket", checked)
        if kind == "open":
            w = _search_in_bracket(m, e, *info, opts.tol, opts.seed)
            if w is not None:
                return SearchResult(w, exhaustive, "bracket", checked)
        if not opts.heuristic:
            exhaustive = False
            continue
        w = grassmann_search(m, e, opts)
        if w is not None:
            return SearchResult(w, exhaustive, "heuristic", checked)
        exhaustive = False
    return SearchResult(None, exhaustive, None, checked)


def find_destabilizing_subrep(
    m: Representation, theta, opts: SearchOptions | None = None, equality: bool = False
) -> SearchResult:
    """Maximal-slope (then maximal-rank) subrepresentation with slope above ``mu(M)``.

    With ``equality=True`` subrepresentations of slope equal to ``mu(M)``
    also qualify (semistable-equality witnesses).
    """
    theta = as_weight(theta)
    mu = theta.slope(m.dims)
    if equality:
        pred = lambda e: theta.slope(e) >= mu  # noqa: E731
    else:
        pred = lambda e: theta.slope(e) > mu  # noqa: E731
    return find_subrep(m, theta, pred, opts, order="slope")


def slope_of(w: SubrepWitness, theta) -> Fraction:
    return as_weight(theta).slope(w.subdim)
