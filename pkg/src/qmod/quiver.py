"""Quivers, complex representations, morphism spaces and subrepresentations.

Conventions
-----------
* A representation stores one dense complex matrix per arrow, of shape
  ``(d[t(alpha)], d[s(alpha)])``.
* The group ``G = prod GL(d_a)`` acts on the right:
  ``(rho . g)_alpha = g[t]^{-1} rho_alpha g[s]``.
* Per-vertex matrices are flattened row-major when a linear map on
  ``prod Hom(V_a, W_a)`` has to be materialised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import linalg
from .errors import (
    DanglingArrow,
    DuplicateId,
    EmptyQuiver,
    QuiverMismatch,
    ResidualTooLarge,
    ShapeMismatch,
)


@dataclass(frozen=True)
class Arrow:
    id: Hashable
    src: Hashable
    dst: Hashable


@dataclass(frozen=True)
class Quiver:
    vertices: tuple
    arrows: tuple[Arrow, ...] = ()
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.vertices) == 0:
            raise EmptyQuiver("a quiver needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise DuplicateId("duplicate vertex id")
        ids = [a.id for a in self.arrows]
        if len(set(ids)) != len(ids):
            raise DuplicateId("duplicate arrow id")
        index = {v: i for i, v in enumerate(self.vertices)}
        for a in self.arrows:
            if a.src not in index or a.dst not in index:
                raise DanglingArrow(f"arrow {a.id!r} has an undeclared endpoint")
        object.__setattr__(self, "_index", index)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    def index(self, vertex) -> int:
        return self._index[vertex]

    def src(self, k: int) -> int:
        return self._index[self.arrows[k].src]

    def dst(self, k: int) -> int:
        return self._index[self.arrows[k].dst]

    def arrow_index(self, arrow_id) -> int:
        for k, a in enumerate(self.arrows):
            if a.id == arrow_id:
                return k
        raise KeyError(arrow_id)


def build_quiver(data: Mapping) -> Quiver:
    """Build a validated :class:`Quiver` from ``{"vertices": [...], "arrows": [...]}``.

    Arrows may be given as mappings with ``id``/``src``/``dst`` keys or as
    ``(id, src, dst)`` triples.
    """
    vertices = tuple(data.get("vertices", ()))
    arrows = []
    for item in data.get("arrows", ()):
        if isinstance(item, Mapping):
            arrows.append(Arrow(item["id"], item["src"], item["dst"]))
        else:
            aid, s, t = item
            arrows.append(Arrow(aid, s, t))
    return Quiver(vertices, tuple(arrows))


def kronecker_quiver(n: int = 2) -> Quiver:
    """The ``n``-Kronecker quiver ``1 => 2`` (arrows named a, b, c, ...)."""
    names = "abcdefghijklmnopqrstuvwxyz"
    return Quiver((1, 2), tuple(Arrow(names[i], 1, 2) for i in range(n)))


def loop_quiver(n_loops: int = 1) -> Quiver:
    return Quiver((1,), tuple(Arrow(f"l{i}", 1, 1) for i in range(n_loops)))


class Representation:
    """A finite-dimensional complex representation of a quiver."""

    def __init__(self, quiver: Quiver, dims, mats=None):
        self.quiver = quiver
        if isinstance(dims, Mapping):
            dims = [dims.get(v, 0) for v in quiver.vertices]
        dims = tuple(int(x) for x in dims)
        if len(dims) != quiver.n_vertices:
            raise ShapeMismatch("dimension vector length differs from vertex count")
        if any(x < 0 for x in dims):
            raise ShapeMismatch("dimensions must be non-negative")
        self.dims = dims
        if mats is None:
            mats = {}
        if isinstance(mats, Mapping):
            mats = [mats.get(a.id) for a in quiver.arrows]
        if len(mats) != quiver.n_arrows:
            raise ShapeMismatch("one matrix per arrow is required")
        out = []
        for k, m in enumerate(mats):
            shape = (dims[quiver.dst(k)], dims[quiver.src(k)])
            if m is None:
                m = np.zeros(shape, dtype=complex)
            m = np.array(m, dtype=complex)
            if m.size == 0:
                m = m.reshape(shape)
            if m.shape != shape:
                raise ShapeMismatch(
                    f"arrow {quiver.arrows[k].id!r}: expected shape {shape}, got {m.shape}"
                )
            out.append(m)
        self.mats = tuple(out)

    @property
    def rank(self) -> int:
        return sum(self.dims)

    def is_zero(self) -> bool:
        return self.rank == 0

    def norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(m, m).real for m in self.mats)))

    def scale(self) -> float:
        """Largest arrow norm, floored at 1; used to make residual tests relative."""
        return max([1.0] + [float(np.linalg.norm(m)) for m in self.mats])

    def scaled(self, c: complex) -> "Representation":
        return Representation(self.quiver, self.dims, [c * m for m in self.mats])

    def act(self, g: Sequence[np.ndarray]) -> "Representation":
        """Right action ``rho . g`` of a per-vertex family of invertible matrices."""
        q = self.quiver
        mats = [
            np.linalg.solve(g[q.dst(k)], m @ g[q.src(k)]) if m.size else m
            for k, m in enumerate(self.mats)
        ]
        return Representation(q, self.dims, mats)

    def allclose(self, other: "Representation", atol: float = 1e-10) -> bool:
        return self.dims == other.dims and all(
            np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.mats, other.mats)
        )

    def __repr__(self) -> str:
        return f"Representation(dims={self.dims})"


def zero_representation(quiver: Quiver, dims) -> Representation:
    return Representation(quiver, dims)


def _same_quiver(*reps: Representation) -> Quiver:
    q = reps[0].quiver
    for r in reps[1:]:
        if r.quiver != q:
            raise QuiverMismatch("representations live on different quivers")
    return q


@dataclass
class Morphism:
    """Per-vertex linear maps ``f_a : V_a -> W_a`` (shape ``e_a x d_a``)."""

    domain: Representation
    codomain: Representation
    maps: tuple

    def residual(self) -> float:
        q = self.domain.quiver
        worst = 0.0
        for k in range(q.n_arrows):
            s, t = q.src(k), q.dst(k)
            r = self.maps[t] @ self.domain.mats[k] - self.codomain.mats[k] @ self.maps[s]
            if r.size:
                worst = max(worst, float(np.linalg.norm(r)))
        return worst

    def condition(self) -> float:
        """Condition number over all vertices together (inf if singular or non-square).

        Singular values are compared globally, so a block that is pure
        rounding noise next to a large block counts as singular.
        """
        svals = []
        for f in self.maps:
            if f.shape[0] != f.shape[1]:
                return float("inf")
            if f.size:
                svals.append(np.linalg.svd(f, compute_uv=False))
        if not svals:
            return 1.0
        s = np.concatenate(svals)
        top = float(s.max())
        if top == 0.0 or float(s.min()) <= 10.0 * max(f.shape[0] for f in self.maps) * linalg.EPS * top:
            return float("inf")
        return top / float(s.min())

    def inverse(self) -> "Morphism":
        return Morphism(self.codomain, self.domain, tuple(np.linalg.inv(f) if f.size else f for f in self.maps))

    @classmethod
    def identity(cls, rep: Representation) -> "Morphism":
        return cls(rep, rep, tuple(np.eye(d, dtype=complex) for d in rep.dims))


def hom_constraint_matrix(m: Representation, n: Representation) -> np.ndarray:
    """Matrix of ``f -> (f_t rho_alpha - sigma_alpha f_s)_alpha`` on row-major ``vec(f)``."""
    q = _same_quiver(m, n)
    d, e = m.dims, n.dims
    offsets = np.cumsum([0] + [e[a] * d[a] for a in range(q.n_vertices)])
    rows = []
    for k in range(q.n_arrows):
        s, t = q.src(k), q.dst(k)
        block = np.zeros((e[t] * d[s], offsets[-1]), dtype=complex)
        block[:, offsets[t]:offsets[t + 1]] += np.kron(np.eye(e[t]), m.mats[k].T)
        block[:, offsets[s]:offsets[s + 1]] -= np.kron(n.mats[k], np.eye(d[s]))
        rows.append(block)
    if not rows:
        return np.zeros((0, offsets[-1]), dtype=complex)
    return np.vstack(rows)


def _unflatten(vec: np.ndarray, d, e) -> tuple:
    out, pos = [], 0
    for da, ea in zip(d, e):
        out.append(vec[pos:pos + ea * da].reshape(ea, da))
        pos += ea * da
    return tuple(out)


def _hom_tol(c: np.ndarray, m: Representation, n: Representation) -> float:
    # relative to the arrow norms too: commuting data gives a constraint matrix of pure rounding noise
    ref = max([0.0] + [float(np.linalg.norm(x)) for x in m.mats + n.mats])
    s0 = float(np.linalg.norm(c, 2)) if c.size else 0.0
    return 10.0 * max(c.shape) * linalg.EPS * max(s0, ref)


def hom_basis(m: Representation, n: Representation, tol: float | None = None) -> list[Morphism]:
    """Basis of ``Hom(M, N)`` as the numerical kernel of the intertwining map."""
    c = hom_constraint_matrix(m, n)
    ker = linalg.null_space(c, _hom_tol(c, m, n) if tol is None else tol)
    return [Morphism(m, n, _unflatten(ker[:, j], m.dims, n.dims)) for j in range(ker.shape[1])]


def dim_hom(m: Representation, n: Representation, tol: float | None = None) -> int:
    c = hom_constraint_matrix(m, n)
    return c.shape[1] - linalg.numerical_rank(c, _hom_tol(c, m, n) if tol is None else tol)


def dim_end(m: Representation, tol: float | None = None) -> int:
    return dim_hom(m, m, tol)


@dataclass
class IsoResult:
    isomorphic: bool
    witness: Morphism | None = None
    condition: float | None = None
    trials: int = 0
    inconclusive: bool = False

    def __bool__(self) -> bool:
        return self.isomorphic


def is_isomorphic(
    m: Representation,
    n: Representation,
    trials: int = 8,
    seed: int = 0,
    tol: float | None = None,
    max_condition: float = 1e10,
) -> IsoResult:
    """Probabilistic isomorphism test via random elements of ``Hom(M, N)``.

    A negative answer with a non-zero Hom space is marked ``inconclusive``
    ("probably not isomorphic"): generic combinations of a Hom basis are
    invertible whenever any element is.
    """
    _same_quiver(m, n)
    if m.dims != n.dims:
        return IsoResult(False)
    if m.rank == 0:
        return IsoResult(True, Morphism.identity(m), 1.0)
    basis = hom_basis(m, n, tol)
    if not basis:
        return IsoResult(False)
    # necessary: isomorphic objects have matching Hom dimensions
    de = dim_end(m, tol)
    if not (len(basis) == de == dim_end(n, tol) == dim_hom(n, m, tol)):
        return IsoResult(False)
    rng = np.random.default_rng(seed)
    best = None
    for trial in range(1, trials + 1):
        coef = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        maps = tuple(
            sum(c * f.maps[a] for c, f in zip(coef, basis)) for a in range(m.quiver.n_vertices)
        )
        f = Morphism(m, n, maps)
        cond = f.condition()
        if best is None or cond < best[1]:
            best = (f, cond)
        if cond <= max_condition:
            return IsoResult(True, f, cond, trial)
    if len(basis) == dim_hom(n, m, tol):
        return IsoResult(False, None, best[1], trials, inconclusive=True)
    return IsoResult(False, None, best[1], trials)


def direct_sum(reps: Iterable[Representation], quiver: Quiver | None = None) -> Representation:
    reps = list(reps)
    if not reps:
        if quiver is None:
            raise ValueError("an empty direct sum needs an explicit quiver")
        return zero_representation(quiver, [0] * quiver.n_vertices)
    q = _same_quiver(*reps)
    if quiver is not None and quiver != q:
        raise QuiverMismatch("representations live on a different quiver")
    dims = [sum(r.dims[a] for r in reps) for a in range(q.n_vertices)]
    mats = []
    for k in range(q.n_arrows):
        s, t = q.src(k), q.dst(k)
        block = np.zeros((dims[t], dims[s]), dtype=complex)
        r0 = c0 = 0
        for r in reps:
            block[r0:r0 + r.dims[t], c0:c0 + r.dims[s]] = r.mats[k]
            r0 += r.dims[t]
            c0 += r.dims[s]
        mats.append(block)
    return Representation(q, dims, mats)


class SubrepWitness:
    """Per-vertex orthonormal bases ``W_a`` of a candidate subrepresentation of ``parent``.

    Columns are re-orthonormalised on construction so that the residual
    ``max_alpha ||(I - P_t) rho_alpha P_s||_F`` is well defined.
    """

    def __init__(self, parent: Representation, bases: Sequence[np.ndarray], orthonormalize: bool = True):
        self.parent = parent
        out = []
        for a, w in enumerate(bases):
            w = np.asarray(w, dtype=complex)
            if w.ndim != 2 or w.shape[0] != parent.dims[a]:
                if w.size:
                    w = w.reshape(parent.dims[a], -1)
                else:
                    w = np.zeros((parent.dims[a], 0), dtype=complex)
            out.append(linalg.orth(w) if orthonormalize else w)
        self.bases = tuple(out)

    @classmethod
    def coordinate(cls, parent: Representation, support: Iterable[int]) -> "SubrepWitness":
        support = set(support)
        bases = [
            np.eye(d, dtype=complex) if a in support else np.zeros((d, 0), dtype=complex)
            for a, d in enumerate(parent.dims)
        ]
        return cls(parent, bases, orthonormalize=False)

    @classmethod
    def full(cls, parent: Representation) -> "SubrepWitness":
        return cls.coordinate(parent, range(parent.quiver.n_vertices))

    @classmethod
    def zero(cls, parent: Representation) -> "SubrepWitness":
        return cls.coordinate(parent, ())

    @property
    def subdim(self) -> tuple:
        return tuple(w.shape[1] for w in self.bases)

    @property
    def rank(self) -> int:
        return sum(self.subdim)

    def residual(self) -> float:
        q = self.parent.quiver
        worst = 0.0
        for k, rho in enumerate(self.parent.mats):
            s, t = q.src(k), q.dst(k)
            wt, ws = self.bases[t], self.bases[s]
            if ws.shape[1] == 0 or rho.shape[0] == 0:
                continue
            img = rho @ ws
            r = img - wt @ (wt.conj().T @ img)
            worst = max(worst, float(np.linalg.norm(r)))
        return worst

    def relative_residual(self) -> float:
        return self.residual() / self.parent.scale()

    def complement_bases(self) -> tuple:
        return tuple(linalg.complement(w) for w in self.bases)

    def contains(self, other: "SubrepWitness", tol: float = 1e-8) -> bool:
        for w, v in zip(self.bases, other.bases):
            if v.shape[1] == 0:
                continue
            if v.shape[1] > w.shape[1]:
                return False
            if np.linalg.norm(v - w @ (w.conj().T @ v)) > tol:
                return False
        return True

    def same_span(self, other: "SubrepWitness", tol: float = 1e-8) -> bool:
        return self.subdim == other.subdim and self.contains(other, tol)

    def __repr__(self) -> str:
        return f"SubrepWitness(subdim={self.subdim}, residual={self.residual():.2e})"


def witness_sum(w1: SubrepWitness, w2: SubrepWitness) -> SubrepWitness:
    """Vertex-wise sum of two subrepresentations of the same parent."""
    return SubrepWitness(w1.parent, [np.hstack([a, b]) for a, b in zip(w1.bases, w2.bases)])


def witness_intersection(w1: SubrepWitness, w2: SubrepWitness, tol: float = 1e-10) -> SubrepWitness:
    bases = []
    for a, b in zip(w1.bases, w2.bases):
        if a.shape[1] == 0 or b.shape[1] == 0:
            bases.append(np.zeros((a.shape[0], 0), dtype=complex))
            continue
        # x in span(a) ∩ span(b)  <=>  a u = b v
        ker = linalg.null_space(np.hstack([a, -b]), tol)
        bases.append(a @ ker[: a.shape[1]])
    return SubrepWitness(w1.parent, bases)


def subquotient(
    m: Representation, w: SubrepWitness, tol: float = 1e-8
) -> tuple[Representation, Representation]:
    """Return ``(Sub, Quot)`` in the orthonormal bases ``W_a`` and their complements.

    ``tol`` bounds the witness residual relative to ``m.scale()``.
    """
    if w.relative_residual() > tol:
        raise ResidualTooLarge(f"witness residual {w.residual():.3e} exceeds tolerance")
    q = m.quiver
    comp = w.complement_bases()
    sub_mats, quot_mats = [], []
    for k, rho in enumerate(m.mats):
        s, t = q.src(k), q.dst(k)
        sub_mats.append(w.bases[t].conj().T @ rho @ w.bases[s])
        quot_mats.append(comp[t].conj().T @ rho @ comp[s])
    sub = Representation(q, w.subdim, sub_mats)
    quot = Representation(q, [c.shape[1] for c in comp], quot_mats)
    return sub, quot


def inclusion_and_projection(m: Representation, w: SubrepWitness) -> tuple[Morphism, Morphism]:
    """The canonical maps ``Sub -> M -> Quot`` matching :func:`subquotient`."""
    sub, quot = subquotient(m, w, tol=np.inf)
    comp = w.complement_bases()
    inc = Morphism(sub, m, tuple(w.bases))
    proj = Morphism(m, quot, tuple(c.conj().T for c in comp))
    return inc, proj


def morphism_kernel_image(f: Morphism, tol: float = 1e-8) -> tuple[SubrepWitness, SubrepWitness]:
    """Kernel (on the domain) and image (on the codomain) of an intertwiner."""
    scale = max(f.domain.scale(), f.codomain.scale()) * max(
        [1.0] + [float(np.linalg.norm(x)) for x in f.maps]
    )
    if f.residual() > tol * scale:
        raise ResidualTooLarge(f"morphism does not intertwine (residual {f.residual():.3e})")
    kers, ims = [], []
    for fa in f.maps:
        if fa.size == 0:
            kers.append(np.eye(fa.shape[1], dtype=complex))
            ims.append(np.zeros((fa.shape[0], 0), dtype=complex))
            continue
        kers.append(linalg.null_space(fa))
        ims.append(linalg.orth(fa))
    return (
        SubrepWitness(f.domain, kers, orthonormalize=False),
        SubrepWitness(f.codomain, ims, orthonormalize=False),
    )


def random_representation(
    quiver: Quiver, dims, seed: int | None = None, distribution: str = "gaussian"
) -> Representation:
    """Random representation; ``gaussian`` draws i.i.d. standard complex Gaussians."""
    rng = np.random.default_rng(seed)
    if isinstance(dims, Mapping):
        dims = [dims.get(v, 0) for v in quiver.vertices]
    mats = []
    for k in range(quiver.n_arrows):
        shape = (dims[quiver.dst(k)], dims[quiver.src(k)])
        if distribution == "gaussian":
            m = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
        elif distribution == "real":
            m = rng.standard_normal(shape).astype(complex)
        elif distribution == "integer":
            m = rng.integers(-2, 3, size=shape).astype(complex)
        else:
            raise ValueError(f"unknown distribution {distribution!r}")
        mats.append(m)
    return Representation(quiver, dims, mats)
