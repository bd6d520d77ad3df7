"""Harder-Narasimhan and Jordan-Hoelder filtrations, graded objects and S-equivalence.

Filtrations are stored top-down, ``M = M_0 > M_1 > ... > M_n = 0``, with
factors ``G_i = M_{i-1} / M_i``.  Both are built bottom-up: a subobject is
found in the current quotient, lifted to ``M`` and divided out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotSemistable, ShapeMismatch
from .quiver import Representation, SubrepWitness, direct_sum, is_isomorphic, subquotient
from .stability import STABLE, StabilityOptions, classify_stability
from .subreps import find_destabilizing_subrep, find_subrep
from .weight import as_weight


@dataclass
class Filtration:
    kind: str
    rep: Representation
    witnesses: list  # M_0 = M, ..., M_n = 0, all relative to ``rep``
    factors: list  # G_1, ..., G_n
    theta: tuple
    flags: list = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.factors)

    def slopes(self, theta=None) -> list[Fraction]:
        theta = as_weight(theta if theta is not None else self.theta)
        return [theta.slope(g.dims) for g in self.factors]

    def nested(self, tol: float = 1e-8) -> bool:
        return all(
            a.contains(b, tol) and a.rank > b.rank for a, b in zip(self.witnesses, self.witnesses[1:])
        )


def _peel(m: Representation, theta, pick):
    """Repeatedly extract ``pick(quotient)`` and lift it; returns (ascending subs, factors, flags).

    ``pick`` returns ``(witness or None, exhaustive)``.  The last factor is
    the final quotient itself.
    """
    cur = m
    coords = [np.eye(d, dtype=complex) for d in m.dims]  # current quotient in M coordinates
    acc = [np.zeros((d, 0), dtype=complex) for d in m.dims]
    subs, factors, flags = [], [], []
    while True:
        w, exhaustive = pick(cur)
        if not exhaustive and "heuristic-incomplete" not in flags:
            flags.append("heuristic-incomplete")
        if w is None:
            factors.append(cur)
            return subs, factors, flags
        sub, quot = subquotient(cur, w)
        acc = [np.hstack([a, c @ b]) for a, c, b in zip(acc, coords, w.bases)]
        subs.append(SubrepWitness(m, acc))
        factors.append(sub)
        coords = [c @ cb for c, cb in zip(coords, w.complement_bases())]
        cur = quot


def _assemble(kind, m, theta, subs, factors, flags) -> Filtration:
    # bottom-up lists: subs[0] is M_{n-1}, factors[0] is G_n
    witnesses = [SubrepWitness.full(m)] + subs[::-1] + [SubrepWitness.zero(m)]
    return Filtration(kind, m, witnesses, factors[::-1], tuple(as_weight(theta)), flags)


def hn_filtration(m: Representation, theta, opts: StabilityOptions | None = None, verify: bool = True) -> Filtration:
    """Harder-Narasimhan filtration: factor slopes strictly increase with the index.

    ``M_{n-1}`` is the maximal destabilising subrepresentation (largest
    slope, then largest rank), and the construction recurses on ``M / M_{n-1}``.
    """
    theta = as_weight(theta)
    opts = opts or StabilityOptions()

    def pick(cur):
        res = find_destabilizing_subrep(cur, theta, opts.search)
        return res.witness, res.exhaustive

    subs, factors, flags = _peel(m, theta, pick)
    filt = _assemble("HN", m, theta, subs, factors, flags)
    if verify:
        for g in filt.factors:
            if not classify_stability(g, theta, opts).semistable:
                filt.flags.append("factor-not-semistable")
                break
    return filt


def jh_filtration(
    m: Representation, theta, opts: StabilityOptions | None = None, verdict=None, verify: bool = True
) -> Filtration:
    """Jordan-Hoelder filtration of a semistable ``m``: stable factors, all of slope ``mu(M)``.

    Stable subobjects are searched among equal-slope dimension vectors by
    increasing rank; a minimal-rank one is necessarily stable.
    """
    theta = as_weight(theta)
    opts = opts or StabilityOptions()
    verdict = verdict or classify_stability(m, theta, opts)
    if not verdict.semistable:
        raise NotSemistable(f"representation is {verdict.verdict} at {theta}")
    mu = theta.slope(m.dims)

    def pick(cur):
        res = find_subrep(cur, theta, lambda e: theta.slope(e) == mu, opts.search, order="rank")
        return res.witness, res.exhaustive

    subs, factors, flags = _peel(m, theta, pick)
    filt = _assemble("JH", m, theta, subs, factors, flags)
    if verify:
        for g in filt.factors:
            if classify_stability(g, theta, opts).verdict != STABLE:
                filt.flags.append("factor-not-stable")
                break
    return filt


def jh_valid_at(filt: Filtration, omega, opts: StabilityOptions | None = None) -> bool:
    """Whether a JH filtration stays one at ``omega``: equal slopes and stable factors."""
    omega = as_weight(omega)
    mu = omega.slope(filt.rep.dims)
    if any(omega.slope(w.subdim) != mu for w in filt.witnesses[:-1]):
        return False
    return all(classify_stability(g, omega, opts).verdict == STABLE for g in filt.factors)


def graded_object(m: Representation, theta, opts: StabilityOptions | None = None) -> Representation:
    """Direct sum of the JH factors."""
    return direct_sum(jh_filtration(m, theta, opts).factors, quiver=m.quiver)


def match_factors(fa, fb, seed: int = 0) -> bool:
    """Greedy bipartite matching of two factor lists under isomorphism."""
    if len(fa) != len(fb):
        return False
    free = list(range(len(fb)))
    for g in fa:
        for j in free:
            if fb[j].dims == g.dims and is_isomorphic(g, fb[j], seed=seed):
                free.remove(j)
                break
        else:
            return False
    return True


def s_equivalent(m: Representation, n: Representation, theta, opts: StabilityOptions | None = None) -> bool:
    """S-equivalence: equal JH factor multisets up to isomorphism."""
    if m.dims != n.dims:
        raise ShapeMismatch("S-equivalence needs equal dimension vectors")
    opts = opts or StabilityOptions()
    fa = jh_filtration(m, theta, opts).factors
    fb = jh_filtration(n, theta, opts).factors
    return match_factors(fa, fb, opts.seed)
