"""The wall arrangement in weight space: walls ``f(d, e)``, facet signatures, integral weights."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import DifferentFacets, ZeroDimension
from .weight import Weight, as_weight


def in_rational_line(e, d) -> bool:
    """Whether ``e`` is a rational multiple of ``d`` (exact, integer cross-multiplication)."""
    # e = c d  <=>  e_i d_j == e_j d_i for all i, j
    return all(e[i] * d[j] == e[j] * d[i] for i in range(len(d)) for j in range(len(d)))


def enumerate_S_d(d) -> list[tuple]:
    """Vectors ``0 <= e <= d`` off the line ``Q d``, in lexicographic order."""
    d = tuple(int(x) for x in d)
    if sum(d) == 0:
        raise ZeroDimension("the zero dimension vector has no walls")
    return [e for e in itertools.product(*(range(x + 1) for x in d)) if not in_rational_line(e, d)]


def wall_coefficients(d, e) -> tuple[Fraction, ...]:
    """Coefficients ``c`` with ``f(d, e)(theta) = sum_a c_a theta_a = mu_theta(d) - mu_theta(e)``."""
    rd, re_ = sum(d), sum(e)
    return tuple(Fraction(x, rd) - Fraction(y, re_) for x, y in zip(d, e))


@dataclass(frozen=True)
class Arrangement:
    d: tuple
    walls: tuple  # ((e, coefficients), ...)

    @classmethod
    def of(cls, d) -> "Arrangement":
        d = tuple(int(x) for x in d)
        return cls(d, tuple((e, wall_coefficients(d, e)) for e in enumerate_S_d(d)))

    def evaluate(self, theta) -> dict:
        theta = as_weight(theta)
        return {e: sum((c * t for c, t in zip(coef, theta)), Fraction(0)) for e, coef in self.walls}


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def facet_signature(theta, d) -> dict:
    """Map ``e -> sign f(d, e)(theta)`` over ``S_d``, computed exactly."""
    theta = as_weight(theta)
    return {e: _sign(v) for e, v in Arrangement.of(d).evaluate(theta).items()}


def same_facet(theta, omega, d) -> bool:
    return facet_signature(theta, d) == facet_signature(omega, d)


def integral_weight_in_facet(theta, d=None) -> Weight:
    """Canonical integral weight in the facet of a rational ``theta``.

    Every wall ``f(d, e)`` is linear, so the positive multiple by the lcm of
    the denominators has the same signature.  Integral weights are returned
    unchanged.
    """
    theta = as_weight(theta)
    return theta.scaled(theta.denominator_lcm())


def signature_key(e) -> str:
    return "(" + ",".join(str(x) for x in e) + ")"


def signature_json(sig: dict) -> dict:
    return {signature_key(e): s for e, s in sig.items()}


# -- facet invariance audit --------------------------------------------------------------


@dataclass
class AuditReport:
    d: tuple
    verdict_theta: str
    verdict_omega: str
    witness_theta: tuple | None
    witness_omega: tuple | None
    jh_revalidated: bool | None
    sequiv: list
    consistent: bool


def facet_invariance_audit(m, theta, omega, others=(), opts=None) -> AuditReport:
    """Check that stability, JH filtrations and S-equivalence agree at ``theta`` and ``omega``."""
    from .filtrations import jh_filtration, jh_valid_at, s_equivalent
    from .stability import classify_stability

    theta, omega = as_weight(theta), as_weight(omega)
    if not same_facet(theta, omega, m.dims):
        raise DifferentFacets("theta and omega lie in different facets")
    vt = classify_stability(m, theta, opts)
    vo = classify_stability(m, omega, opts)
    wt = vt.witness.subdim if vt.witness is not None else None
    wo = vo.witness.subdim if vo.witness is not None else None
    ok = vt.verdict == vo.verdict
    revalid = None
    seq = []
    if vt.semistable:
        jh = jh_filtration(m, theta, opts, verdict=vt)
        revalid = jh_valid_at(jh, omega, opts)
        ok = ok and revalid
        for n in others:
            if n.dims != m.dims:
                continue
            nt, no = classify_stability(n, theta, opts), classify_stability(n, omega, opts)
            ok = ok and nt.verdict == no.verdict
            if not (nt.semistable and no.semistable):
                # S-equivalence is only defined between semistable objects
                seq.append((None, None))
                continue
            st = s_equivalent(m, n, theta, opts)
            so = s_equivalent(m, n, omega, opts)
            seq.append((st, so))
            ok = ok and st == so
    return AuditReport(tuple(m.dims), vt.verdict, vo.verdict, wt, wo, revalid, seq, ok)
