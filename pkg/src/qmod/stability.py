"""Stability classification.

The analytic route runs the Kempf-Ness flow: a zero of the moment map in the
orbit closure means semistable, and the orbit is closed (polystable) iff the
limit is isomorphic to the starting point.  The structural route uses only
exact subrepresentation passes and is used as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ShapeMismatch, ZeroDimension
from .kempf_ness import EPS_EH, FlowLimit, FlowReport, flow_limit, kempf_ness_flow
from .quiver import Representation, SubrepWitness, dim_end, direct_sum, is_isomorphic, subquotient
from .subreps import SearchOptions, find_destabilizing_subrep, find_subrep
from .weight import Weight, as_weight

STABLE = "Stable"
POLYSTABLE = "StrictlySemistablePolystable"
NOT_POLYSTABLE = "StrictlySemistableNotPolystable"
UNSTABLE = "Unstable"
INDETERMINATE = "Indeterminate"

SEMISTABLE_VERDICTS = (STABLE, POLYSTABLE, NOT_POLYSTABLE)

# singular-value cut (relative to the arrow norms) when counting endomorphisms of gr M
GRADED_TOL = 1e-6


@dataclass
class StabilityOptions:
    eps: float = EPS_EH
    max_iters: int = 10_000
    seed: int = 0
    cross_check: bool = True
    search: SearchOptions = field(default_factory=SearchOptions)


@dataclass
class StructuralVerdict:
    verdict: str | None
    exhaustive: bool
    witness: SubrepWitness | None = None
    factors: list = field(default_factory=list)


@dataclass
class StabilityVerdict:
    verdict: str
    slope: Fraction
    dim_end: int
    witness: SubrepWitness | None = None
    flow: FlowReport | None = None
    limit: FlowLimit | None = None
    methods: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    structural: StructuralVerdict | None = None
    limit_isomorphic: bool | None = None

    @property
    def semistable(self) -> bool:
        return self.verdict in SEMISTABLE_VERDICTS

    @property
    def stable(self) -> bool:
        return self.verdict == STABLE

    @property
    def polystable(self) -> bool:
        return self.verdict in (STABLE, POLYSTABLE)


def _check_input(m: Representation, theta) -> Weight:
    theta = as_weight(theta)
    if len(theta) != m.quiver.n_vertices:
        raise ShapeMismatch("weight length does not match the number of vertices")
    if m.rank == 0:
        raise ZeroDimension("stability of the zero representation is undefined")
    return theta


def structural_jh_factors(m: Representation, theta, opts: SearchOptions | None = None):
    """JH factors of a semistable ``m`` from exact passes only.

    Returns ``(factors, exhaustive)``.  A minimal-rank subrepresentation of
    slope ``mu(M)`` is automatically stable, so it is peeled off and the
    quotient is processed in turn.
    """
    opts = opts or SearchOptions(heuristic=False)
    theta = as_weight(theta)
    mu = theta.slope(m.dims)
    factors, exhaustive = [], True
    cur = m
    while True:
        res = find_subrep(cur, theta, lambda e: theta.slope(e) == mu, opts, order="rank")
        exhaustive = exhaustive and res.exhaustive
        if res.witness is None:
            factors.append(cur)
            return factors, exhaustive
        sub, quot = subquotient(cur, res.witness, tol=opts.tol)
        factors.append(sub)
        cur = quot


def structural_verdict(m: Representation, theta, opts: SearchOptions | None = None) -> StructuralVerdict:
    """Verdict from exact subrepresentation passes (no flow).

    ``verdict`` is ``None`` when the exact passes are not exhaustive.
    """
    theta = _check_input(m, theta)
    opts = opts or SearchOptions(heuristic=False)
    res = find_destabilizing_subrep(m, theta, opts)
    if res.witness is not None:
        return StructuralVerdict(UNSTABLE, True, res.witness)
    if not res.exhaustive:
        return StructuralVerdict(None, False)
    factors, exhaustive = structural_jh_factors(m, theta, opts)
    if not exhaustive:
        return StructuralVerdict(None, False, factors=factors)
    if len(factors) == 1:
        return StructuralVerdict(STABLE, True, factors=factors)
    graded = direct_sum(factors, quiver=m.quiver)
    # gr M lies in the orbit closure of M, so M = gr M iff their endomorphism
    # algebras have equal dimension.  Factors split off a defective eigenvalue are
    # only accurate to ~sqrt(eps), hence the loose tolerance on the graded side.
    loose = GRADED_TOL * max([1.0] + [float(np.linalg.norm(x)) for x in graded.mats])
    same_end = dim_end(graded, tol=loose) == dim_end(m)
    verdict = POLYSTABLE if same_end and is_isomorphic(m, graded) else NOT_POLYSTABLE
    return StructuralVerdict(verdict, True, factors=factors)


def classify_stability(m: Representation, theta, opts: StabilityOptions | None = None) -> StabilityVerdict:
    """Classify ``m`` at a rational weight ``theta``.

    Semistable orbits are recognised by the flow reaching ``||L|| <= eps``.
    The limit is polystable; ``m`` itself is polystable iff it is isomorphic
    to the limit, which is also visible as a jump of the stabiliser dimension.
    Disagreement between these two signals, or with an exhaustive structural
    verdict, yields ``Indeterminate``.
    """
    theta = _check_input(m, theta)
    opts = opts or StabilityOptions()
    mu = theta.slope(m.dims)
    de = dim_end(m)
    flow = kempf_ness_flow(m, theta, eps=opts.eps, max_iters=opts.max_iters)
    out = StabilityVerdict(INDETERMINATE, mu, de, flow=flow, methods=["flow"])
    if flow.converged:
        lim = flow_limit(flow.final, theta, seed=opts.seed)
        out.limit = lim
        iso = bool(is_isomorphic(m, lim.limit, seed=opts.seed))
        out.limit_isomorphic = iso
        # boundary orbits of a non-closed orbit have strictly larger stabilisers,
        # so the jump decides; the isomorphism test is ill-conditioned exactly then
        jump = lim.stabilizer_dim > de
        if lim.stabilizer_dim < de:
            out.flags.append("limit-inconsistent")
        elif not jump:
            if iso:
                out.verdict = STABLE if de == 1 else POLYSTABLE
            else:
                out.flags.append("limit-inconsistent")
        else:
            out.verdict = NOT_POLYSTABLE
            if iso:
                out.flags.append("iso-ill-conditioned")
    elif flow.critical:
        res = find_destabilizing_subrep(m, theta, opts.search)
        out.verdict = UNSTABLE
        if res.witness is not None:
            out.witness = res.witness
            out.methods.append(res.method)
        else:
            out.flags.append("no-witness")
            if not res.exhaustive:
                out.flags.append("heuristic-incomplete")
    else:
        out.flags.append("flow-budget")

    if opts.cross_check:
        sv = structural_verdict(m, theta, SearchOptions(tol=opts.search.tol, seed=opts.seed, heuristic=False))
        out.structural = sv
        if sv.verdict is not None:
            out.methods.append("structural")
            if out.verdict == INDETERMINATE:
                out.verdict = sv.verdict
                out.flags.append("structural-fallback")
            elif sv.verdict != out.verdict:
                out.flags.append(f"cross-check-disagreement:{sv.verdict}")
                out.verdict = INDETERMINATE
            if out.verdict == UNSTABLE and out.witness is None:
                out.witness = sv.witness
    return out
