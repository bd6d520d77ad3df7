"""``qmod`` command line: read an instance, run one analysis, print a JSON report.

Exit status is 0 on success, 2 when a verdict is Indeterminate and 1 on
errors (the error is reported as JSON on standard error).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import io
from .errors import InstanceError, QmodError
from .facets import facet_invariance_audit, facet_signature, integral_weight_in_facet, signature_json
from .filtrations import hn_filtration, jh_filtration, s_equivalent
from .kempf_ness import EPS_EH, kempf_ness_flow
from .line_bundle import (
    LineBundleData,
    chart_chern_density,
    chern_integral,
    descended_metric_chart,
    descended_metric_closed_form,
)
from .moduli import OrbitOperator, kronecker_moduli_report, moduli_dimension
from .quiver import dim_end
from .stability import INDETERMINATE, StabilityOptions, classify_stability
from .subreps import SearchOptions
from .weight import Weight

COMMANDS = ("check", "facet", "integral-weight", "flow", "hn", "jh", "sequiv", "moduli", "chern", "audit")


class UsageError(QmodError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qmod", description="Stability and moduli computations for quiver representations.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="instance JSON file ('-' for standard input)")
    p.add_argument("--theta", help="weight override, comma separated rationals such as 1/2,-3/10")
    p.add_argument("--omega", help="second weight for audit, comma separated rationals")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=EPS_EH, help="target ||L_theta|| for the flow")
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--grid", type=int, default=200, help="radial nodes for moduli/chern quadrature")
    p.add_argument("--n", type=int, default=None, help="line bundle power for chern (default: minimal)")
    p.add_argument("--format", choices=("json",), default="json")
    return p


def _parse_weight(text: str, n: int, name: str) -> Weight:
    parts = [x for x in text.split(",") if x.strip()]
    if len(parts) != n:
        raise InstanceError(name, f"expected {n} comma separated entries, got {len(parts)}")
    try:
        return Weight(p.strip() for p in parts)
    except QmodError as exc:
        raise InstanceError(name, str(exc)) from exc


def _load(args) -> io.Instance | None:
    if args.input is None:
        return None
    text = sys.stdin.read() if args.input == "-" else open(args.input, encoding="utf-8").read()
    inst = io.parse_instance(text)
    n = inst.quiver.n_vertices
    if args.theta is not None:
        inst.theta = _parse_weight(args.theta, n, "--theta")
    if args.omega is not None:
        inst.omega = _parse_weight(args.omega, n, "--omega")
    return inst


def _need(inst, *fields):
    if inst is None:
        raise UsageError("this command needs --input")
    for f in fields:
        if getattr(inst, f) is None:
            path = {"rep": "matrices", "theta": "weight", "compare": "compare"}.get(f, f)
            raise InstanceError(path, "required by this command")


def _options(args, inst) -> StabilityOptions:
    seed = args.seed if args.seed is not None else int((inst.options if inst else {}).get("seed", 0))
    return StabilityOptions(eps=args.tol, max_iters=args.max_iters, seed=seed, search=SearchOptions(seed=seed))


def _rep_json(rep) -> dict:
    return {"dims": list(rep.dims), "matrices": io._mats_json(rep)}


def _witness_json(w) -> dict | None:
    if w is None:
        return None
    return {"subdim": list(w.subdim), "bases": [io.emit_matrix(b) for b in w.bases], "residual": w.residual()}


def _verdict_json(v) -> dict:
    return {
        "verdict": v.verdict,
        "dimEnd": v.dim_end,
        "slope": str(v.slope),
        "witness": _witness_json(v.witness),
        "flow": {
            "status": v.flow.status,
            "iterations": v.flow.iterations,
            "finalNorm": v.flow.final_norm,
        },
        "stabilizerDim": v.limit.stabilizer_dim if v.limit is not None else None,
        "limitIsomorphic": v.limit_isomorphic,
        "structuralVerdict": v.structural.verdict if v.structural is not None else None,
        "methods": list(v.methods),
        "flags": list(v.flags),
    }


def _filtration_json(f) -> dict:
    return {
        "kind": f.kind,
        "theta": [str(t) for t in f.theta],
        "length": f.length,
        "slopes": [str(s) for s in f.slopes()],
        "witnesses": [_witness_json(w) for w in f.witnesses],
        "factors": [_rep_json(g) for g in f.factors],
        "flags": list(f.flags),
    }


def cmd_check(args, inst):
    _need(inst, "rep", "theta")
    v = classify_stability(inst.rep, inst.theta, _options(args, inst))
    return _verdict_json(v), v.verdict == INDETERMINATE


def cmd_facet(args, inst):
    _need(inst, "theta")
    sig = facet_signature(inst.theta, inst.dims)
    return {
        "signature": signature_json(sig),
        "integralWeight": [int(x) for x in integral_weight_in_facet(inst.theta, inst.dims)],
    }, False


def cmd_integral_weight(args, inst):
    _need(inst, "theta")
    w = integral_weight_in_facet(inst.theta, inst.dims)
    same = facet_signature(w, inst.dims) == facet_signature(inst.theta, inst.dims)
    return {"weight": inst.theta.as_strings(), "integralWeight": [int(x) for x in w], "sameSignature": same}, False


def cmd_flow(args, inst):
    _need(inst, "rep", "theta")
    r = kempf_ness_flow(inst.rep, inst.theta, eps=args.tol, max_iters=args.max_iters)
    return {
        "iterations": r.iterations,
        "status": r.status,
        "converged": r.converged,
        "finalNorm": r.final_norm,
        "gradNorm": r.grad_norm,
        "history": list(r.history),
        "final": _rep_json(r.final),
    }, False


def cmd_hn(args, inst):
    _need(inst, "rep", "theta")
    return _filtration_json(hn_filtration(inst.rep, inst.theta, _options(args, inst))), False


def cmd_jh(args, inst):
    _need(inst, "rep", "theta")
    return _filtration_json(jh_filtration(inst.rep, inst.theta, _options(args, inst))), False


def cmd_sequiv(args, inst):
    _need(inst, "rep", "theta", "compare")
    return {"sEquivalent": s_equivalent(inst.rep, inst.compare, inst.theta, _options(args, inst))}, False


def cmd_moduli(args, inst):
    rep = kronecker_moduli_report(args.grid)
    out = {
        "grid": {"radial": rep.n_grid, "angular": rep.n_angle, "radius": rep.radius},
        "samples": rep.samples,
        "densityAtZero": rep.density_at_zero,
        "positive": rep.positive,
        "bulk": rep.bulk,
        "tail": rep.tail,
        "tailError": rep.tail_error,
        "total": rep.total,
        "target": 2.0 * np.pi,
    }
    if inst is not None and inst.rep is not None and inst.theta is not None:
        # tangent dimension at the Einstein-Hermitian point of the orbit
        flow = kempf_ness_flow(inst.rep, inst.theta, eps=args.tol, max_iters=args.max_iters)
        point = {"converged": flow.converged, "dimEnd": dim_end(inst.rep)}
        if flow.converged:
            point["horizontalDim"] = OrbitOperator(flow.final).horizontal_dim()
            point["expectedDim"] = moduli_dimension(flow.final)
        out["point"] = point
    return out, False


def cmd_chern(args, inst):
    theta = inst.theta if inst is not None and inst.theta is not None else Weight((1, -1))
    data = LineBundleData.of(theta, (1, 1), args.n)
    zs = [complex(x, 0.0) for x in np.linspace(0.0, 4.0, 9)]
    samples = [
        {
            "z": z,
            "metric": descended_metric_chart(z, data.n),
            "closedForm": descended_metric_closed_form(z, data.n),
            "c1": chart_chern_density(z, data.n),
        }
        for z in zs
    ]
    rep = chern_integral(data.n, n_grid=args.grid)
    return {"n": data.n, "samples": samples, "integral": rep.total, "target": data.n}, False


def cmd_audit(args, inst):
    _need(inst, "rep", "theta", "omega")
    others = [inst.compare] if inst.compare is not None else []
    r = facet_invariance_audit(inst.rep, inst.theta, inst.omega, others, _options(args, inst))
    return {
        "dims": list(r.d),
        "verdictTheta": r.verdict_theta,
        "verdictOmega": r.verdict_omega,
        "witnessTheta": list(r.witness_theta) if r.witness_theta is not None else None,
        "witnessOmega": list(r.witness_omega) if r.witness_omega is not None else None,
        "jhRevalidated": r.jh_revalidated,
        "sEquivalence": [list(p) for p in r.sequiv],
        "consistent": r.consistent,
    }, INDETERMINATE in (r.verdict_theta, r.verdict_omega)


HANDLERS = {
    "check": cmd_check,
    "facet": cmd_facet,
    "integral-weight": cmd_integral_weight,
    "flow": cmd_flow,
    "hn": cmd_hn,
    "jh": cmd_jh,
    "sequiv": cmd_sequiv,
    "moduli": cmd_moduli,
    "chern": cmd_chern,
    "audit": cmd_audit,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.max_iters < 0:
            raise UsageError("--max-iters must be non-negative")
        inst = _load(args)
        report, indeterminate = HANDLERS[args.command](args, inst)
    except (QmodError, OSError, ValueError, NotImplementedError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, InstanceError):
            err["path"] = exc.path
        stderr.write(io.dumps(err) + "\n")
        return 1
    stdout.write(io.dumps(report) + "\n")
    return 2 if indeterminate else 0


def main(argv=None) -> int:
    sys.exit(run(argv))
