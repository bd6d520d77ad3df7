"""JSON instance files and deterministic report serialisation.

Instance layout::

    {
      "quiver": {"vertices": ["1", "2"], "arrows": [{"id": "a", "src": "1", "dst": "2"}]},
      "dims": {"1": 1, "2": 1},
      "weight": {"1": "1", "2": "-1"},
      "matrices": {"a": [[1, 0]]},
      "compare": {"matrices": {...}},
      "omega": {"1": "3", "2": "-2"},
      "options": {"seed": 0}
    }

Complex entries are ``[re, im]`` pairs in row-major order, either as a flat
list of ``rows * cols`` pairs or as nested rows of pairs.  Rationals are
strings (``"p/q"``) or integers; floats are refused.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from pathlib import Path

import numpy as np

from .errors import InstanceError, NonRationalWeight, QuiverError, ShapeMismatch
from .quiver import Quiver, Representation, build_quiver
from .weight import Weight, to_fraction


@dataclass
class Instance:
    quiver: Quiver
    dims: tuple
    rep: Representation | None = None
    theta: Weight | None = None
    omega: Weight | None = None
    compare: Representation | None = None
    options: dict = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented

        def same_rep(a, b):
            if a is None or b is None:
                return a is b
            return a.dims == b.dims and all(np.array_equal(x, y) for x, y in zip(a.mats, b.mats))

        return (
            self.quiver == other.quiver
            and self.dims == other.dims
            and self.theta == other.theta
            and self.omega == other.omega
            and self.options == other.options
            and same_rep(self.rep, other.rep)
            and same_rep(self.compare, other.compare)
        )


def _is_pair(x) -> bool:
    return isinstance(x, list) and len(x) == 2 and all(isinstance(v, Real) and not isinstance(v, bool) for v in x)


def parse_matrix(data, shape: tuple, path: str) -> np.ndarray:
    rows, cols = shape
    if not isinstance(data, list):
        raise InstanceError(path, "matrix must be a list")
    if rows * cols == 0:
        if data not in ([], [[]]):
            raise InstanceError(path, f"expected an empty matrix for shape {shape}")
        return np.zeros(shape, dtype=complex)
    if all(_is_pair(x) for x in data):
        entries = data
    elif all(isinstance(r, list) and all(_is_pair(x) for x in r) for r in data):
        if len(data) != rows or any(len(r) != cols for r in data):
            raise InstanceError(path, f"expected shape {shape}, got nested rows of other shape")
        entries = [x for r in data for x in r]
    else:
        raise InstanceError(path, "entries must be [re, im] pairs")
    if len(entries) != rows * cols:
        raise InstanceError(path, f"expected {rows * cols} entries for shape {shape}, got {len(entries)}")
    vals = np.array([complex(float(a), float(b)) for a, b in entries], dtype=complex)
    return vals.reshape(shape)


def emit_matrix(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=complex).ravel()]


def _weight(data, quiver: Quiver, path: str) -> Weight:
    if not isinstance(data, dict):
        raise InstanceError(path, "weight must be an object keyed by vertex id")
    keys = {str(v) for v in quiver.vertices}
    if set(data) != keys:
        raise InstanceError(path, f"weight keys must be exactly the vertex ids {sorted(keys)}")
    vals = []
    for v in quiver.vertices:
        try:
            vals.append(to_fraction(data[str(v)]))
        except NonRationalWeight as exc:
            raise InstanceError(f"{path}.{v}", str(exc)) from exc
    return Weight(vals)


def _matrices(data, quiver: Quiver, dims, path: str):
    if not isinstance(data, dict):
        raise InstanceError(path, "matrices must be an object keyed by arrow id")
    ids = {str(a.id) for a in quiver.arrows}
    extra = set(data) - ids
    if extra:
        raise InstanceError(path, f"unknown arrow ids {sorted(extra)}")
    mats = []
    for k, a in enumerate(quiver.arrows):
        shape = (dims[quiver.dst(k)], dims[quiver.src(k)])
        raw = data.get(str(a.id))
        mats.append(np.zeros(shape, dtype=complex) if raw is None else parse_matrix(raw, shape, f"{path}.{a.id}"))
    return Representation(quiver, dims, mats)


def instance_from_dict(data) -> Instance:
    if not isinstance(data, dict):
        raise InstanceError("$", "instance must be a JSON object")
    if "quiver" not in data:
        raise InstanceError("quiver", "missing")
    q = data["quiver"]
    if not isinstance(q, dict) or not isinstance(q.get("vertices"), list) or not isinstance(q.get("arrows", []), list):
        raise InstanceError("quiver", "needs a vertex list and an arrow list")
    for i, a in enumerate(q.get("arrows", [])):
        if not isinstance(a, dict) or not {"id", "src", "dst"} <= set(a):
            raise InstanceError(f"quiver.arrows[{i}]", "arrow needs id, src and dst")
    try:
        quiver = build_quiver(
            {
                "vertices": [str(v) for v in q["vertices"]],
                "arrows": [{"id": str(a["id"]), "src": str(a["src"]), "dst": str(a["dst"])} for a in q.get("arrows", [])],
            }
        )
    except QuiverError as exc:
        raise InstanceError("quiver", str(exc)) from exc
    if "dims" not in data:
        raise InstanceError("dims", "missing")
    raw_dims = data["dims"]
    if isinstance(raw_dims, dict):
        if set(raw_dims) != {str(v) for v in quiver.vertices}:
            raise InstanceError("dims", "keys must be exactly the vertex ids")
        raw_dims = [raw_dims[str(v)] for v in quiver.vertices]
    if (
        not isinstance(raw_dims, list)
        or len(raw_dims) != quiver.n_vertices
        or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in raw_dims)
    ):
        raise InstanceError("dims", "one non-negative integer per vertex")
    dims = tuple(raw_dims)
    inst = Instance(quiver, dims)
    if "weight" in data:
        inst.theta = _weight(data["weight"], quiver, "weight")
    if "omega" in data:
        inst.omega = _weight(data["omega"], quiver, "omega")
    try:
        if "matrices" in data:
            inst.rep = _matrices(data["matrices"], quiver, dims, "matrices")
        if "compare" in data:
            cmp_ = data["compare"]
            if not isinstance(cmp_, dict) or "matrices" not in cmp_:
                raise InstanceError("compare", "needs a matrices object")
            inst.compare = _matrices(cmp_["matrices"], quiver, dims, "compare.matrices")
    except ShapeMismatch as exc:
        raise InstanceError("matrices", str(exc)) from exc
    opts = data.get("options", {})
    if not isinstance(opts, dict):
        raise InstanceError("options", "must be an object")
    inst.options = dict(opts)
    return inst


def parse_instance(source) -> Instance:
    """Parse an instance from a path, a JSON string or an already decoded dict."""
    if isinstance(source, dict):
        return instance_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("$", f"invalid JSON: {exc}") from exc
    return instance_from_dict(data)


def _weight_json(w: Weight, quiver: Quiver) -> dict:
    return {str(v): str(t) for v, t in zip(quiver.vertices, w)}


def _mats_json(rep: Representation) -> dict:
    return {str(a.id): emit_matrix(m) for a, m in zip(rep.quiver.arrows, rep.mats)}


def instance_to_dict(inst: Instance) -> dict:
    q = inst.quiver
    out = {
        "quiver": {
            "vertices": [str(v) for v in q.vertices],
            "arrows": [{"id": str(a.id), "src": str(a.src), "dst": str(a.dst)} for a in q.arrows],
        },
        "dims": {str(v): d for v, d in zip(q.vertices, inst.dims)},
    }
    if inst.theta is not None:
        out["weight"] = _weight_json(inst.theta, q)
    if inst.omega is not None:
        out["omega"] = _weight_json(inst.omega, q)
    if inst.rep is not None:
        out["matrices"] = _mats_json(inst.rep)
    if inst.compare is not None:
        out["compare"] = {"matrices": _mats_json(inst.compare)}
    if inst.options:
        out["options"] = dict(inst.options)
    return out


def emit_instance(inst: Instance) -> str:
    return dumps(instance_to_dict(inst))


def to_jsonable(x):
    """Convert report values (Fractions, numpy scalars/arrays, complex, tuples) to JSON types."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    return x


def dumps(obj) -> str:
    """Deterministic JSON (insertion-ordered keys, shortest round-trip floats)."""
    return json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False, allow_nan=True)


def loads(text: str):
    return json.loads(text)
