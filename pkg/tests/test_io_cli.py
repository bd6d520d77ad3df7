import io as _io
import json
from fractions import Fraction

import numpy as np
import pytest

from qmod import io
from qmod.cli import run
from qmod.errors import InstanceError

KRONECKER = {
    "quiver": {
        "vertices": ["1", "2"],
        "arrows": [{"id": "a", "src": "1", "dst": "2"}, {"id": "b", "src": "1", "dst": "2"}],
    },
    "dims": {"1": 1, "2": 1},
    "weight": {"1": "1", "2": "-1"},
    "matrices": {"a": [[1, 0]], "b": [[0, 0]]},
}


def instance(**changes):
    data = json.loads(json.dumps(KRONECKER))
    data.update(changes)
    return data


def cli(args, tmp_path, data=None, env=None, monkeypatch=None):
    argv = list(args)
    if data is not None:
        path = tmp_path / "inst.json"
        path.write_text(json.dumps(data))
        argv += ["--input", str(path)]
    out, err = _io.StringIO(), _io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_parse_kronecker_instance():
    inst = io.parse_instance(json.dumps(KRONECKER))
    assert inst.quiver.n_vertices == 2 and [a.id for a in inst.quiver.arrows] == ["a", "b"]
    assert inst.rep.mats[0][0, 0] == 1 and inst.rep.mats[1][0, 0] == 0
    assert tuple(inst.theta) == (1, -1)


def test_parse_rational_weight():
    inst = io.parse_instance(instance(weight={"1": "1/3", "2": "-1/3"}))
    assert inst.theta[0] == Fraction(1, 3)


@pytest.mark.parametrize("bad", ["1/0", "abc", 0.5, True])
def test_malformed_rational(bad):
    with pytest.raises(InstanceError) as exc:
        io.parse_instance(instance(weight={"1": bad, "2": "0"}))
    assert exc.value.path == "weight.1"


def test_wrong_matrix_shape_names_arrow():
    with pytest.raises(InstanceError) as exc:
        io.parse_instance(instance(matrices={"a": [[1, 0]], "b": [[1, 0], [2, 0]]}))
    assert exc.value.path == "matrices.b"


def test_nested_rows_accepted():
    data = instance(dims={"1": 2, "2": 1}, matrices={"a": [[[1, 0], [0, 1]]], "b": [[2, 0], [0, 0]]})
    rep = io.parse_instance(data).rep
    assert np.array_equal(rep.mats[0], [[1, 1j]]) and np.array_equal(rep.mats[1], [[2, 0]])


@pytest.mark.parametrize(
    "change, path",
    [
        ({"quiver": {"vertices": ["1"], "arrows": [{"id": "a", "src": "1"}]}}, "quiver.arrows[0]"),
        ({"dims": {"1": 1}}, "dims"),
        ({"weight": {"1": "1"}}, "weight"),
        ({"matrices": {"c": [[1, 0]]}}, "matrices"),
    ],
)
def test_schema_errors_name_field(change, path):
    with pytest.raises(InstanceError) as exc:
        io.parse_instance(instance(**change))
    assert exc.value.path == path


def test_instance_round_trip(rng):
    data = instance(dims={"1": 2, "2": 3}, matrices={}, omega={"1": "3/7", "2": "-2"}, options={"seed": 4})
    inst = io.parse_instance(data)
    from qmod.quiver import random_representation

    inst.rep = random_representation(inst.quiver, inst.dims, seed=1)
    assert io.parse_instance(io.emit_instance(inst)) == inst


def test_check_stable(tmp_path):
    code, out, _ = cli(["check"], tmp_path, KRONECKER)
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "Stable" and rep["dimEnd"] == 1


def test_facet(tmp_path):
    code, out, _ = cli(["facet", "--theta", "1/2,-3/10"], tmp_path, KRONECKER)
    assert code == 0
    assert json.loads(out) == {"signature": {"(1,0)": -1, "(0,1)": 1}, "integralWeight": [5, -3]}


def test_flow_zero_budget(tmp_path):
    code, out, _ = cli(["flow", "--max-iters", "0"], tmp_path, KRONECKER)
    rep = json.loads(out)
    assert code == 0 and rep["iterations"] == 0 and rep["converged"]
    code, out, _ = cli(["flow", "--max-iters", "0"], tmp_path, instance(matrices={"a": [[2, 0]]}))
    rep = json.loads(out)
    assert rep["iterations"] == 0 and not rep["converged"]


def test_sequiv_and_audit(tmp_path):
    data = instance(weight={"1": "0", "2": "0"}, compare={"matrices": {"a": [[0, 0]], "b": [[1, 0]]}})
    code, out, _ = cli(["sequiv"], tmp_path, data)
    assert code == 0 and json.loads(out) == {"sEquivalent": True}
    code, out, _ = cli(["audit", "--omega", "3,-2"], tmp_path, KRONECKER)
    assert code == 0 and json.loads(out)["consistent"]


def test_filtration_commands(tmp_path):
    code, out, _ = cli(["hn"], tmp_path, instance(matrices={}))
    rep = json.loads(out)
    assert code == 0 and rep["slopes"] == ["-1", "1"]
    assert [w["subdim"] for w in rep["witnesses"]] == [[1, 1], [1, 0], [0, 0]]
    code, out, _ = cli(["jh", "--theta", "0,0"], tmp_path, KRONECKER)
    assert code == 0 and json.loads(out)["length"] == 2


def test_moduli_and_chern(tmp_path):
    code, out, _ = cli(["moduli", "--grid", "40"], tmp_path, KRONECKER)
    rep = json.loads(out)
    assert code == 0 and abs(rep["total"] - 2 * np.pi) < 0.1 and rep["point"]["horizontalDim"] == 1
    code, out, _ = cli(["chern", "--grid", "40"], tmp_path, KRONECKER)
    rep = json.loads(out)
    assert code == 0 and abs(rep["integral"] - 1) < 0.02


def test_integral_weight(tmp_path):
    code, out, _ = cli(["integral-weight", "--theta", "2/3,-1/4"], tmp_path, KRONECKER)
    assert json.loads(out)["integralWeight"] == [8, -3] and json.loads(out)["sameSignature"]


def test_error_exit_codes(tmp_path):
    code, _, err = cli(["check"], tmp_path, instance(matrices={"a": [[1, 0], [1, 0]]}))
    assert code == 1 and json.loads(err)["path"] == "matrices.a"
    code, _, _ = cli(["frobnicate"], tmp_path)
    assert code == 1
    data = dict(KRONECKER)
    del data["matrices"]
    code, _, err = cli(["check"], tmp_path, data)
    assert code == 1 and json.loads(err)["path"] == "matrices"


def test_indeterminate_exit_code(tmp_path, monkeypatch):
    import qmod.cli as cli_mod
    from qmod.stability import INDETERMINATE

    real = cli_mod.classify_stability

    def fake(*a, **k):
        v = real(*a, **k)
        v.verdict = INDETERMINATE
        return v

    monkeypatch.setattr(cli_mod, "classify_stability", fake)
    code, out, _ = cli(["check"], tmp_path, KRONECKER)
    assert code == 2 and json.loads(out)["verdict"] == INDETERMINATE


def test_reports_deterministic(tmp_path, monkeypatch):
    data = instance(dims={"1": 2, "2": 3}, matrices={}, weight={"1": "3", "2": "-2"})
    data["matrices"] = {
        "a": [[float(x), float(y)] for x, y in np.random.default_rng(0).standard_normal((6, 2))],
        "b": [[float(x), float(y)] for x, y in np.random.default_rng(1).standard_normal((6, 2))],
    }
    outs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv("QMOD_THREADS", threads)
        outs.append(cli(["hn", "--seed", "3"], tmp_path, data)[1])
    assert outs[0] == outs[1] == outs[2]


def test_report_round_trip(tmp_path):
    _, out, _ = cli(["check"], tmp_path, KRONECKER)
    assert io.dumps(io.loads(out)) == out.rstrip("\n")
