import numpy as np
import pytest

from conftest import a2_quiver, kron
from qmod.errors import ShapeMismatch, ZeroDimension
from qmod.quiver import Representation, direct_sum, loop_quiver, zero_representation
from qmod.stability import (
    INDETERMINATE,
    NOT_POLYSTABLE,
    POLYSTABLE,
    STABLE,
    UNSTABLE,
    classify_stability,
    structural_verdict,
)


def test_coordinate_line_stable():
    v = classify_stability(kron(1, 0), (1, -1))
    assert v.verdict == STABLE and v.dim_end == 1 and v.flags == []


def test_zero_kronecker_unstable(kq):
    v = classify_stability(zero_representation(kq, (1, 1)), (1, -1))
    assert v.verdict == UNSTABLE and v.witness.subdim == (1, 0)


def test_sum_of_stables_polystable():
    # each summand is stable of slope 0 at (1, -1)
    v = classify_stability(direct_sum([kron(1, 0), kron(0, 1)]), (1, -1))
    assert v.verdict == POLYSTABLE and v.dim_end == 2


def test_sum_at_trivial_weight_not_polystable():
    # at theta = 0 every summand has the equal-slope sub (0, 1), and the
    # Einstein-Hermitian condition at vertex 2 reads sum rho rho^* = 0
    v = classify_stability(direct_sum([kron(1, 0), kron(0, 1)]), (0, 0))
    assert v.verdict == NOT_POLYSTABLE


def test_a2_single_arrow():
    q = a2_quiver()
    iso = Representation(q, (1, 1), [[[1.0]]])
    zero = Representation(q, (1, 1), [[[0.0]]])
    assert classify_stability(iso, (1, -1)).verdict == STABLE
    assert classify_stability(iso, (-1, 1)).verdict == UNSTABLE
    assert classify_stability(zero, (1, -1)).verdict == UNSTABLE
    assert classify_stability(zero, (0, 0)).verdict == POLYSTABLE


def test_loop_quiver():
    q = loop_quiver()
    assert classify_stability(Representation(q, (1,), [[[2.5]]]), (4,)).verdict == STABLE
    assert classify_stability(Representation(q, (2,), [np.diag([1.0, 2.0])]), (0,)).verdict == POLYSTABLE
    jordan = Representation(q, (2,), [[[1.0, 1.0], [0.0, 1.0]]])
    assert classify_stability(jordan, (0,)).verdict == NOT_POLYSTABLE


def test_kronecker_larger_dimension(kq):
    gen = Representation(kq, (2, 2), {"a": np.eye(2), "b": np.diag([1.0, 2.0])})
    assert classify_stability(gen, (1, -1)).verdict == POLYSTABLE
    nil = Representation(kq, (2, 2), {"a": np.eye(2), "b": [[1.0, 1.0], [0.0, 1.0]]})
    assert classify_stability(nil, (1, -1)).verdict == NOT_POLYSTABLE


def test_structural_matches_flow(kq):
    for m in [kron(1, 0), kron(0, 0), direct_sum([kron(1, 1), kron(1, 1)])]:
        sv = structural_verdict(m, (1, -1))
        assert sv.exhaustive and sv.verdict == classify_stability(m, (1, -1)).verdict


def test_stable_means_schur(kq):
    from qmod.quiver import random_representation

    for s in range(10):
        v = classify_stability(random_representation(kq, (1, 2), seed=s), (2, -1))
        assert v.verdict != INDETERMINATE
        if v.stable:
            assert v.dim_end == 1


def test_input_errors(kq):
    with pytest.raises(ZeroDimension):
        classify_stability(zero_representation(kq, (0, 0)), (1, -1))
    with pytest.raises(ShapeMismatch):
        classify_stability(kron(1, 0), (1, -1, 0))
