import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qmod.facets import enumerate_S_d, facet_signature, integral_weight_in_facet
from qmod.line_bundle import LineBundleData, character_chi
from qmod.quiver import Representation, SubrepWitness, dim_end, direct_sum, kronecker_quiver, random_representation, subquotient
from qmod.stability import classify_stability
from qmod.weight import Weight, king_lambda

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def dims_strategy(n):
    return st.lists(st.integers(0, 3), min_size=n, max_size=n).filter(lambda d: sum(d) > 0)


@st.composite
def weight_and_dims(draw, n=None):
    n = n or draw(st.integers(1, 3))
    return Weight(draw(st.lists(rationals, min_size=n, max_size=n))), tuple(draw(dims_strategy(n)))


def seesaw_class(a, b, c):
    """Which of the three seesaw alternatives the slopes follow (None if mixed)."""
    s1 = (a > b) - (a < b)
    s2 = (b > c) - (b < c)
    return s1 if s1 == s2 else None


@st.composite
def short_exact_sequence(draw):
    """``0 -> A -> B -> C -> 0`` on the Kronecker quiver with a random extension class."""
    q = kronecker_quiver()
    da = tuple(draw(dims_strategy(2)))
    dc = tuple(draw(dims_strategy(2)))
    seed = draw(st.integers(0, 2**31))
    a = random_representation(q, da, seed=seed)
    c = random_representation(q, dc, seed=seed + 1)
    rng = np.random.default_rng(seed + 2)
    b = direct_sum([a, c])
    mats = []
    for m in b.mats:
        m = m.copy()
        m[: da[1], da[0]:] = rng.standard_normal((da[1], dc[0]))
        mats.append(m)
    b = Representation(q, b.dims, mats)
    return a, b, c


@given(short_exact_sequence(), st.lists(rationals, min_size=2, max_size=2))
def test_seesaw(ses, theta):
    a, b, c = ses
    theta = Weight(theta)
    w = SubrepWitness(b, [np.eye(b.dims[v])[:, : a.dims[v]] for v in range(2)])
    # the first summand is a subrepresentation with quotient C
    sub, quot = subquotient(b, w)
    assert sub.dims == a.dims and quot.dims == c.dims
    assert seesaw_class(theta.slope(a.dims), theta.slope(b.dims), theta.slope(c.dims)) is not None


@given(weight_and_dims(), weight_and_dims(), st.fractions(min_value=0, max_value=1))
def test_facet_convexity(p, q, t):
    (theta, d), (omega, _) = p, q
    if len(omega) != len(theta):
        return
    sig = facet_signature(theta, d)
    if facet_signature(omega, d) != sig:
        omega = theta.scaled(3)
    mid = Weight(t * x + (1 - t) * y for x, y in zip(theta, omega))
    assert facet_signature(mid, d) == sig


@given(weight_and_dims())
def test_integral_weight_signature(p):
    theta, d = p
    w = integral_weight_in_facet(theta, d)
    assert w.is_integral() and facet_signature(w, d) == facet_signature(theta, d)


@given(weight_and_dims())
def test_king_functional(p):
    theta, d = p
    mu = theta.slope(d)
    lam = king_lambda(theta, mu)
    assert lam(d) == 0
    for e in enumerate_S_d(d):
        if sum(e):
            assert (theta.slope(e) <= mu) == (lam(e) >= 0)


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.fractions(min_value="1/3", max_value=4, max_denominator=6), rationals)
def test_stability_invariant_under_shift_and_scale(seed, c, shift):
    m = random_representation(kronecker_quiver(), (1, 2), seed=seed)
    theta = Weight((2, -1))
    other = Weight(c * x + shift for x in theta)
    assert classify_stability(m, theta).verdict == classify_stability(m, other).verdict


@given(st.lists(rationals, min_size=2, max_size=2), st.integers(0, 10**6))
def test_character_multiplicative(theta, seed):
    data = LineBundleData.of(Weight(theta), (2, 1))
    rng = np.random.default_rng(seed)

    def g():
        return [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for d in (2, 1)]

    g1, g2 = g(), g()
    prod = [a @ b for a, b in zip(g1, g2)]
    lhs = character_chi(prod, data)
    rhs = character_chi(g1, data) * character_chi(g2, data)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


@given(dims_strategy(2), dims_strategy(2), st.integers(0, 10**6), st.lists(rationals, min_size=2, max_size=2))
def test_direct_sum_slope_between(d1, d2, seed, theta):
    q = kronecker_quiver()
    a = random_representation(q, d1, seed=seed)
    b = random_representation(q, d2, seed=seed + 1)
    s = direct_sum([a, b])
    theta = Weight(theta)
    assert s.dims == tuple(x + y for x, y in zip(d1, d2))
    lo, hi = sorted([theta.slope(d1), theta.slope(d2)])
    assert lo <= theta.slope(s.dims) <= hi
    assert dim_end(s) >= dim_end(a) + dim_end(b)


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 3)]))
def test_stable_is_schur(seed, d):
    m = random_representation(kronecker_quiver(), d, seed=seed)
    v = classify_stability(m, (d[1], -d[0]) if d != (1, 1) else (1, -1))
    if v.stable:
        assert dim_end(m) == 1
