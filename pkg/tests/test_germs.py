import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parafatou.errors import (
    ChartMismatch,
    NewtonDiverged,
    NonFiniteValue,
    NonvanishingConstant,
    NotNormalized,
    NotTangentToIdentity,
)
from parafatou.expressions import parse_expr, to_series2
from parafatou.germs import (
    Germ1D,
    Point2,
    SkewGerm2D,
    fiber_limit_map,
    make_germ1d,
    make_skew_germ,
    reciprocal_transport,
    to_infinity,
    to_origin,
)
from parafatou.series import INFINITY, ORIGIN


def special_map(order=12):
    return make_skew_germ("z/(1+z)", "w - w^2 + w^3", order)


def translation_at_infinity(fiber="w + 1", order=8):
    base = make_germ1d("z + 1", order, chart=INFINITY)
    return SkewGerm2D(base, fiber, None, chart=INFINITY, check=False)


def test_point_aliases():
    p = Point2(1 + 2j, 3j, INFINITY)
    assert p.u == 1 + 2j and p.v == 3j
    assert p.as_tuple() == (1 + 2j, 3j)


def test_evaluate_rational_example():
    F = make_skew_germ("z/(1+z)", "w - w^2", 8)
    q = F.evaluate(Point2(0.1, 0.1))
    assert abs(q.z - 0.1 / 1.1) < 1e-15
    assert abs(q.w - 0.09) < 1e-15
    assert F.evaluate(Point2(0, 0)).as_tuple() == (0, 0)


def test_evaluate_translation():
    G = translation_at_infinity()
    q = G.evaluate(Point2(5, 7, INFINITY))
    assert q.as_tuple() == (6, 8)
    assert q.chart == INFINITY


def test_evaluate_chart_mismatch():
    F = special_map()
    with pytest.raises(ChartMismatch):
        F.evaluate(Point2(0.1, 0.1, INFINITY))


def test_evaluate_nonfinite_at_pole():
    F = make_skew_germ("z/(1+z)", "w - w^2", 8)
    with pytest.raises(NonFiniteValue):
        F.evaluate(Point2(-1.0, 0.1))


def test_skew_invariance_first_coordinate_bit_identical():
    F = special_map()
    z0 = 0.031 + 0.007j
    first = F.evaluate(Point2(z0, 0.001)).z
    rng = np.random.default_rng(7)
    for _ in range(100):
        w = (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.04
        assert F.evaluate(Point2(z0, w)).z == first


def test_local_inverse_translation():
    G = translation_at_infinity()
    q = G.local_inverse(Point2(6, 8, INFINITY))
    assert abs(q.z - 5) < 1e-12 and abs(q.w - 7) < 1e-12


def test_local_inverse_round_trip():
    F = make_skew_germ("z/(1+z)", "w - w^2", 8)
    p = F.evaluate(Point2(0.1, 0.1))
    q = F.local_inverse(p, guess=Point2(0.1, 0.1))
    assert abs(q.z - 0.1) < 1e-12 and abs(q.w - 0.1) < 1e-12
    assert F.local_inverse(Point2(0, 0)).as_tuple() == (0, 0)


def test_evaluate_after_inverse_identity():
    F = special_map()
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = Point2(
            (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.05,
            (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.05,
        )
        q = F.local_inverse(p)
        r = F.evaluate(q)
        assert abs(r.z - p.z) < 1e-10 and abs(r.w - p.w) < 1e-10


def test_newton_diverged_flat_fiber():
    F = make_skew_germ("z/(1+z)", "w - w^2", 8)
    with pytest.raises(NewtonDiverged) as exc:
        F.local_inverse(Point2(0.01, 10.0), guess=Point2(0.01, 0.5))
    assert exc.value.last_value is not None


def test_newton_diverged_unreachable_base_target():
    F = make_skew_germ("z/(1+z)", "w - w^2", 8)
    with pytest.raises(NewtonDiverged):
        F.local_inverse(Point2(1.0, 0.0), guess=Point2(1.0, 0.0))


def test_constructor_validation():
    with pytest.raises(NotTangentToIdentity):
        make_skew_germ("2*z", "w - w^2", 6)
    with pytest.raises(NonvanishingConstant):
        make_skew_germ("z - z^2", "0.5 + w - w^2", 6)
    with pytest.raises(NotTangentToIdentity):
        make_skew_germ("z - z^2", "w + z - w^2", 6)


def test_to_infinity_requires_normalized_coefficients():
    F = make_skew_germ("z - z^2", "w - 0.7*w^2", 8)
    with pytest.raises(NotNormalized):
        to_infinity(F)


def test_to_infinity_special_base_exact_translation():
    G = to_infinity(special_map())
    assert G.chart == INFINITY
    u = 12345.5 + 17j
    assert G.first(u) == u + 1
    assert G.first.jet.coeffs[0] == 1
    assert all(c == 0 for c in G.first.jet.coeffs[1:])


def test_to_infinity_quadratic_pair_all_ones():
    F = make_skew_germ("z - z^2", "w - w^2", 10)
    G = to_infinity(F)
    np.testing.assert_allclose(
        np.array(G.first.jet.coeffs, dtype=complex),
        np.ones(len(G.first.jet.coeffs)),
        atol=1e-12,
    )
    ginf = fiber_limit_map(G, order=6)
    np.testing.assert_allclose(
        np.array(ginf.jet.coeffs, dtype=complex), np.ones(7), atol=1e-12
    )


def test_to_infinity_round_trip_pointwise():
    F = special_map()
    G = to_infinity(F)
    p = Point2(0.01, 0.01)
    q = G.evaluate(Point2(1 / p.z, 1 / p.w, INFINITY))
    direct = F.evaluate(p)
    assert abs(1 / q.z - direct.z) < 1e-12
    assert abs(1 / q.w - direct.w) < 1e-12


def test_chart_transport_involution():
    F = make_skew_germ("z - z^2", "w - w^2 + z^2*w^2", 10)
    F2 = to_origin(to_infinity(F))
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = Point2(
            (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.04,
            (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.04,
        )
        a = F.evaluate(p)
        b = F2.evaluate(p)
        assert abs(a.z - b.z) < 1e-10 and abs(a.w - b.w) < 1e-10


def test_reciprocal_transport_involution():
    e = parse_expr("z/(1+z)")
    twice = reciprocal_transport(reciprocal_transport(e))
    x = 0.37 + 0.12j
    from parafatou.expressions import ev

    assert abs(ev(twice, {"z": x}) - ev(e, {"z": x})) < 1e-14


def test_fiber_limit_translation():
    G = translation_at_infinity("w + 1")
    g = fiber_limit_map(G)
    assert g.chart == INFINITY
    assert abs(g(3.7 + 0.4j) - (4.7 + 0.4j)) < 1e-14
    assert abs(g.jet.coeffs[0] - 1) < 1e-14
    assert all(abs(c) < 1e-14 for c in g.jet.coeffs[1:])


def test_fiber_limit_drops_base_terms():
    G = translation_at_infinity("w + 1 + 1/z")
    g = fiber_limit_map(G)
    v = 5.5 - 2j
    assert abs(g(v) - (v + 1)) < 1e-14

    G2 = translation_at_infinity("w + 1 + 1/w + w/z^4")
    g2 = fiber_limit_map(G2, order=6)
    v = 100 + 3j
    assert abs(g2(v) - (v + 1 + 1 / v)) < 1e-13
    np.testing.assert_allclose(
        np.array(g2.jet.coeffs, dtype=complex),
        [1, 1, 0, 0, 0, 0, 0],
        atol=1e-13,
    )


def test_fiber_limit_of_transported_cubic():
    # w - w^2 + w^3 transported to infinity has the period 6 tail.
    G = to_infinity(special_map())
    g = fiber_limit_map(G, order=7)
    np.testing.assert_allclose(
        np.array(g.jet.coeffs, dtype=complex),
        [1, 0, -1, -1, 0, 1, 1, 0],
        atol=1e-12,
    )


def test_fiber_limit_mixed_term():
    F = make_skew_germ("z - z^2", "w - w^2 + z^2*w^2", 10)
    g = fiber_limit_map(to_infinity(F), order=5)
    np.testing.assert_allclose(
        np.array(g.jet.coeffs, dtype=complex), np.ones(6), atol=1e-12
    )


def test_germ1d_local_inverse_scalar():
    lam = make_germ1d("z/(1+z)", 8)
    y = lam(0.07)
    x = lam.local_inverse(y)
    assert abs(x - 0.07) < 1e-13


def test_jet2_matches_series_expansion():
    F = make_skew_germ("z - z^2", "w - w^2 + z^2*w^2", 9)
    ref = to_series2(parse_expr("w - w^2 + z^2*w^2"), 9)
    assert np.array_equal(F.jet2.coeffs, ref.coeffs)
    assert F.a2 == -1 and F.b2 == -1


@settings(max_examples=40, deadline=None)
@given(
    st.complex_numbers(max_magnitude=0.05, allow_nan=False,
                       allow_infinity=False),
    st.complex_numbers(max_magnitude=0.05, allow_nan=False,
                       allow_infinity=False),
)
def test_inverse_round_trip_property(z, w):
    F = special_map.cached if hasattr(special_map, "cached") else None
    if F is None:
        F = special_map()
        special_map.cached = F
    p = Point2(z, w)
    q = F.local_inverse(p)
    r = F.evaluate(q)
    assert abs(r.z - p.z) < 1e-10
    assert abs(r.w - p.w) < 1e-10
