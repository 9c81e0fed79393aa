from fractions import Fraction as F
from math import gcd

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from blowup_calc.berkovich import (
    INFINITY,
    TO_CENTER,
    TO_INFINITY,
    PointI,
    PointII,
    PointKind,
    classify_point,
    direction_mult,
    direction_of,
    gauss_point,
    generic,
    hyp_dist,
    in_tree,
    invariants,
    join,
    leq,
    lt,
    mk_pointII,
    parse_point,
    point_from_json,
    point_to_json,
    same_direction,
)
from blowup_calc.puiseux import PuiseuxGerm, parse_germ

G = parse_germ


def Z(g: str, r) -> PointII:
    return mk_pointII(G(g), F(r))


def test_mk_point_truncates():
    z = mk_pointII(G("x^(5/7) + x + x^(4/3) + x^2"), F(3, 2))
    assert z.germ == G("x^(5/7) + x + x^(4/3)") and z.radius_exp == F(3, 2)
    assert Z("0", 0) == gauss_point()
    assert Z("x^(1/2)", F(1, 2)).germ.is_zero


def test_invariants_examples():
    assert invariants(Z("0", F(5, 7))) == (1, 7, 5)
    assert invariants(Z("x^(5/7) + x", F(4, 3))) == (7, 21, 28)
    assert invariants(Z("x^(1/6)", F(5, 9))) == (6, 18, 10)


def test_leq_examples():
    assert leq(Z("0", 1), Z("0", 0))
    assert leq(Z("x^(5/7)", 1), Z("0", F(5, 7)))
    assert not leq(Z("0", 1), Z("1", 1))
    assert leq(PointI(G("x^2")), Z("0", 1))
    assert not lt(Z("0", 1), Z("0", 1))


def test_join_examples():
    assert join(Z("0", 1), Z("1", 1)) == Z("0", 0)
    assert join(PointI(G("x^(1/2)")), PointI(G("2*x^(1/2)"))) == Z("0", F(1, 2))
    z = Z("x^(5/7)", 2)
    assert join(z, z) == z


def test_hyp_dist_examples():
    assert hyp_dist(Z("0", 0), Z("0", 1)) == 1
    assert hyp_dist(Z("0", F(1, 2)), Z("1", F(1, 2))) == 1
    # adjacent pairs: d(E, F) = m(E) / (b(E) b(F)), E the larger point
    for e, f in [
        (Z("0", 0), Z("0", 1)),
        (Z("0", F(1, 2)), Z("0", 1)),
        (Z("0", F(1, 2)), Z("0", F(2, 3))),
        (Z("x^(1/2)", 1), Z("x^(1/2)", F(3, 2))),
    ]:
        assert hyp_dist(e, f) == F(e.m, e.b * f.b)


def test_classify_and_direction_mult():
    z = Z("0", F(5, 7))
    assert classify_point(z) == PointKind.SATELLITE
    assert direction_mult(z, generic(1)) == 7
    assert classify_point(Z("x^(5/7)", F(6, 7))) == PointKind.FREE
    w = Z("x^(5/7)", F(6, 7))
    assert direction_mult(w, TO_INFINITY) == 1 and direction_mult(w, TO_CENTER) == 7
    g = gauss_point()
    assert classify_point(g) == PointKind.FREE
    assert {direction_mult(g, d) for d in (TO_INFINITY, TO_CENTER, generic(3))} == {1}


def test_direction_of_examples():
    z = Z("0", F(5, 7))
    assert direction_of(z, PointI(G("x^(5/7)"))) == generic(1)
    assert direction_of(gauss_point(), INFINITY) == TO_INFINITY
    assert direction_of(z, PointI(G("0"))) == TO_CENTER
    assert direction_of(z, Z("0", 0)) == TO_INFINITY
    with pytest.raises(ValueError):
        direction_of(z, z)


def test_generic_residue_sign_collapses_on_even_ratio():
    # b/m = 2 at zeta(0, |x|^(1/2)): c and -c are conjugate
    z = Z("0", F(1, 2))
    assert direction_of(z, PointI(G("-3*x^(1/2)"))) == direction_of(z, PointI(G("3*x^(1/2)")))
    w = Z("0", F(1, 3))
    assert direction_of(w, PointI(G("-x^(1/3)"))) != direction_of(w, PointI(G("x^(1/3)")))


def test_galois_conjugates_are_equal():
    assert Z("x^(1/2)", 1) == Z("-x^(1/2)", 1)
    assert hash(Z("x^(1/2)", 1)) == hash(Z("-x^(1/2)", 1))
    assert Z("x^(1/3)", 1) != Z("-x^(1/3)", 1)


def test_in_tree_examples():
    assert in_tree(Z("0", F(5, 7)), 7)
    assert not in_tree(PointI(G("x^(1/2)")), 3)
    assert in_tree(Z("x^(5/7) + x", F(4, 3)), 14)


def test_same_direction():
    g = gauss_point()
    assert same_direction(g, Z("0", 1), Z("x", 2))
    assert not same_direction(g, Z("0", 1), Z("1", 1))
    assert same_direction(g, INFINITY, Z("x^(-2)", -1))


def test_text_and_json_round_trip():
    for s in ["zeta(0, 0)", "zeta(x^(5/7) + x, 4/3)", "zeta(-x^(1/2), 1)"]:
        z = parse_point(s)
        assert parse_point(str(z)) == z
        assert point_from_json(point_to_json(z)) == z
    assert parse_point("inf") == INFINITY


# -- properties ---------------------------------------------------------------

exps = st.builds(F, st.integers(-4, 20), st.integers(1, 8))
coeffs = st.sampled_from([F(1), F(-1), F(2), F(1, 2), F(-3)])
germs = st.lists(st.tuples(exps, coeffs), max_size=4).map(PuiseuxGerm.from_terms)
radii = st.builds(F, st.integers(-8, 30), st.integers(1, 9))
points = st.builds(mk_pointII, germs, radii)


@given(points)
def test_invariant_laws(z):
    m, b, a = invariants(z)
    assert b % m == 0
    assert F(a, b) == z.radius_exp
    assert gcd(a, b // m) == 1
    assert z.is_free == (m == b)


@given(germs, radii, radii)
def test_multiplicity_reverses_order(g, r1, r2):
    lo, hi = mk_pointII(g, max(r1, r2)), mk_pointII(g, min(r1, r2))
    assert leq(lo, hi)
    assert lo.m % hi.m == 0


@given(points, points)
def test_join_laws(z, w):
    j = join(z, w)
    assert join(z, z) == z
    assert j == join(w, z)
    assert leq(z, j) and leq(w, j)
    # nothing strictly below the join on the segment towards z still contains w
    if j != z and j != w:
        assert not leq(w, mk_pointII(z.germ, j.radius_exp + F(1, 1000)))


@given(germs, radii, radii, radii)
def test_hyp_dist_additive_along_chains(g, r1, r2, r3):
    r_lo, r_mid, r_hi = sorted([r1, r2, r3], reverse=True)
    a, b, c = (mk_pointII(g, r) for r in (r_lo, r_mid, r_hi))
    assert leq(a, b) and leq(b, c)
    assert hyp_dist(a, c) == hyp_dist(a, b) + hyp_dist(b, c)
    assert hyp_dist(a, c) >= 0 and (hyp_dist(a, c) == 0) == (a == c)


@given(points, points)
def test_hyp_dist_symmetric(z, w):
    assert hyp_dist(z, w) == hyp_dist(w, z)


@given(germs, st.builds(F, st.integers(1, 12), st.integers(1, 6)))
def test_segment_multiplicity_constant(g, step):
    assume(not g.is_zero)
    top = max(g.exponents())
    assert mk_pointII(g, top + step).m == g.multiplicity()
