from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given
from hypothesis import strategies as st

from blowup_calc.farey import (
    FareyPair,
    bracket,
    complete_sequence,
    format_frac,
    haros_coeffs,
    is_adjacent,
    mediant,
    parents,
    parse_frac,
    stern_brocot_path,
)

P = FareyPair.of


def test_mediant_examples():
    assert mediant(P(0, 1), P(1, 1)) == P(1, 2)
    assert mediant(P(2, 5), P(3, 7)) == P(5, 12)
    assert mediant(FareyPair(-1, 0), P(5, 1)) == P(4, 1)


def test_bracket_examples():
    assert bracket(P(1, 2), P(2, 3)) == -1
    assert bracket(P(3, 4), P(1, 2)) == 2
    assert bracket(P(5, 7), P(5, 7)) == 0


def test_adjacency_examples():
    # 1/34 - 0/1 = 1/(1*34): neighbours, bracket -1
    assert bracket(P(0, 1), P(1, 34)) == -1 and is_adjacent(P(0, 1), P(1, 34))
    assert not is_adjacent(P(0, 1), P(2, 35))
    assert is_adjacent(P(1, 3), P(1, 4))
    assert is_adjacent(P(2, 5), P(5, 12))


def test_parents_examples():
    assert parents(P(7, 17)) == (P(2, 5), P(5, 12))
    assert parents(P(1, 2)) == (P(0, 1), P(1, 1))
    assert parents(P(5, 1)) == (P(4, 1), P(6, 1))


def test_haros_examples():
    assert haros_coeffs(P(0, 1), P(1, 1), P(7, 17)) == (10, 7)
    assert haros_coeffs(P(0, 1), P(1, 1), P(1, 2)) == (1, 1)
    assert haros_coeffs(P(1, 3), P(1, 2), P(2, 5)) == (1, 1)
    with pytest.raises(ValueError):
        haros_coeffs(P(0, 1), P(2, 3), P(1, 2))


def test_path_examples():
    path = stern_brocot_path(P(0, 1), P(1, 1), P(1, 34))
    assert len(path) == 33 and path[0] == P(1, 2) and path[-1] == P(1, 34)
    assert [str(p) for p in stern_brocot_path(P(0, 1), P(1, 1), P(21, 34))] == [
        "1/2", "2/3", "3/5", "5/8", "8/13", "13/21", "21/34"
    ]
    assert stern_brocot_path(P(9, 1), P(10, 1), P(28, 3)) == [P(19, 2), P(28, 3)]


def test_sequence_examples():
    assert complete_sequence(0, 1, 2) == [P(0, 1), P(1, 2), P(1, 1)]
    assert len(complete_sequence(0, 1, 5)) == 11
    seq = complete_sequence(0, 3, 5)
    assert all(is_adjacent(a, b) for a, b in zip(seq, seq[1:]))


def test_validation():
    with pytest.raises(ValueError):
        FareyPair(2, 4)
    with pytest.raises(ValueError):
        FareyPair(2, 0)
    with pytest.raises(ValueError):
        mediant(P(1, 2), P(1, 2))
    with pytest.raises(ValueError):
        stern_brocot_path(P(0, 1), P(1, 1), P(3, 2))


def test_infinity_ordering():
    assert FareyPair(-1, 0) < P(-10**9, 1) < P(10**9, 1) < FareyPair(1, 0)


def test_frac_text_round_trip():
    for f in [Fraction(0), Fraction(-3, 7), Fraction(28, 21)]:
        assert parse_frac(format_frac(f)) == f
    assert parse_frac(" −2/3 ") == Fraction(-2, 3)
    with pytest.raises(ValueError):
        parse_frac("1/0")


fracs = st.builds(lambda a, b: Fraction(a, b), st.integers(-60, 60), st.integers(1, 40))


@given(fracs)
def test_parents_adjacent_and_bracket(f):
    p = FareyPair.from_fraction(f)
    lo, hi = parents(p)
    assert lo < p < hi
    assert mediant(lo, hi) == p
    if p.b > 1:
        assert is_adjacent(lo, hi)
        assert hi.to_fraction() - lo.to_fraction() == Fraction(1, lo.b * hi.b)


@given(fracs)
def test_mediant_between_and_adjacent(f):
    p = FareyPair.from_fraction(f)
    lo, hi = parents(p)
    m = mediant(lo, p)
    assert lo < m < p and is_adjacent(lo, m) and is_adjacent(m, p)


def _brute_sequence(lo: int, hi: int, order: int) -> list[FareyPair]:
    vals = {Fraction(a, b) for b in range(1, order + 1) for a in range(lo * b, hi * b + 1)}
    return [FareyPair.from_fraction(v) for v in sorted(vals)]


def _mediant_closure(lo: int, hi: int, order: int) -> list[FareyPair]:
    """Integers in [lo, hi] closed under mediants with denominator <= order."""
    seq = [P(k, 1) for k in range(lo, hi + 1)]
    changed = True
    while changed:
        changed = False
        out = [seq[0]]
        for a, b in zip(seq, seq[1:]):
            if a.b + b.b <= order:
                out.append(mediant(a, b))
                changed = True
            out.append(b)
        seq = out
    return seq


@pytest.mark.parametrize("order", range(1, 13))
def test_complete_sequence_brute_force(order):
    for lo, hi in [(0, 1), (-2, 1), (0, 3)]:
        got = complete_sequence(lo, hi, order)
        assert got == _brute_sequence(lo, hi, order)
        assert got == _mediant_closure(lo, hi, order)
        assert all(is_adjacent(a, b) for a, b in zip(got, got[1:]))


def _brute_depth(target: Fraction) -> int:
    """Breadth-first mediant search from (0/1, 1/1); depth at which target appears."""
    frontier = [(P(0, 1), P(1, 1))]
    depth = 0
    while True:
        depth += 1
        nxt = []
        for a, b in frontier:
            m = mediant(a, b)
            if m.to_fraction() == target:
                return depth
            # prune: keep only intervals that can still contain the target
            if a.to_fraction() < target < m.to_fraction():
                nxt.append((a, m))
            elif m.to_fraction() < target < b.to_fraction():
                nxt.append((m, b))
        frontier = nxt


def _cf_sum(target: Fraction) -> int:
    """Sum of partial quotients of the continued fraction of target in (0, 1)."""
    total, x = 0, target
    while True:
        q = x.numerator // x.denominator
        total += q
        frac = x - q
        if frac == 0:
            return total
        x = 1 / frac


def test_stern_brocot_lengths_brute_force():
    for den in range(2, 51):
        for num in range(1, den):
            if gcd(num, den) != 1:
                continue
            t = Fraction(num, den)
            path = stern_brocot_path(P(0, 1), P(1, 1), FareyPair.from_fraction(t))
            assert len(path) == _brute_depth(t) == _cf_sum(t) - 1
