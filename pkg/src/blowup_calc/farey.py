"""Farey pairs, mediants and Stern-Brocot paths.

Everything here is integer arithmetic.  A pair ``(a, b)`` stands for the
fraction a/b; the two pairs ``(1, 0)`` and ``(-1, 0)`` are the infinite
endpoints of the Farey line.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

__all__ = [
    "FareyPair",
    "mediant",
    "bracket",
    "is_adjacent",
    "parents",
    "haros_coeffs",
    "stern_brocot_path",
    "complete_sequence",
    "parse_frac",
    "format_frac",
]


@dataclass(frozen=True)
class FareyPair:
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.b < 0:
            raise ValueError("denominator must be non-negative")
        if self.b == 0 and self.a not in (1, -1):
            raise ValueError("only 1/0 and -1/0 may have zero denominator")
        if gcd(self.a, self.b) != 1:
            raise ValueError(f"{self.a}/{self.b} is not in lowest terms")

    @classmethod
    def of(cls, a: int, b: int) -> FareyPair:
        """Reduce ``a/b`` and build the pair; the sign goes to the numerator."""
        if b == 0:
            if a == 0:
                raise ValueError("0/0 is not a Farey pair")
            return cls(1 if a > 0 else -1, 0)
        if b < 0:
            a, b = -a, -b
        g = gcd(a, b)
        return cls(a // g, b // g)

    @classmethod
    def from_fraction(cls, f: Fraction | int) -> FareyPair:
        f = Fraction(f)
        return cls(f.numerator, f.denominator)

    @property
    def is_infinite(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b == 0:
            raise ValueError("infinite pair has no rational value")
        return Fraction(self.a, self.b)

    def _key(self) -> tuple[int, Fraction]:
        if self.b == 0:
            return (self.a, Fraction(0))
        return (0, Fraction(self.a, self.b))

    def __lt__(self, other: FareyPair) -> bool:
        return self._key() < other._key()

    def __le__(self, other: FareyPair) -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: FareyPair) -> bool:
        return self._key() > other._key()

    def __ge__(self, other: FareyPair) -> bool:
        return self._key() >= other._key()

    def __str__(self) -> str:
        return f"{self.a}/{self.b}"


def mediant(p: FareyPair, q: FareyPair) -> FareyPair:
    """Farey sum (a+c)/(b+d), reduced."""
    if p == q:
        raise ValueError("mediant of a pair with itself")
    return FareyPair.of(p.a + q.a, p.b + q.b)


def bracket(p: FareyPair, q: FareyPair) -> int:
    """Determinant a*d - b*c of the two pairs."""
    return p.a * q.b - p.b * q.a


def is_adjacent(p: FareyPair, q: FareyPair) -> bool:
    return abs(bracket(p, q)) == 1


def _bezout(p: int, q: int) -> tuple[int, int]:
    """Return (a, b) with b*p - a*q = 1 and 1 <= b <= q."""
    # extended Euclid on (q, p): s*q + t*p = 1, so b = t, a = -s
    old_r, r = p, q
    old_s, s = 1, 0
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
    # old_s * p = 1 (mod q)
    b = old_s % q
    if b == 0:
        b = q
    a = (b * p - 1) // q
    return a, b


def parents(p: FareyPair) -> tuple[FareyPair, FareyPair]:
    """The two Bezout parents lo < p < hi.

    For an integer a/1 the parents are (a-1)/1 and (a+1)/1.
    """
    if p.b < 1:
        raise ValueError("parents need a finite pair")
    a, b = _bezout(p.a, p.b)
    lo = FareyPair(a, b)
    if p.b == 1:
        return lo, FareyPair(p.a + 1, 1)
    # q*c - p*d = 1 follows from b*p - a*q = 1 with (c, d) = p - lo
    hi = FareyPair(p.a - a, p.b - b)
    return lo, hi


def haros_coeffs(lo: FareyPair, hi: FareyPair, p: FareyPair) -> tuple[int, int]:
    """Positive (m, n) with m*lo + n*hi = p as integer vectors."""
    det = bracket(lo, hi)
    if abs(det) != 1:
        raise ValueError(f"{lo} and {hi} are not adjacent")
    if not (lo < p < hi):
        raise ValueError(f"{p} is not strictly between {lo} and {hi}")
    # Cramer's rule on [[lo.a, hi.a], [lo.b, hi.b]] (m, n)^T = (p.a, p.b)^T
    m = (p.a * hi.b - p.b * hi.a) // det
    n = (lo.a * p.b - lo.b * p.a) // det
    return m, n


def stern_brocot_path(lo: FareyPair, hi: FareyPair, target: FareyPair) -> list[FareyPair]:
    """Mediants visited while descending from (lo, hi) to target, inclusive."""
    if not is_adjacent(lo, hi):
        raise ValueError(f"{lo} and {hi} are not adjacent")
    if not (lo < target < hi):
        raise ValueError(f"{target} is not strictly between {lo} and {hi}")
    path = []
    while True:
        m = mediant(lo, hi)
        path.append(m)
        if m == target:
            return path
        if target < m:
            hi = m
        else:
            lo = m


def complete_sequence(lo: int, hi: int, order: int) -> list[FareyPair]:
    """All reduced fractions in [lo, hi] with denominator <= order, ascending."""
    if lo >= hi:
        raise ValueError("need lo < hi")
    if order < 1:
        raise ValueError("order must be positive")
    # classical next-term recurrence on [0, 1], shifted by each integer part
    unit = [(0, 1)]
    a, b, c, d = 0, 1, 1, order
    while c <= d:
        unit.append((c, d))
        k = (order + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    out = []
    for base in range(lo, hi):
        for num, den in unit[:-1]:
            out.append(FareyPair(num + base * den, den))
    out.append(FareyPair(hi, 1))
    return out


def parse_frac(text: str) -> Fraction:
    """Parse ``a`` or ``a/b`` into an exact fraction."""
    s = text.strip().replace("−", "-")
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad fraction {text!r}") from exc


def format_frac(f: Fraction | int) -> str:
    f = Fraction(f)
    return f"{f.numerator}/{f.denominator}"
