"""Type I and Type II points of the Berkovich line over the Puiseux field.

A ``PointII`` is the disk point zeta(gamma, |x|^r): the closed disk of
radius |x|^r about gamma.  Larger r means a smaller disk, so the Gauss
point zeta(0, 1) has ``radius_exp == 0``.

Each datum stands for its whole Galois orbit.  With rational coefficients
the only visible conjugate of a germ of multiplicity m is the sign flip
x^(1/m) -> -x^(1/m) (m even), and equality, order and joins all treat a
germ and its flip as the same point.  Points used together should still
come from one germ tower, since other conjugates are not representable.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from math import gcd, lcm
from typing import Union

from .farey import format_frac, parse_frac
from .puiseux import INF, ParseError, PuiseuxGerm, format_germ, parse_germ

__all__ = [
    "PointI",
    "PointII",
    "INFINITY",
    "Direction",
    "TO_INFINITY",
    "TO_CENTER",
    "generic",
    "PointKind",
    "mk_pointII",
    "gauss_point",
    "invariants",
    "conjugate_germs",
    "leq",
    "lt",
    "join",
    "hyp_dist",
    "classify_point",
    "direction_mult",
    "direction_of",
    "same_direction",
    "in_tree",
    "parse_point",
    "point_to_json",
    "point_from_json",
    "sort_key",
]


def conjugate_germs(a: PuiseuxGerm, b: PuiseuxGerm) -> bool:
    """True when b is a or its rational Galois conjugate."""
    if a == b:
        return True
    m = a.multiplicity()
    return m % 2 == 0 and a.galois_flip(m) == b


def _orbit_key(g: PuiseuxGerm) -> tuple:
    m = g.multiplicity()
    if m % 2:
        return g.terms
    return min(g.terms, g.galois_flip(m).terms)


@dataclass(frozen=True, eq=False)
class PointI:
    """A Type I point: a finite germ, or infinity when ``germ`` is None."""

    germ: PuiseuxGerm | None

    @property
    def is_infinity(self) -> bool:
        return self.germ is None

    @property
    def radius_exp(self) -> float:
        return INF

    def multiplicity(self) -> int:
        return 1 if self.germ is None else self.germ.multiplicity()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointI):
            return NotImplemented
        if self.germ is None or other.germ is None:
            return self.germ is other.germ
        return conjugate_germs(self.germ, other.germ)

    def __hash__(self) -> int:
        return hash(("I", None if self.germ is None else _orbit_key(self.germ)))

    def __str__(self) -> str:
        return "inf" if self.germ is None else format_germ(self.germ)


INFINITY = PointI(None)


@dataclass(frozen=True, eq=False)
class PointII:
    """zeta(germ, |x|^radius_exp) with the germ truncated below the radius."""

    germ: PuiseuxGerm
    radius_exp: Fraction

    def __post_init__(self) -> None:
        r = Fraction(self.radius_exp)
        object.__setattr__(self, "radius_exp", r)
        object.__setattr__(self, "germ", self.germ.truncate(r))

    @cached_property
    def m(self) -> int:
        return self.germ.multiplicity()

    @cached_property
    def b(self) -> int:
        return lcm(self.m, self.radius_exp.denominator)

    @cached_property
    def a(self) -> int:
        v = self.b * self.radius_exp
        assert v.denominator == 1
        return v.numerator

    @property
    def is_free(self) -> bool:
        return self.m == self.b

    @property
    def is_integral(self) -> bool:
        return self.b == 1

    def multiplicity(self) -> int:
        return self.m

    @cached_property
    def _key(self) -> tuple:
        return (self.radius_exp, _orbit_key(self.germ))

    def key(self) -> tuple:
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointII):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        r = self.radius_exp
        rs = str(r.numerator) if r.denominator == 1 else format_frac(r)
        return f"zeta({format_germ(self.germ)}, {rs})"

    def __repr__(self) -> str:
        return f"PointII({self})"


Point = Union[PointI, PointII]


def mk_pointII(germ: PuiseuxGerm | str, r) -> PointII:
    if isinstance(germ, str):
        germ = parse_germ(germ)
    return PointII(germ, Fraction(r))


def gauss_point() -> PointII:
    return PointII(PuiseuxGerm(), Fraction(0))


def invariants(z: PointII) -> tuple[int, int, int]:
    """(m, b, a): multiplicity, generic multiplicity and b * radius."""
    return z.m, z.b, z.a


def sort_key(z: PointII) -> tuple:
    return (z.radius_exp, format_germ(z.germ))


def _germ_of(p: Point) -> PuiseuxGerm:
    if isinstance(p, PointI):
        if p.germ is None:
            raise ValueError("infinity has no germ")
        return p.germ
    return p.germ


def leq(z: Point, xi: PointII) -> bool:
    """z below xi: the disk of z lies inside the disk of xi."""
    if isinstance(z, PointI) and z.is_infinity:
        return False
    r = xi.radius_exp
    if z.radius_exp < r:
        return False
    return conjugate_germs(_germ_of(z).truncate(r), xi.germ)


def lt(z: Point, xi: PointII) -> bool:
    return leq(z, xi) and z != xi


def _agreement(g1: PuiseuxGerm, g2: PuiseuxGerm) -> Union[Fraction, float]:
    """Largest s with g1, g2 conjugate below s (the orbit valuation of g1 - g2)."""
    exps = sorted(set(g1.exponents()) | set(g2.exponents()))
    for e in exps:
        a = PuiseuxGerm(tuple(t for t in g1.terms if t[0] <= e))
        b = PuiseuxGerm(tuple(t for t in g2.terms if t[0] <= e))
        if not conjugate_germs(a, b):
            return e
    return INF


def join(z: Point, xi: Point) -> PointII:
    """Least upper bound of two finite points."""
    g1, g2 = _germ_of(z), _germ_of(xi)
    r = min(z.radius_exp, xi.radius_exp, _agreement(g1, g2))
    if r == INF:
        raise ValueError("the join of a Type I point with itself is not Type II")
    return PointII(g1, Fraction(r))


def hyp_dist(z: PointII, xi: PointII) -> Fraction:
    j = join(z, xi)
    return (z.radius_exp - j.radius_exp) + (xi.radius_exp - j.radius_exp)


class PointKind(str, enum.Enum):
    FREE = "Free"
    SATELLITE = "Satellite"


def classify_point(z: PointII) -> PointKind:
    return PointKind.FREE if z.is_free else PointKind.SATELLITE


@dataclass(frozen=True)
class Direction:
    kind: str  # "inf", "center" or "generic"
    residue: Fraction | None = None

    def __str__(self) -> str:
        if self.kind == "generic":
            return f"generic({format_frac(self.residue) if self.residue.denominator != 1 else self.residue.numerator})"
        return {"inf": "inf", "center": "center"}[self.kind]


TO_INFINITY = Direction("inf")
TO_CENTER = Direction("center")


def generic(c) -> Direction:
    c = Fraction(c)
    if c == 0:
        raise ValueError("a generic direction needs a nonzero residue")
    return Direction("generic", c)


def canonical_direction(z: PointII, d: Direction) -> Direction:
    """Residues c and -c name the same direction when b/m is even."""
    if d.kind == "generic" and (z.b // z.m) % 2 == 0:
        return Direction("generic", abs(d.residue))
    return d


def direction_mult(z: PointII, d: Direction) -> int:
    if d.kind == "inf":
        return 1
    if d.kind == "center":
        return z.m
    return z.b


def direction_of(z: PointII, target: Point) -> Direction:
    """The direction at z containing ``target``, with a canonical residue."""
    if isinstance(target, PointI) and target.is_infinity:
        return TO_INFINITY
    if target == z:
        raise ValueError("target coincides with the base point")
    if not leq(target, z):
        return TO_INFINITY
    r = z.radius_exp
    g = _germ_of(target)
    c = g.coeff(r)
    if c == 0:
        return TO_CENTER
    if g.truncate(r) != z.germ:
        # the representative sits on the flipped branch; flip it back when rational
        level = lcm(g.multiplicity(), r.denominator)
        flipped = g.galois_flip(level)
        if flipped.truncate(r) != z.germ:
            raise ValueError("target conjugate needed here has irrational coefficients")
        c = flipped.coeff(r)
    return canonical_direction(z, Direction("generic", c))


def same_direction(z: PointII, p: Point, q: Point) -> bool:
    """Whether p and q lie in one direction at z (neither equal to z)."""
    p_in, q_in = leq(p, z), leq(q, z)
    if not p_in and not q_in:
        return True
    if p_in != q_in:
        return False
    j = join(p, q)
    return lt(j, z)


def in_tree(p: Point, n: int) -> bool:
    return n % p.multiplicity() == 0


# -- text and JSON ---------------------------------------------------------

def _split_top_comma(body: str, text: str) -> tuple[str, str]:
    depth = 0
    cut = -1
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            cut = i
    if cut < 0:
        raise ParseError("expected ',' between germ and radius", text, len(text))
    return body[:cut], body[cut + 1:]


def parse_point(text: str) -> Point:
    """``zeta(<germ>, <p/q>)``, a bare germ, or ``inf``."""
    s = text.strip()
    if s == "inf":
        return INFINITY
    if s.startswith("zeta"):
        rest = s[4:].lstrip()
        if not rest.startswith("(") or not rest.endswith(")"):
            raise ParseError("expected zeta(<germ>, <radius>)", text, 0)
        germ_txt, r_txt = _split_top_comma(rest[1:-1], text)
        try:
            r = parse_frac(r_txt)
        except ValueError as exc:
            raise ParseError(f"bad radius {r_txt.strip()!r}", text, text.rfind(r_txt.strip())) from exc
        return PointII(parse_germ(germ_txt), r)
    return PointI(parse_germ(s))


def parse_pointII(text: str) -> PointII:
    p = parse_point(text)
    if not isinstance(p, PointII):
        raise ParseError("expected a Type II point zeta(<germ>, <radius>)", text, 0)
    return p


def point_to_json(z: PointII) -> dict:
    return {"germ": format_germ(z.germ), "radius_exp": str(z.radius_exp)}


def point_from_json(obj) -> PointII:
    if isinstance(obj, str):
        return parse_pointII(obj)
    return PointII(parse_germ(obj["germ"]), parse_frac(str(obj["radius_exp"])))


def dumps_point(z: PointII) -> str:
    return json.dumps(point_to_json(z))


def coprime_check(z: PointII) -> bool:
    """gcd(a, b/m) == 1, which always holds for a disk point."""
    return gcd(z.a, z.b // z.m) == 1
