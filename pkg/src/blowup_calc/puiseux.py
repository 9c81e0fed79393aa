"""Finite Puiseux series with rational coefficients.

A ``PuiseuxGerm`` is an exact finite sum of terms c*x^q.  A ``PuiseuxJet``
is a germ together with a truncation order N, meaning the value is only
known modulo O(x^N).  Jets with ``order=None`` are exact.

Coefficients live in the rationals, so fractional powers of a leading
coefficient are only available when the root is itself rational.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Union

__all__ = [
    "INF",
    "ParseError",
    "IrrationalError",
    "PuiseuxGerm",
    "PuiseuxJet",
    "add",
    "sub",
    "mul",
    "valuation",
    "multiplicity",
    "truncate",
    "pow_rational",
    "substitute",
    "invert_series",
    "reciprocal",
    "divide",
    "rational_root",
    "parse_germ",
    "parse_jet",
]

INF = math.inf

# runaway exponent denominators usually mean a user error in iterated substitution
MAX_EXPONENT_DENOMINATOR = 10_000


class ParseError(ValueError):
    """Raised with the offending token and its position."""

    def __init__(self, message: str, text: str = "", pos: int = -1) -> None:
        if pos >= 0:
            message = f"{message} at position {pos} in {text!r}"
        super().__init__(message)
        self.pos = pos


class IrrationalError(ValueError):
    """A root needed by the computation has no rational value."""


def _q(v: Union[int, Fraction, str]) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class PuiseuxGerm:
    """Exact finite Puiseux series; ``terms`` is sorted by exponent."""

    terms: tuple[tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def from_terms(cls, items: Iterable[tuple[Fraction, Fraction]] | Mapping) -> PuiseuxGerm:
        acc: dict[Fraction, Fraction] = {}
        pairs = items.items() if isinstance(items, Mapping) else items
        for e, c in pairs:
            e, c = _q(e), _q(c)
            if e.denominator > MAX_EXPONENT_DENOMINATOR:
                raise ValueError(f"exponent denominator {e.denominator} exceeds guard")
            acc[e] = acc.get(e, Fraction(0)) + c
        return cls(tuple(sorted((e, c) for e, c in acc.items() if c != 0)))

    @classmethod
    def monomial(cls, c: Union[int, Fraction] = 1, e: Union[int, Fraction] = 0) -> PuiseuxGerm:
        return cls.from_terms([(e, c)])

    @classmethod
    def const(cls, c: Union[int, Fraction]) -> PuiseuxGerm:
        return cls.monomial(c, 0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict[Fraction, Fraction]:
        return dict(self.terms)

    def exponents(self) -> list[Fraction]:
        return [e for e, _ in self.terms]

    def coeff(self, e: Union[int, Fraction]) -> Fraction:
        e = _q(e)
        for k, c in self.terms:
            if k == e:
                return c
        return Fraction(0)

    def valuation(self) -> Union[Fraction, float]:
        return self.terms[0][0] if self.terms else INF

    def lead(self) -> tuple[Fraction, Fraction]:
        if not self.terms:
            raise ValueError("zero germ has no leading term")
        return self.terms[0]

    @cached_property
    def _mult(self) -> int:
        return lcm(1, *(e.denominator for e, _ in self.terms))

    def multiplicity(self) -> int:
        return self._mult

    def truncate(self, r: Union[int, Fraction, float]) -> PuiseuxGerm:
        return PuiseuxGerm(tuple(t for t in self.terms if t[0] < r))

    def shift(self, e: Union[int, Fraction]) -> PuiseuxGerm:
        """Multiply by x^e."""
        e = _q(e)
        return PuiseuxGerm(tuple((k + e, c) for k, c in self.terms))

    def scale_exponents(self, k: Union[int, Fraction]) -> PuiseuxGerm:
        """Substitute x -> x^k for a positive rational k."""
        k = _q(k)
        if k <= 0:
            raise ValueError("exponent scale must be positive")
        return PuiseuxGerm.from_terms((e * k, c) for e, c in self.terms)

    def galois_flip(self, level: int | None = None) -> PuiseuxGerm:
        """Apply x^(1/level) -> -x^(1/level); level defaults to the multiplicity.

        Requires every exponent to have denominator dividing ``level``.
        """
        level = self.multiplicity() if level is None else level
        out = []
        for e, c in self.terms:
            k = e * level
            if k.denominator != 1:
                raise ValueError("level is not a multiple of the multiplicity")
            out.append((e, -c if k.numerator % 2 else c))
        return PuiseuxGerm(tuple(out))

    def __add__(self, other: PuiseuxGerm) -> PuiseuxGerm:
        if not isinstance(other, PuiseuxGerm):
            other = PuiseuxGerm.const(other)
        return PuiseuxGerm.from_terms(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> PuiseuxGerm:
        return PuiseuxGerm(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: PuiseuxGerm) -> PuiseuxGerm:
        if not isinstance(other, PuiseuxGerm):
            other = PuiseuxGerm.const(other)
        return self + (-other)

    def __rsub__(self, other) -> PuiseuxGerm:
        return (-self) + other

    def __mul__(self, other) -> PuiseuxGerm:
        if not isinstance(other, PuiseuxGerm):
            c = _q(other)
            return PuiseuxGerm.from_terms((e, k * c) for e, k in self.terms)
        return PuiseuxGerm.from_terms(
            (e1 + e2, c1 * c2) for e1, c1 in self.terms for e2, c2 in other.terms
        )

    __rmul__ = __mul__

    def __pow__(self, k: int) -> PuiseuxGerm:
        if not isinstance(k, int) or k < 0:
            raise ValueError("germ powers must be non-negative integers")
        out = PuiseuxGerm.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __str__(self) -> str:
        return format_germ(self)

    def __repr__(self) -> str:
        return f"PuiseuxGerm({format_germ(self)!r})"


@dataclass(frozen=True)
class PuiseuxJet:
    """A germ known modulo O(x^order); ``order=None`` means exact."""

    germ: PuiseuxGerm
    order: Fraction | None = None

    def __post_init__(self) -> None:
        if self.order is not None:
            object.__setattr__(self, "order", _q(self.order))
            if any(e >= self.order for e, _ in self.germ.terms):
                object.__setattr__(self, "germ", self.germ.truncate(self.order))

    @property
    def exact(self) -> bool:
        return self.order is None

    def valuation(self) -> Union[Fraction, float]:
        if self.germ.is_zero:
            if self.order is None:
                return INF
            raise ValueError(f"jet is zero up to O(x^{self.order}); valuation unknown")
        return self.germ.valuation()

    def lower_bound(self) -> Union[Fraction, float]:
        """Valuation, or the order when the known part is zero."""
        if self.germ.is_zero:
            return INF if self.order is None else self.order
        return self.germ.valuation()

    def with_order(self, order: Fraction | None) -> PuiseuxJet:
        return PuiseuxJet(self.germ, _min_order(self.order, order))

    def __add__(self, other) -> PuiseuxJet:
        return add(self, other)

    def __sub__(self, other) -> PuiseuxJet:
        return sub(self, other)

    def __mul__(self, other) -> PuiseuxJet:
        return mul(self, other)

    def __neg__(self) -> PuiseuxJet:
        return PuiseuxJet(-self.germ, self.order)

    def __str__(self) -> str:
        return format_jet(self)

    def __repr__(self) -> str:
        return f"PuiseuxJet({format_jet(self)!r})"


Series = Union[PuiseuxGerm, PuiseuxJet]


def as_jet(a: Series | int | Fraction) -> PuiseuxJet:
    if isinstance(a, PuiseuxJet):
        return a
    if isinstance(a, PuiseuxGerm):
        return PuiseuxJet(a, None)
    return PuiseuxJet(PuiseuxGerm.const(a), None)


def _min_order(*orders) -> Fraction | None:
    known = [o for o in orders if o is not None and o != INF]
    return min(known) if known else None


def add(a: Series, b: Series) -> PuiseuxJet:
    a, b = as_jet(a), as_jet(b)
    return PuiseuxJet(a.germ + b.germ, _min_order(a.order, b.order))


def sub(a: Series, b: Series) -> PuiseuxJet:
    a, b = as_jet(a), as_jet(b)
    return PuiseuxJet(a.germ - b.germ, _min_order(a.order, b.order))


def mul(a: Series, b: Series) -> PuiseuxJet:
    a, b = as_jet(a), as_jet(b)
    if (a.exact and a.germ.is_zero) or (b.exact and b.germ.is_zero):
        return PuiseuxJet(PuiseuxGerm(), None)
    orders = []
    if a.order is not None:
        orders.append(a.order + b.lower_bound())
    if b.order is not None:
        orders.append(b.order + a.lower_bound())
    return PuiseuxJet(a.germ * b.germ, _min_order(*orders))


def valuation(a: Series) -> Union[Fraction, float]:
    return a.valuation()


def multiplicity(a: Series) -> int:
    g = a.germ if isinstance(a, PuiseuxJet) else a
    return g.multiplicity()


def truncate(a: Series, r) -> PuiseuxGerm:
    g = a.germ if isinstance(a, PuiseuxJet) else a
    return g.truncate(r)


def _iroot(n: int, k: int) -> int | None:
    """Exact non-negative integer k-th root of n, or None."""
    if n < 0:
        return None
    if n < 2:
        return n
    r = int(round(n ** (1.0 / k))) if n.bit_length() < 1000 else 1 << (n.bit_length() // k + 1)
    # Newton iteration from above
    r = max(r, 1)
    while True:
        nr = ((k - 1) * r + n // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def rational_root(c: Fraction, q: Fraction) -> Fraction:
    """c**q for rational q, when the result is rational (principal branch)."""
    c, q = _q(c), _q(q)
    if q.denominator == 1:
        return c ** q.numerator
    if c <= 0:
        raise IrrationalError(f"no principal rational root of {c} to the power {q}")
    k = q.denominator
    num, den = _iroot(c.numerator, k), _iroot(c.denominator, k)
    if num is None or den is None:
        raise IrrationalError(f"{c}^(1/{k}) is irrational")
    return Fraction(num, den) ** q.numerator


def _split_unit(u: PuiseuxJet) -> PuiseuxJet:
    """Return h with u = 1 + h; u must have constant term 1."""
    if u.germ.is_zero or u.germ.terms[0] != (Fraction(0), Fraction(1)):
        raise ValueError("unit series must have constant term 1")
    return PuiseuxJet(PuiseuxGerm(u.germ.terms[1:]), u.order)


def pow_rational(u: Series, q, order=None) -> PuiseuxJet:
    """(1 + h)^q by the binomial series, truncated at the jet order."""
    u = as_jet(u)
    q = _q(q)
    h = _split_unit(u)
    target = _min_order(u.order, None if order is None else _q(order))
    if q == 0:
        return PuiseuxJet(PuiseuxGerm.const(1), None)
    if h.germ.is_zero and h.exact:
        return PuiseuxJet(PuiseuxGerm.const(1), None)
    if target is None:
        if q.denominator == 1 and q > 0:
            return PuiseuxJet(u.germ ** q.numerator, None)
        raise ValueError("an exact non-polynomial power needs an explicit order")
    if h.germ.is_zero:
        return PuiseuxJet(PuiseuxGerm.const(1), target)
    if q.denominator == 1 and q > 0 and h.exact:
        return PuiseuxJet((u.germ ** q.numerator).truncate(target), target)
    return PuiseuxJet(_miller_power(h.germ, q, target), target)


def _miller_power(h: PuiseuxGerm, q: Fraction, target: Fraction) -> PuiseuxGerm:
    """(1 + h)^q below ``target`` via the J.C.P. Miller recurrence on the exponent lattice."""
    terms = [(e, c) for e, c in h.terms if e < target]
    M = 1
    for e, _ in terms:
        M = math.lcm(M, e.denominator)
    N = math.ceil(target * M)  # lattice indices k with k/M < target
    a = [Fraction(0)] * N
    a[0] = Fraction(1)
    for e, c in terms:
        a[int(e * M)] = c
    nz = [j for j in range(1, N) if a[j]]
    w = [Fraction(0)] * N
    w[0] = Fraction(1)
    q1 = q + 1
    for k in range(1, N):
        acc = Fraction(0)
        for j in nz:
            if j > k:
                break
            if w[k - j]:
                acc += (q1 * j - k) * a[j] * w[k - j]
        w[k] = acc / k
    return PuiseuxGerm.from_terms((Fraction(k, M), c) for k, c in enumerate(w) if c)


def reciprocal(a: Series, order=None) -> PuiseuxJet:
    """1/a, known to absolute order ``order`` (or the natural order of a)."""
    a = as_jet(a)
    v, c = a.germ.lead() if not a.germ.is_zero else (None, None)
    if v is None:
        raise ZeroDivisionError("reciprocal of a zero series")
    unit = PuiseuxJet(a.germ.shift(-v) * (1 / c), None if a.order is None else a.order - v)
    rel = None if order is None else _q(order) + v
    if rel is not None and rel <= 0:
        return PuiseuxJet(PuiseuxGerm(), _q(order))
    inv = pow_rational(unit, -1, rel)
    out = PuiseuxJet(inv.germ.shift(-v) * (1 / c), None if inv.order is None else inv.order - v)
    return out


def divide(a: Series, b: Series, order=None) -> PuiseuxJet:
    a, b = as_jet(a), as_jet(b)
    if a.exact and a.germ.is_zero:
        return PuiseuxJet(PuiseuxGerm(), None)
    rel = None
    if order is not None:
        # 1/b is needed to order - val(a)
        rel = _q(order) - a.lower_bound()
    out = mul(a, reciprocal(b, rel))
    return out if order is None else out.with_order(_q(order))


def substitute(f: Series, g: Series, order=None) -> PuiseuxJet:
    """f(g(x)) for val(g) > 0, mapping x^e to c0^e x^(v e) (1 + h)^e."""
    f, g = as_jet(f), as_jet(g)
    if g.germ.is_zero:
        raise ValueError("substitution needs a nonzero inner series")
    v, c0 = g.germ.lead()
    if v <= 0:
        raise ValueError("inner series must have positive valuation")
    rel = PuiseuxJet(g.germ.shift(-v) * (1 / c0), None if g.order is None else g.order - v)
    h = _split_unit(rel)
    cands = []
    if f.order is not None:
        cands.append(v * f.order)
    if rel.order is not None and f.germ.terms:
        cands.append(v * f.germ.terms[0][0] + rel.order)
    if order is not None:
        cands.append(_q(order))
    target = _min_order(*cands)
    total = PuiseuxGerm()
    for e, c in f.germ.terms:
        if target is not None and v * e >= target:
            break
        base = c * rational_root(c0, e)
        if h.germ.is_zero and h.exact:
            factor = PuiseuxJet(PuiseuxGerm.const(1), None)
        else:
            factor = pow_rational(rel, e, None if target is None else target - v * e)
        total = total + factor.germ.shift(v * e) * base
    return PuiseuxJet(total, target)


def invert_series(g: Series, order=None) -> PuiseuxJet:
    """Compositional inverse of g = lam*x^n*(1 + h), as a jet in x^(1/n)."""
    g = as_jet(g)
    if g.germ.is_zero:
        raise ValueError("cannot invert a zero series")
    n, lam = g.germ.lead()
    if n <= 0:
        raise ValueError("series to invert must have positive valuation")
    base = PuiseuxGerm.monomial(rational_root(1 / lam, 1 / n), 1 / n)
    rel = PuiseuxJet(g.germ.shift(-n) * (1 / lam), None if g.order is None else g.order - n)
    h = _split_unit(rel)
    if h.germ.is_zero and h.exact:
        return PuiseuxJet(base, None if order is None else _q(order))
    if order is None:
        if rel.order is None:
            raise ValueError("an exact non-monomial series needs an explicit order")
        target = (1 + rel.order) / n
    else:
        target = _min_order(_q(order), None if rel.order is None else (1 + rel.order) / n)
    xk = PuiseuxJet(base, target)
    # fixed point x = (X/lam)^(1/n) (1 + h(x))^(-1/n); each pass gains val(h)/n
    for _ in range(10_000):
        inner = add(PuiseuxGerm.const(1), substitute(h, xk, target))
        step = pow_rational(inner, -1 / n, target - 1 / n)
        nxt = mul(base, step).with_order(target)
        if nxt.germ == xk.germ:
            return nxt
        xk = nxt
    raise RuntimeError("series inversion did not converge")


# -- text form -------------------------------------------------------------

def _format_exp(e: Fraction) -> str:
    if e == 1:
        return "x"
    if e.denominator == 1 and e > 0:
        return f"x^{e.numerator}"
    return f"x^({e.numerator}/{e.denominator})" if e.denominator != 1 else f"x^({e.numerator})"


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_term(e: Fraction, c: Fraction) -> str:
    if e == 0:
        return _format_coeff(c)
    if c == 1:
        return _format_exp(e)
    return f"{_format_coeff(c)}*{_format_exp(e)}"


def format_germ(g: PuiseuxGerm) -> str:
    if g.is_zero:
        return "0"
    parts = []
    for i, (e, c) in enumerate(g.terms):
        if i == 0:
            parts.append(("-" if c < 0 else "") + _format_term(e, abs(c)))
        else:
            parts.append((" - " if c < 0 else " + ") + _format_term(e, abs(c)))
    return "".join(parts)


def format_jet(j: PuiseuxJet) -> str:
    if j.order is None:
        return format_germ(j.germ)
    big_o = "O(1)" if j.order == 0 else f"O({_format_exp(j.order)})"
    if j.germ.is_zero:
        return big_o
    return f"{format_germ(j.germ)} + {big_o}"


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.replace("−", "-")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            out.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(("sym", m.group(2), m.start(2)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, what: str) -> None:
        kind, val, pos = self.peek()
        shown = val if kind != "end" else "end of input"
        raise ParseError(f"{what}, got {shown!r}", self.text, pos)

    def expect(self, sym: str) -> None:
        kind, val, _ = self.peek()
        if kind != "sym" or val != sym:
            self.fail(f"expected {sym!r}")
        self.take()

    def is_sym(self, sym: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "sym" and val == sym

    def rational(self) -> Fraction:
        sign = 1
        if self.is_sym("-"):
            self.take()
            sign = -1
        kind, val, _ = self.peek()
        if kind != "num":
            self.fail("expected a number")
        self.take()
        num = int(val)
        if self.is_sym("/"):
            self.take()
            kind, val, _ = self.peek()
            if kind != "num":
                self.fail("expected a denominator")
            self.take()
            if int(val) == 0:
                raise ParseError("zero denominator", self.text, self.toks[self.i - 1][2])
            return Fraction(sign * num, int(val))
        return Fraction(sign * num)

    def exponent(self) -> Fraction:
        if self.is_sym("^"):
            self.take()
            if self.is_sym("("):
                self.take()
                e = self.rational()
                self.expect(")")
                return e
            return self.rational()
        return Fraction(1)

    def x_power(self) -> Fraction:
        self.expect("x")
        return self.exponent()

    def term(self) -> tuple[str, Fraction, Fraction]:
        """Return ('t', exponent, coeff) or ('O', order, 0)."""
        kind, val, _ = self.peek()
        if kind == "sym" and val == "O":
            self.take()
            self.expect("(")
            if self.is_sym("x"):
                order = self.x_power()
            else:
                kind, val, _ = self.peek()
                if kind != "num" or val != "1":
                    self.fail("expected x^e or 1 inside O()")
                self.take()
                order = Fraction(0)
            self.expect(")")
            return ("O", order, Fraction(0))
        if kind == "sym" and val == "x":
            return ("t", self.x_power(), Fraction(1))
        if kind == "num":
            c = self.rational()
            if self.is_sym("*"):
                self.take()
                return ("t", self.x_power(), c)
            return ("t", Fraction(0), c)
        self.fail("expected a term")
        raise AssertionError

    def series(self) -> tuple[PuiseuxGerm, Fraction | None]:
        terms: list[tuple[Fraction, Fraction]] = []
        order = None
        sign = 1
        if self.is_sym("-"):
            self.take()
            sign = -1
        elif self.is_sym("+"):
            self.take()
        while True:
            if order is not None:
                self.fail("nothing may follow the O() term")
            kind, e, c = self.term()
            if kind == "O":
                if sign < 0:
                    self.fail("O() term must be added")
                order = e
            else:
                terms.append((e, sign * c))
            if self.is_sym("+"):
                self.take()
                sign = 1
            elif self.is_sym("-"):
                self.take()
                sign = -1
            else:
                break
        return PuiseuxGerm.from_terms(terms), order

    def done(self) -> None:
        if self.peek()[0] != "end":
            self.fail("unexpected trailing input")


def parse_germ(text: str) -> PuiseuxGerm:
    p = _Parser(text)
    germ, order = p.series()
    p.done()
    if order is not None:
        raise ParseError("a germ cannot carry an O() term", text, 0)
    return germ


def parse_jet(text: str) -> PuiseuxJet:
    p = _Parser(text)
    germ, order = p.series()
    p.done()
    if order is not None and any(e >= order for e in germ.exponents()):
        raise ParseError("term at or beyond the O() order", text, 0)
    return PuiseuxJet(germ, order)
