"""Rational skew products phi = (phi1, phi2) acting on the Berkovich line.

phi1(x) = lam * x^n * unit(x) changes the base, phi2 = P(y)/Q(y) has Puiseux
germs in x as coefficients.  A point y = p(x) over the fibre maps to
phi2(x, p(x)) read in the new base variable, i.e. with x replaced by the
compositional inverse of phi1 (x -> x^(1/n) for phi1 = x^n).

Two independent routes compute images of disk points:
``map_pointII`` samples Type I points in generic directions and takes the
majority join of their images, while ``map_point_exact`` peels off the part
of phi2 that does not depend on a generic residue using leading
coefficients only.  ``map_ray`` is the latter on the ray zeta(0, |x|^t).
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from math import comb, lcm
from typing import Sequence, Union

from .berkovich import (
    INFINITY,
    TO_CENTER,
    TO_INFINITY,
    PointI,
    PointII,
    _agreement,
    direction_of,
    leq,
    lt,
    same_direction,
)
from .models import Annulus, Disk, Domain, InfinityDisk, MultiBoundary, VertexSet, domains
from .puiseux import (
    INF,
    ParseError,
    PuiseuxGerm,
    PuiseuxJet,
    _Parser,
    as_jet,
    divide,
    format_germ,
    format_jet,
    invert_series,
    parse_jet,
    rational_root,
    substitute,
)

__all__ = [
    "SkewProduct",
    "InstabilityError",
    "Reduction",
    "map_pointI",
    "map_pointII",
    "map_point_exact",
    "map_ray",
    "reduction",
    "orbit",
    "normalize_to_gauss",
    "annulus_degree",
    "classify",
    "MapVerdict",
    "MapsToDivisor",
    "Contracted",
    "Continuous",
    "Indeterminate",
    "Unknown",
    "identity",
    "parse_product",
    "format_product",
    "product_to_json",
    "product_from_json",
    "load_product",
]

Poly = tuple[PuiseuxGerm, ...]

DEFAULT_ORDER_CAP = Fraction(128)


class InstabilityError(RuntimeError):
    """Sampling could not settle on an image within the jet order cap."""


def _trim(p: Sequence[PuiseuxGerm]) -> Poly:
    p = list(p)
    while p and p[-1].is_zero:
        p.pop()
    return tuple(p)


def _deg(p: Poly) -> int:
    return len(p) - 1


def _proportional_polys(P: Poly, Q: Poly) -> bool:
    """P = c Q for a series c, tested by cross multiplication."""
    k = next(i for i, c in enumerate(Q) if not c.is_zero)
    z = PuiseuxGerm()
    n = max(len(P), len(Q))
    pk = P[k] if k < len(P) else z
    return all(
        (P[i] if i < len(P) else z) * Q[k] == (Q[i] if i < len(Q) else z) * pk for i in range(n)
    )


@dataclass(frozen=True)
class SkewProduct:
    """phi(x, y) = (lam * x^n * unit, P(y) / Q(y)); P, Q list coefficients by power of y."""

    lam: Fraction
    n: int
    unit: PuiseuxJet
    P: Poly
    Q: Poly

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", Fraction(self.lam))
        object.__setattr__(self, "P", _trim(self.P))
        object.__setattr__(self, "Q", _trim(self.Q))
        if self.n < 1:
            raise ValueError("phi1 must have a positive degree in x")
        if self.lam <= 0:
            raise ValueError("lambda must be a positive rational")
        if not self.Q:
            raise ValueError("denominator Q must be nonzero")
        u = self.unit.germ.terms
        if not u or u[0] != (Fraction(0), Fraction(1)):
            raise ValueError("unit of phi1 must have constant term 1")
        if self.rdeg < 1:
            raise ValueError("phi2 must depend on y")
        if self.P and self.P[0].is_zero and self.Q[0].is_zero:
            raise ValueError("P and Q share the factor y")
        if _proportional_polys(self.P, self.Q):
            raise ValueError("phi2 does not depend on y")

    @classmethod
    def make(cls, P, Q=(1,), lam=1, n=1, unit=None) -> SkewProduct:
        def germ(c):
            return c if isinstance(c, PuiseuxGerm) else PuiseuxGerm.const(c)

        u = as_jet(unit) if unit is not None else as_jet(PuiseuxGerm.const(1))
        return cls(Fraction(lam), n, u, tuple(germ(c) for c in P), tuple(germ(c) for c in Q))

    @property
    def scale(self) -> Fraction:
        return Fraction(1, self.n)

    @property
    def rdeg(self) -> int:
        return max(_deg(self.P), _deg(self.Q))

    @property
    def monomial_base(self) -> bool:
        return self.unit.exact and len(self.unit.germ.terms) == 1

    @property
    def is_simple(self) -> bool:
        """n = 1 and all coefficients Laurent (integral exponents)."""
        return self.n == 1 and self.mult == 1

    @property
    def mult(self) -> int:
        gs = list(self.P) + list(self.Q) + [self.unit.germ]
        return lcm(1, *(g.multiplicity() for g in gs))

    def __str__(self) -> str:
        return format_product(self)


def identity() -> SkewProduct:
    return SkewProduct.make(P=(0, 1))


# -- evaluation ----------------------------------------------------------

def _eval_poly(p: Poly, y: PuiseuxGerm) -> PuiseuxGerm:
    acc = PuiseuxGerm()
    for c in reversed(p):
        acc = acc * y + c
    return acc


def _to_target(phi: SkewProduct, F: PuiseuxJet) -> PuiseuxJet:
    """Rewrite a series in x as a series in the new base variable."""
    n = phi.n
    if phi.monomial_base:
        terms = []
        for e, c in F.germ.terms:
            terms.append((e / n, c * rational_root(1 / phi.lam, e / n)))
        order = None if F.order is None else F.order / n
        return PuiseuxJet(PuiseuxGerm.from_terms(terms), order)
    want = None if F.order is None else F.order / n
    if F.germ.is_zero:
        return PuiseuxJet(F.germ, want)
    if want is None:
        raise ValueError("exact image through a non-monomial base map needs an order")
    val = Fraction(F.lower_bound())
    # x-hat has valuation 1/n; F o x-hat needs x-hat to relative order want - val/n
    xhat = _xhat(phi, Fraction(1, n) + max(want - val / n, Fraction(0)))
    return substitute(F, xhat, want)


@lru_cache(maxsize=256)
def _xhat(phi: SkewProduct, order: Fraction) -> PuiseuxJet:
    """Compositional inverse of phi1 to the given order."""
    n = phi.n
    g = PuiseuxJet(phi.unit.germ.shift(n) * phi.lam, None if phi.unit.order is None else phi.unit.order + n)
    return invert_series(g, order)


def map_pointI(phi: SkewProduct, p: Union[PointI, PuiseuxGerm], order) -> Union[PuiseuxJet, PointI]:
    """Image of a Type I point, as a jet to ``order`` in the target, or INFINITY."""
    order = Fraction(order)
    if isinstance(p, PointI):
        if p.is_infinity:
            dp, dq = _deg(phi.P), _deg(phi.Q)
            if dp > dq:
                return INFINITY
            if dp < dq:
                return PuiseuxJet(PuiseuxGerm(), None)
            F = divide(phi.P[-1], phi.Q[-1], order * phi.n)
            return _to_target(phi, F)
        p = p.germ
    num = _eval_poly(phi.P, p)
    den = _eval_poly(phi.Q, p)
    if den.is_zero:
        if num.is_zero:
            raise ValueError("P and Q share the root y = " + format_germ(p))
        return INFINITY
    F = divide(num, den, order * phi.n)
    return _to_target(phi, F)


def _samples(z: PointII, count: int) -> list[PuiseuxGerm]:
    return [z.germ + PuiseuxGerm.monomial(c, z.radius_exp) for c in range(1, count + 1)]


def map_pointII(
    phi: SkewProduct,
    z: PointII,
    samples: int | None = None,
    order_cap: Fraction = DEFAULT_ORDER_CAP,
    check: bool = True,
) -> PointII:
    """Image of a disk point by majority join over sampled generic directions."""
    count = samples if samples is not None else 2 * phi.rdeg + 2
    pts = _samples(z, count)
    total = comb(count, 2)
    order = min(max(Fraction(2), 2 * abs(z.radius_exp) / phi.n + 2), order_cap)
    while True:
        imgs = []
        for y in pts:
            imgs.append(map_pointI(phi, y, order))
        votes: Counter = Counter()
        undetermined = 0
        for i in range(count):
            gi = imgs[i]
            if isinstance(gi, PointI):
                continue
            for j in range(i + 1, count):
                gj = imgs[j]
                if isinstance(gj, PointI):
                    continue
                known = min(o for o in (gi.order, gj.order, INF) if o is not None)
                s = _agreement(gi.germ, gj.germ)
                if s >= known:
                    undetermined += 1
                    continue
                votes[PointII(gi.germ, s)] += 1
        if votes:
            best, n_best = votes.most_common(1)[0]
            if 2 * n_best > total:
                break
        if order >= order_cap:
            raise InstabilityError(
                f"no majority image for {z} up to order {order} "
                f"({undetermined} undetermined pairs)"
            )
        order = min(order * 2, order_cap)
    if check:
        bound = phi.n * lcm(z.m, phi.mult)
        if bound % best.m:
            raise InstabilityError(f"image {best} of {z} breaks the multiplicity bound {bound}")
        if phi.is_simple and z.m % best.m:
            raise InstabilityError(f"image {best} of {z} has multiplicity not dividing {z.m}")
    return best


# -- exact route -----------------------------------------------------------

def _shift_poly(p: Poly, g: PuiseuxGerm) -> Poly:
    """Coefficients of p(g + y) in y."""
    out = [PuiseuxGerm() for _ in p]
    powers = [PuiseuxGerm.const(1)]
    for _ in range(len(p)):
        powers.append(powers[-1] * g)
    for k, c in enumerate(p):
        if c.is_zero:
            continue
        for j in range(k + 1):
            out[j] = out[j] + c * powers[k - j] * comb(k, j)
    return _trim(out)


def _minus_multiple(P: Poly, a: PuiseuxGerm, Q: Poly) -> Poly:
    """P - a Q."""
    z = PuiseuxGerm()
    n = max(len(P), len(Q))
    return _trim((P[k] if k < len(P) else z) - a * (Q[k] if k < len(Q) else z) for k in range(n))


def _gauss_val(p: Poly, r: Fraction) -> tuple[Fraction, dict[int, Fraction]]:
    """min_k val(c_k) + k r and the leading coefficients achieving it."""
    best = None
    lead: dict[int, Fraction] = {}
    for k, c in enumerate(p):
        if c.is_zero:
            continue
        e, lc = c.lead()
        v = e + k * r
        if best is None or v < best:
            best, lead = v, {k: lc}
        elif v == best:
            lead[k] = lc
    if best is None:
        raise ValueError("zero polynomial")
    return best, lead


def _proportional(a: dict[int, Fraction], b: dict[int, Fraction]) -> Fraction | None:
    if set(a) != set(b):
        return None
    ks = sorted(a)
    kappa = a[ks[0]] / b[ks[0]]
    if all(a[k] == kappa * b[k] for k in ks):
        return kappa
    return None


def _image_source(phi: SkewProduct, z: PointII, max_steps: int = 10_000) -> tuple[PuiseuxGerm, Fraction]:
    """Image of z before the base change, as (centre germ, radius)."""
    P = _shift_poly(phi.P, z.germ)
    Q = _shift_poly(phi.Q, z.germ)
    r = z.radius_exp
    vq, lq = _gauss_val(Q, r)
    a = PuiseuxGerm()
    for _ in range(max_steps):
        N = _minus_multiple(P, a, Q)
        if not N:
            raise ValueError(f"phi2 is constant on {z}")
        vn, ln = _gauss_val(N, r)
        w = vn - vq
        kappa = _proportional(ln, lq)
        if kappa is None:
            return a, w
        a = a + PuiseuxGerm.monomial(kappa, w)
    raise ValueError("image centre did not stabilise")


def map_point_exact(phi: SkewProduct, z: PointII) -> PointII:
    centre, s = _image_source(phi, z)
    target = s / phi.n
    if phi.monomial_base:
        g = _to_target(phi, PuiseuxJet(centre, None)).germ
    else:
        g = _to_target(phi, PuiseuxJet(centre, s + 1)).germ
    return PointII(g, target)


def map_ray(phi: SkewProduct, t) -> PointII:
    """Exact image of zeta(0, |x|^t)."""
    return map_point_exact(phi, PointII(PuiseuxGerm(), Fraction(t)))


def annulus_degree(phi: SkewProduct, lower: PointII, upper: PointII) -> int | None:
    """Stretch factor of phi2 along the spine from lower to upper, before the base change.

    None when phi2 minus the image centre of ``lower``, or Q, has a root inside
    the open annulus, i.e. when phi2 is not monomial there.
    """
    centre, _ = _image_source(phi, lower)
    N = _shift_poly(_minus_multiple(phi.P, centre, phi.Q), lower.germ)
    Q = _shift_poly(phi.Q, lower.germ)
    lo, hi = upper.radius_exp, lower.radius_exp
    if _count_roots(N, lo, hi) or _count_roots(Q, lo, hi):
        return None
    mid = (lo + hi) / 2
    _, ln = _gauss_val(N, mid)
    _, lq = _gauss_val(Q, mid)
    return abs(min(ln) - min(lq))


# -- reduction -------------------------------------------------------------

def _poly_trim_q(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = a[:]
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        c = a[-1] / b[-1]
        q[k] = c
        for i, bc in enumerate(b):
            a[i + k] -= c * bc
        _poly_trim_q(a)
    return q, a


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a, b = _poly_trim_q(a[:]), _poly_trim_q(b[:])
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    return [c / a[-1] for c in a] if a else a


@dataclass(frozen=True)
class Reduction:
    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...]
    degree: int
    good: bool

    def __str__(self) -> str:
        return f"({_format_qpoly(self.num)})/({_format_qpoly(self.den)})"


def _format_qpoly(p: Sequence[Fraction]) -> str:
    parts = []
    for k, c in enumerate(p):
        if c == 0:
            continue
        mono = "" if k == 0 else ("y" if k == 1 else f"y^{k}")
        cs = str(c)
        if mono and c == 1:
            parts.append(mono)
        elif mono and c == -1:
            parts.append("-" + mono)
        else:
            parts.append(cs + ("*" + mono if mono else ""))
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def reduction(phi: SkewProduct) -> Reduction:
    """phi2 at x = 0 after clearing a common power of x; good iff degree = rdeg."""
    coeffs = [c for c in phi.P + phi.Q if not c.is_zero]
    mu = min(c.valuation() for c in coeffs)
    num = _poly_trim_q([c.shift(-mu).coeff(0) for c in phi.P])
    den = _poly_trim_q([c.shift(-mu).coeff(0) for c in phi.Q])
    if not num:
        # keep the denominator: x^2/y reduces to 0/y, not 0/1
        den = [c / den[-1] for c in den]
    else:
        g = _poly_gcd(num, den)
        num, _ = _poly_divmod(num, g)
        den, _ = _poly_divmod(den, g)
        num, den = _poly_trim_q(num), _poly_trim_q(den)
        lc = den[-1]
        num = [c / lc for c in num]
        den = [c / lc for c in den]
    # a zero numerator makes the reduction constant, whatever the denominator
    degree = max(len(num) - 1, len(den) - 1, 0) if num else 0
    return Reduction(tuple(num), tuple(den), degree, degree == phi.rdeg)


def orbit(phi: SkewProduct, z: PointII, k: int, **kw) -> list[PointII]:
    if k < 0:
        raise ValueError("k must be non-negative")
    out = [z]
    for i in range(k):
        try:
            out.append(map_pointII(phi, out[-1], **kw))
        except InstabilityError as exc:
            raise InstabilityError(f"step {i + 1}: {exc}") from exc
    return out


def normalize_to_gauss(z: PointII) -> SkewProduct:
    """eta = (x, (y - gamma) / x^r), sending z to the Gauss point."""
    return SkewProduct.make(
        P=(-z.germ, PuiseuxGerm.const(1)),
        Q=(PuiseuxGerm.monomial(1, z.radius_exp),),
    )


# -- classification ----------------------------------------------------------

@dataclass(frozen=True)
class MapsToDivisor:
    image: PointII


@dataclass(frozen=True)
class Contracted:
    image: PointII
    domain: Domain


@dataclass(frozen=True)
class Continuous:
    domain: Domain


@dataclass(frozen=True)
class Indeterminate:
    hits: tuple[PointII, ...]


@dataclass(frozen=True)
class Unknown:
    reason: str


@dataclass
class MapVerdict:
    vertices: list[tuple[PointII, object]] = field(default_factory=list)
    domains: list[tuple[Domain, object]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "vertices": [{"vertex": str(v), **_verdict_json(x)} for v, x in self.vertices],
            "domains": [{"domain": d.describe(), **_verdict_json(x)} for d, x in self.domains],
        }


def _verdict_json(v) -> dict:
    if isinstance(v, MapsToDivisor):
        return {"verdict": "maps_to_divisor", "image": str(v.image)}
    if isinstance(v, Contracted):
        return {"verdict": "contracted", "image": str(v.image), "into": v.domain.describe()}
    if isinstance(v, Continuous):
        return {"verdict": "continuous", "into": v.domain.describe()}
    if isinstance(v, Indeterminate):
        return {"verdict": "indeterminate", "hits": [str(h) for h in v.hits]}
    return {"verdict": "unknown", "reason": v.reason}


def locate_domain(gamma: VertexSet, p: PointII) -> Domain:
    """The domain of the complement of gamma containing p (p not in gamma)."""
    uppers = [v for v in gamma if leq(p, v)]
    if not uppers:
        tops = [v for v in gamma if all(leq(q, v) for q in gamma)]
        if tops:
            return InfinityDisk(tops[0])
        maxima = [v for v in gamma if not any(lt(v, q) for q in gamma)]
        return MultiBoundary(tuple(maxima), True)
    v = max(uppers, key=lambda q: q.radius_exp)
    below = [w for w in gamma if lt(w, v) and same_direction(v, w, p)]
    if not below:
        return Disk(v, direction_of(v, p))
    maxima = [w for w in below if not any(lt(w, u) for u in below)]
    if len(maxima) == 1 and not leq(p, maxima[0]):
        return Annulus(maxima[0], v)
    return MultiBoundary(tuple([v] + maxima), False)


def _count_roots(p: Poly, lo, hi) -> int:
    """Roots of p with valuation strictly between lo and hi (lo < hi, INF allowed)."""
    def above(r):  # roots with valuation > r
        if r == INF:
            return 0
        _, lead = _gauss_val(p, r)
        return min(lead)

    def at_least(r):  # roots with valuation >= r
        _, lead = _gauss_val(p, r)
        return max(lead)

    if hi == INF:
        return above(lo)
    if lo == -INF:
        return _deg(p) - at_least(hi)
    return max(above(lo) - at_least(hi), 0)


def _to_source(phi: SkewProduct, a: PuiseuxGerm, order) -> PuiseuxJet:
    """a(phi1(x)): a target-coordinate germ read back in the source."""
    g = PuiseuxJet(phi.unit.germ.shift(phi.n) * phi.lam, None if phi.unit.order is None else phi.unit.order + phi.n)
    return substitute(a, g, order)


def _disk_verdict(phi: SkewProduct, tgt: VertexSet, v: PointII, img_v: PointII, at_inf: bool):
    r = v.radius_exp
    sample = v.germ + PuiseuxGerm.monomial(1, r - 1) if at_inf else v.germ
    img = map_pointI(phi, PointI(sample), img_v.radius_exp + 2)
    if isinstance(img, PointI):
        d = TO_INFINITY
    else:
        d = direction_of(img_v, PointI(img.germ))
    # does the image also reach a point outside direction d?  then it is everything
    P = _shift_poly(phi.P, v.germ)
    Q = _shift_poly(phi.Q, v.germ)
    if d != TO_INFINITY:
        N, extra = Q, max(_deg(phi.P) - _deg(phi.Q), 0)
    else:
        a = _to_source(phi, img_v.germ, (img_v.radius_exp + 2) * phi.n).germ
        N = _minus_multiple(P, a, Q)
        extra = max(_deg(phi.Q) - _deg(N), 0)
    if not N:
        count = 1
    elif at_inf:
        count = _count_roots(N, -INF, r) + extra
    else:
        count = _count_roots(N, r, INF)
    if count:
        return Indeterminate(tuple(tgt))
    if d == TO_INFINITY:
        hits = [w for w in tgt if not leq(w, img_v)]
    else:
        hits = [w for w in tgt if lt(w, img_v) and direction_of(img_v, w) == d]
    if hits:
        return Indeterminate(tuple(hits))
    if img_v in tgt:
        return Continuous(InfinityDisk(img_v) if d == TO_INFINITY else Disk(img_v, d))
    return Continuous(locate_domain(tgt, img_v))


def classify(phi: SkewProduct, src: VertexSet, tgt: VertexSet, **kw) -> MapVerdict:
    out = MapVerdict()
    images: dict[PointII, PointII] = {}
    for v in src:
        try:
            img = map_pointII(phi, v, **kw)
        except (InstabilityError, ValueError) as exc:
            out.vertices.append((v, Unknown(str(exc))))
            continue
        images[v] = img
        if img in tgt:
            out.vertices.append((v, MapsToDivisor(img)))
        else:
            out.vertices.append((v, Contracted(img, locate_domain(tgt, img))))
    for d in domains(src):
        try:
            out.domains.append((d, _domain_verdict(phi, tgt, d, images, **kw)))
        except (InstabilityError, ValueError) as exc:
            out.domains.append((d, Unknown(str(exc))))
    return out


def _domain_verdict(phi, tgt, d, images, **kw):
    if isinstance(d, Annulus):
        if d.lower not in images or d.upper not in images:
            return Unknown("endpoint image unavailable")
        if annulus_degree(phi, d.lower, d.upper) is None:
            return Unknown("phi2 is not monomial on the annulus")
        ia, ib = images[d.lower], images[d.upper]
        if ia == ib:
            return Unknown("annulus collapses onto one point")
        if lt(ib, ia):
            ia, ib = ib, ia
        if not lt(ia, ib):
            return Unknown("endpoint images are not comparable")
        hits = [w for w in tgt if lt(w, ib) and same_direction(ib, w, ia) and not leq(w, ia)]
        if hits:
            return Indeterminate(tuple(hits))
        mid = PointII(d.lower.germ, (d.lower.radius_exp + d.upper.radius_exp) / 2)
        return Continuous(locate_domain(tgt, map_pointII(phi, mid, **kw)))
    if isinstance(d, Disk) and d.direction == TO_CENTER:
        if d.boundary not in images:
            return Unknown("boundary image unavailable")
        return _disk_verdict(phi, tgt, d.boundary, images[d.boundary], False)
    if isinstance(d, InfinityDisk):
        if d.boundary not in images:
            return Unknown("boundary image unavailable")
        return _disk_verdict(phi, tgt, d.boundary, images[d.boundary], True)
    return Unknown("domain is not a disk or annulus")


# -- text form -------------------------------------------------------------

class _RF:
    """Rational function in y as a pair of coefficient lists."""

    def __init__(self, num: Sequence[PuiseuxGerm], den: Sequence[PuiseuxGerm] = (PuiseuxGerm.const(1),)):
        self.num = list(num)
        self.den = list(den)


def _pmul(a, b):
    out = [PuiseuxGerm() for _ in range(len(a) + len(b) - 1)] if a and b else []
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _padd(a, b):
    n = max(len(a), len(b))
    z = PuiseuxGerm()
    return [(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z) for i in range(n)]


def _rf_add(a: _RF, b: _RF, sign: int = 1) -> _RF:
    if a.den == b.den:
        return _RF(_padd(a.num, [c * sign for c in b.num]), a.den)
    return _RF(_padd(_pmul(a.num, b.den), [c * sign for c in _pmul(b.num, a.den)]), _pmul(a.den, b.den))


def _rf_mul(a: _RF, b: _RF) -> _RF:
    return _RF(_pmul(a.num, b.num), _pmul(a.den, b.den))


class _ProductParser(_Parser):
    def expr(self) -> _RF:
        sign = 1
        if self.is_sym("-"):
            self.take()
            sign = -1
        elif self.is_sym("+"):
            self.take()
        acc = self.product()
        if sign < 0:
            acc = _RF([-c for c in acc.num], acc.den)
        while self.is_sym("+") or self.is_sym("-"):
            s = 1 if self.take()[1] == "+" else -1
            acc = _rf_add(acc, self.product(), s)
        return acc

    def product(self) -> _RF:
        acc = self.power()
        while self.is_sym("*") or self.is_sym("/"):
            op = self.take()[1]
            rhs = self.power()
            acc = _rf_mul(acc, rhs) if op == "*" else _rf_mul(acc, _RF(rhs.den, rhs.num))
        return acc

    def power(self) -> _RF:
        kind, val, _ = self.peek()
        if kind == "num":
            self.take()
            return _RF([PuiseuxGerm.const(int(val))])
        if kind == "sym" and val == "x":
            self.take()
            if self.is_sym("^") and self.toks[self.i + 1][1] == "(":
                self.take()
                self.take()
                e = self.rational()
                self.expect(")")
            elif self.is_sym("^"):
                self.take()
                e = Fraction(-1) if self.is_sym("-") and self.take() else Fraction(1)
                kind, val, _ = self.peek()
                if kind != "num":
                    self.fail("expected an integer power")
                self.take()
                e *= int(val)
            else:
                e = Fraction(1)
            return _RF([PuiseuxGerm.monomial(1, e)])
        if kind == "sym" and val == "y":
            self.take()
            k = self._int_power()
            return _RF([PuiseuxGerm()] * k + [PuiseuxGerm.const(1)])
        if kind == "sym" and val == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            k = self._int_power()
            out = _RF([PuiseuxGerm.const(1)])
            for _ in range(k):
                out = _rf_mul(out, inner)
            return out
        self.fail("expected a number, x, y or '('")
        raise AssertionError

    def _int_power(self) -> int:
        if not self.is_sym("^"):
            return 1
        self.take()
        kind, val, _ = self.peek()
        if kind != "num":
            self.fail("expected a non-negative integer power")
        self.take()
        return int(val)


def _simplify(rf: _RF) -> tuple[Poly, Poly]:
    num, den = _trim(rf.num), _trim(rf.den)
    if not den:
        raise ValueError("division by zero")
    # absorb a monomial constant denominator into the numerator
    if len(den) == 1 and len(den[0].terms) == 1:
        e, c = den[0].terms[0]
        inv = PuiseuxGerm.monomial(1 / c, -e)
        return tuple(x * inv for x in num), (PuiseuxGerm.const(1),)
    return num, den


def parse_product(text: str) -> SkewProduct:
    """``(<phi1>, <phi2>)``, e.g. ``(x^2, x^2/y)`` or ``(4*x^2*(1 + x), (y^2 + x)/(1 + x*y))``."""
    p = _ProductParser(text)
    p.expect("(")
    first = p.expr()
    p.expect(",")
    second = p.expr()
    p.expect(")")
    p.done()
    num1, den1 = _simplify(first)
    if len(num1) != 1 or len(den1) != 1 or den1[0] != PuiseuxGerm.const(1):
        raise ParseError("phi1 must be a series in x alone", text, 1)
    g = num1[0]
    if g.is_zero:
        raise ParseError("phi1 must be nonzero", text, 1)
    n, lam = g.lead()
    if n.denominator != 1 or n < 1:
        raise ParseError("phi1 must start with a positive integer power of x", text, 1)
    unit = g.shift(-n) * (1 / lam)
    P, Q = _simplify(second)
    return SkewProduct(lam, int(n), as_jet(unit), P, Q)


def _format_poly(p: Poly) -> str:
    parts = []
    for k, c in enumerate(p):
        if c.is_zero:
            continue
        mono = "" if k == 0 else ("y" if k == 1 else f"y^{k}")
        cs = format_germ(c)
        if not mono:
            parts.append(f"({cs})")
        elif c == PuiseuxGerm.const(1):
            parts.append(mono)
        else:
            parts.append(f"({cs})*{mono}")
    return " + ".join(parts) if parts else "0"


def format_product(phi: SkewProduct) -> str:
    lam = phi.lam
    head = "" if lam == 1 else (f"{lam.numerator}" if lam.denominator == 1 else f"({lam.numerator}/{lam.denominator})") + "*"
    base = f"{head}x" + ("" if phi.n == 1 else f"^{phi.n}")
    if not (phi.unit.germ == PuiseuxGerm.const(1)):
        base += f"*({format_germ(phi.unit.germ)})"
    return f"({base}, ({_format_poly(phi.P)})/({_format_poly(phi.Q)}))"


def product_to_json(phi: SkewProduct) -> dict:
    return {
        "lambda": str(phi.lam),
        "n": phi.n,
        "unit": format_jet(phi.unit),
        "P": [format_germ(c) for c in phi.P],
        "Q": [format_germ(c) for c in phi.Q],
    }


def product_from_json(obj) -> SkewProduct:
    from .puiseux import parse_germ

    if isinstance(obj, str):
        return parse_product(obj)
    if "phi" in obj:
        return parse_product(obj["phi"])
    return SkewProduct(
        Fraction(obj.get("lambda", "1")),
        int(obj.get("n", 1)),
        parse_jet(obj.get("unit", "1")),
        tuple(parse_germ(c) for c in obj["P"]),
        tuple(parse_germ(c) for c in obj.get("Q", ["1"])),
    )


def load_product(text: str) -> SkewProduct:
    s = text.strip()
    if s.startswith("{"):
        return product_from_json(json.loads(s))
    return parse_product(s)
