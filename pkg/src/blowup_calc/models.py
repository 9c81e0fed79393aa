"""Vertex sets as surface models.

A vertex set is a finite set of disk points.  Its complement in the
Berkovich line splits into domains; the set is Farey (the model is smooth
along the fibre) when every domain passes the tests in ``check_smooth``.
Blowups add one vertex at a time by Farey addition, ``resolve`` finds the
shortest blowup sequence reaching a target, and ``deconstruct`` runs the
sequence backwards as an independent certificate of smoothness.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Union

from .berkovich import (
    TO_CENTER,
    Direction,
    PointII,
    canonical_direction,
    direction_of,
    gauss_point,
    generic,
    hyp_dist,
    join,
    leq,
    lt,
    point_from_json,
    point_to_json,
    same_direction,
    sort_key,
)
from .farey import format_frac
from .puiseux import PuiseuxGerm, format_germ

__all__ = [
    "VertexSet",
    "Skeleton",
    "Disk",
    "Annulus",
    "InfinityDisk",
    "MultiBoundary",
    "Domain",
    "FreeAtInfinity",
    "Free",
    "Satellite",
    "BlowupOp",
    "Step",
    "BlowupScript",
    "BlowupError",
    "Verdict",
    "DeconstructResult",
    "skeleton",
    "domains",
    "farey_adjacent",
    "check_smooth",
    "blowup",
    "replay",
    "resolve",
    "deconstruct",
    "self_intersection",
    "closed_point_mult",
    "export_dual_graph",
]


class VertexSet:
    """Finite set of disk points, kept in a deterministic order."""

    __slots__ = ("_pts",)

    def __init__(self, points: Iterable[PointII] = ()) -> None:
        uniq = {p: None for p in points}
        self._pts = tuple(sorted(uniq, key=sort_key))

    def __iter__(self):
        return iter(self._pts)

    def __len__(self) -> int:
        return len(self._pts)

    def __contains__(self, p: object) -> bool:
        return p in self._pts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexSet):
            return NotImplemented
        return set(self._pts) == set(other._pts)

    def __hash__(self) -> int:
        return hash(frozenset(self._pts))

    def __repr__(self) -> str:
        return "VertexSet([" + ", ".join(str(p) for p in self._pts) + "])"

    @property
    def points(self) -> tuple[PointII, ...]:
        return self._pts

    def add(self, p: PointII) -> VertexSet:
        return VertexSet(self._pts + (p,))

    def remove(self, p: PointII) -> VertexSet:
        return VertexSet(q for q in self._pts if q != p)

    def to_json(self) -> list:
        return [point_to_json(p) for p in self._pts]

    @classmethod
    def from_json(cls, data: Sequence) -> VertexSet:
        return cls(point_from_json(o) for o in data)


# -- skeleton ----------------------------------------------------------------

@dataclass(frozen=True)
class Skeleton:
    """Convex hull tree of a vertex set, rooted toward infinity.

    ``parent[i]`` is None for the top node, whose parent is the virtual root.
    """

    nodes: tuple[PointII, ...]
    parent: tuple[int | None, ...]
    member: tuple[bool, ...]
    children: tuple[tuple[int, ...], ...]

    def index(self, p: PointII) -> int:
        return self.nodes.index(p)

    @property
    def top(self) -> int:
        return self.parent.index(None)


def skeleton(gamma: VertexSet | Iterable[PointII]) -> Skeleton:
    pts = list(gamma)
    if not pts:
        raise ValueError("empty vertex set")
    members = set(pts)
    nodes = {p: None for p in pts}
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            nodes.setdefault(join(p, q), None)
    order = sorted(nodes, key=sort_key)
    parent: list[int | None] = []
    for u in order:
        best = None
        for j, w in enumerate(order):
            if w != u and leq(u, w):
                if best is None or w.radius_exp > order[best].radius_exp:
                    best = j
        parent.append(best)
    kids: list[list[int]] = [[] for _ in order]
    for i, pa in enumerate(parent):
        if pa is not None:
            kids[pa].append(i)
    return Skeleton(
        nodes=tuple(order),
        parent=tuple(parent),
        member=tuple(u in members for u in order),
        children=tuple(tuple(k) for k in kids),
    )


# -- domains ---------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    boundary: PointII
    direction: Direction

    def describe(self) -> str:
        return f"disk at {self.boundary} toward {self.direction}"


@dataclass(frozen=True)
class Annulus:
    lower: PointII
    upper: PointII

    def describe(self) -> str:
        return f"annulus between {self.lower} and {self.upper}"


@dataclass(frozen=True)
class InfinityDisk:
    boundary: PointII

    def describe(self) -> str:
        return f"disk at {self.boundary} toward inf"


@dataclass(frozen=True)
class MultiBoundary:
    boundary: tuple[PointII, ...]
    contains_infinity: bool = False

    def describe(self) -> str:
        pts = ", ".join(str(p) for p in self.boundary)
        where = " containing inf" if self.contains_infinity else ""
        return f"domain{where} bounded by {pts}"


Domain = Union[Disk, Annulus, InfinityDisk, MultiBoundary]


def domain_to_json(d: Domain) -> dict:
    if isinstance(d, Disk):
        return {"kind": "disk", "boundary": point_to_json(d.boundary), "direction": str(d.direction)}
    if isinstance(d, Annulus):
        return {"kind": "annulus", "lower": point_to_json(d.lower), "upper": point_to_json(d.upper)}
    if isinstance(d, InfinityDisk):
        return {"kind": "infinity_disk", "boundary": point_to_json(d.boundary)}
    return {
        "kind": "multi_boundary",
        "boundary": [point_to_json(p) for p in d.boundary],
        "contains_infinity": d.contains_infinity,
    }


def _in_center_direction(v: PointII, child: PointII) -> bool:
    # supports are Galois invariant, so no conjugate bookkeeping is needed
    return child.germ.coeff(v.radius_exp) == 0


def domains(gamma: VertexSet, sk: Skeleton | None = None) -> list[Domain]:
    """The non-generic domains; disks in generic directions are left implicit."""
    sk = sk or skeleton(gamma)
    nodes, parent, member = sk.nodes, sk.parent, sk.member
    out: list[Domain] = []
    # clusters of adjacent Steiner nodes form one domain each
    cluster: dict[int, int] = {}
    for i in range(len(nodes)):
        if member[i] or i in cluster:
            continue
        stack = [i]
        cluster[i] = i
        while stack:
            j = stack.pop()
            nbrs = list(sk.children[j]) + ([parent[j]] if parent[j] is not None else [])
            for k in nbrs:
                if not member[k] and k not in cluster:
                    cluster[k] = i
                    stack.append(k)
    multis: dict[int, list[int]] = {}
    has_inf: dict[int, bool] = {}
    for j, root in cluster.items():
        bnd = multis.setdefault(root, [])
        has_inf.setdefault(root, False)
        for k in sk.children[j]:
            if member[k]:
                bnd.append(k)
        pa = parent[j]
        if pa is None:
            has_inf[root] = True
        elif member[pa]:
            bnd.append(pa)
    top = sk.top
    inf_multi = []
    other_multi = []
    for root, bnd in multis.items():
        d = MultiBoundary(tuple(nodes[k] for k in sorted(set(bnd))), has_inf[root])
        (inf_multi if has_inf[root] else other_multi).append(d)
    if member[top]:
        out.append(InfinityDisk(nodes[top]))
    out.extend(inf_multi)
    for i, pa in enumerate(parent):
        if member[i] and pa is not None and member[pa]:
            out.append(Annulus(nodes[i], nodes[pa]))
    for i, v in enumerate(nodes):
        if member[i] and not any(_in_center_direction(v, nodes[k]) for k in sk.children[i]):
            out.append(Disk(v, TO_CENTER))
    out.extend(other_multi)
    return out


# -- smoothness --------------------------------------------------------------

def farey_adjacent(alpha: PointII, beta: PointII) -> bool:
    """Generalised Farey adjacency of two comparable disk points."""
    if lt(beta, alpha):
        alpha, beta = beta, alpha
    elif not lt(alpha, beta):
        return False
    det = alpha.a * beta.b - alpha.b * beta.a
    return det == alpha.m == gcd(alpha.b, beta.b)


@dataclass
class Verdict:
    ok: bool
    failures: list[tuple[Domain, str]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_smooth(gamma: VertexSet) -> Verdict:
    if len(gamma) == 0:
        raise ValueError("empty vertex set")
    fails: list[tuple[Domain, str]] = []
    for d in domains(gamma):
        if isinstance(d, InfinityDisk):
            if not d.boundary.is_integral:
                fails.append((d, "the vertex facing infinity is not integral"))
        elif isinstance(d, Annulus):
            if not farey_adjacent(d.lower, d.upper):
                fails.append((d, "annulus endpoints are not Farey adjacent"))
        elif isinstance(d, Disk):
            if not d.boundary.is_free:
                fails.append((d, "center disk at a satellite vertex"))
        else:
            fails.append((d, "domain has more than two boundary points or meets infinity"))
    return Verdict(not fails, fails)


# -- blowups -------------------------------------------------------------

class BlowupError(ValueError):
    pass


@dataclass(frozen=True)
class FreeAtInfinity:
    at: PointII


@dataclass(frozen=True)
class Free:
    at: PointII
    direction: Direction


@dataclass(frozen=True)
class Satellite:
    lower: PointII
    upper: PointII


BlowupOp = Union[FreeAtInfinity, Free, Satellite]


def _op_to_json(op: BlowupOp) -> tuple[str, dict]:
    if isinstance(op, FreeAtInfinity):
        return "free_at_infinity", {"at": point_to_json(op.at)}
    if isinstance(op, Free):
        return "free", {"at": point_to_json(op.at), "direction": str(op.direction)}
    return "satellite", {"lower": point_to_json(op.lower), "upper": point_to_json(op.upper)}


def parse_direction(text: str) -> Direction:
    from .farey import parse_frac

    s = text.strip()
    if s == "center":
        return TO_CENTER
    if s.startswith("generic(") and s.endswith(")"):
        return generic(parse_frac(s[8:-1]))
    raise ValueError(f"bad direction {text!r}")


def _op_from_json(name: str, args: dict) -> BlowupOp:
    if name == "free_at_infinity":
        return FreeAtInfinity(point_from_json(args["at"]))
    if name == "free":
        return Free(point_from_json(args["at"]), parse_direction(args["direction"]))
    if name == "satellite":
        return Satellite(point_from_json(args["lower"]), point_from_json(args["upper"]))
    raise ValueError(f"unknown blowup op {name!r}")


@dataclass(frozen=True)
class Step:
    op: BlowupOp
    result: PointII


@dataclass(frozen=True)
class BlowupScript:
    base: VertexSet
    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def final(self) -> VertexSet:
        return VertexSet(list(self.base) + [s.result for s in self.steps])

    def to_json(self) -> dict:
        steps = []
        for s in self.steps:
            name, args = _op_to_json(s.op)
            steps.append({"op": name, "args": args, "result": point_to_json(s.result)})
        return {"base": self.base.to_json(), "steps": steps}

    @classmethod
    def from_json(cls, data: dict) -> BlowupScript:
        base = VertexSet.from_json(data.get("base", [point_to_json(gauss_point())]))
        steps = []
        for s in data["steps"]:
            op = _op_from_json(s["op"], s.get("args", {}))
            res = point_from_json(s["result"]) if "result" in s else None
            steps.append(Step(op, res))
        return cls(base, tuple(steps))


def _free_result(at: PointII, d: Direction) -> PointII:
    r, b = at.radius_exp, at.b
    if d.kind == "center":
        return PointII(at.germ, r + Fraction(1, b))
    germ = at.germ + PuiseuxGerm.monomial(d.residue, r)
    return PointII(germ, r + Fraction(1, b))


def _satellite_result(lower: PointII, upper: PointII) -> PointII:
    r = Fraction(lower.a + upper.a, lower.b + upper.b)
    return PointII(lower.germ, r)


def _infinity_result(at: PointII) -> PointII:
    return PointII(at.germ, at.radius_exp - 1)


def _is_maximum(gamma: VertexSet, p: PointII) -> bool:
    return all(leq(q, p) for q in gamma)


def blowup(gamma: VertexSet, op: BlowupOp) -> tuple[VertexSet, PointII]:
    """Blow up the closed point named by ``op``; refuses non-smooth points."""
    if isinstance(op, FreeAtInfinity):
        at = op.at
        if at not in gamma:
            raise BlowupError(f"{at} is not a vertex")
        if not _is_maximum(gamma, at):
            raise BlowupError(f"{at} does not face infinity")
        if not at.is_integral:
            raise BlowupError(f"the disk toward infinity at {at} is not Farey: vertex not integral")
        new = _infinity_result(at)
    elif isinstance(op, Free):
        at, d = op.at, op.direction
        if at not in gamma:
            raise BlowupError(f"{at} is not a vertex")
        if d.kind == "inf":
            raise BlowupError("use FreeAtInfinity for the direction toward infinity")
        if d.kind == "center" and not at.is_free:
            raise BlowupError(f"center disk at {at} is not Farey: vertex is satellite")
        want = canonical_direction(at, d)
        for q in gamma:
            if lt(q, at) and direction_of(at, q) == want:
                raise BlowupError(f"direction {d} at {at} already holds vertex {q}")
        new = _free_result(at, d)
    elif isinstance(op, Satellite):
        lo, hi = op.lower, op.upper
        if lt(hi, lo):
            lo, hi = hi, lo
        if lo not in gamma or hi not in gamma:
            raise BlowupError("satellite endpoints must be vertices")
        if not lt(lo, hi):
            raise BlowupError("satellite endpoints are not comparable")
        for q in gamma:
            if lt(lo, q) and lt(q, hi):
                raise BlowupError(f"{q} lies between the satellite endpoints")
        if any(lt(lo, join(lo, q)) and lt(join(lo, q), hi) for q in gamma if q not in (lo, hi)):
            raise BlowupError("a branch point lies between the satellite endpoints")
        if not farey_adjacent(lo, hi):
            raise BlowupError(f"annulus between {lo} and {hi} is not Farey: endpoints not adjacent")
        new = _satellite_result(lo, hi)
    else:
        raise TypeError(f"unknown op {op!r}")
    if new in gamma:
        raise BlowupError(f"{new} is already a vertex")
    return gamma.add(new), new


def replay(script: BlowupScript) -> VertexSet:
    gamma = script.base
    for s in script.steps:
        gamma, new = blowup(gamma, s.op)
        if s.result is not None and new != s.result:
            raise BlowupError(f"step produced {new}, script records {s.result}")
    return gamma


def _locate(gamma: VertexSet, target: PointII) -> BlowupOp | str:
    """The blowup of the closed point whose domain holds ``target``.

    Uses only order relations, never the smoothness tests; returns a reason
    string when the domain is not a disk or annulus with a definite centre.
    """
    uppers = [v for v in gamma if leq(target, v)]
    if not uppers:
        tops = [v for v in gamma if _is_maximum(gamma, v)]
        if not tops:
            return "no vertex faces infinity"
        return FreeAtInfinity(tops[0])
    v = max(uppers, key=lambda p: p.radius_exp)
    below = [w for w in gamma if lt(w, v) and same_direction(v, w, target)]
    if not below:
        return Free(v, direction_of(v, target))
    tops = [w for w in below if all(leq(u, w) for u in below)]
    if not tops:
        return f"branch point below {v} in the direction of the target"
    return Satellite(tops[0], v)


def _op_result(op: BlowupOp) -> PointII:
    if isinstance(op, FreeAtInfinity):
        return _infinity_result(op.at)
    if isinstance(op, Free):
        return _free_result(op.at, op.direction)
    return _satellite_result(op.lower, op.upper)


def resolve(target: PointII, base: VertexSet | None = None, max_steps: int = 100_000) -> BlowupScript:
    """Shortest blowup sequence from ``base`` whose final set contains target."""
    base = base if base is not None else VertexSet([gauss_point()])
    verdict = check_smooth(base)
    if not verdict.ok:
        raise BlowupError("base vertex set is not Farey: " + verdict.failures[0][1])
    gamma = base
    steps: list[Step] = []
    while target not in gamma:
        if len(steps) >= max_steps:
            raise BlowupError("resolution did not finish within the step limit")
        op = _locate(gamma, target)
        if isinstance(op, str):
            raise BlowupError(op)
        gamma, new = blowup(gamma, op)
        steps.append(Step(op, new))
    return BlowupScript(base, tuple(steps))


@dataclass
class DeconstructResult:
    ok: bool
    seed: PointII | None
    script: BlowupScript | None
    witness: VertexSet | None = None
    reason: str = ""


def _candidates(gamma: VertexSet) -> list[PointII]:
    """Removal order: largest b first, then minimal under the order, then germ text."""
    pts = list(gamma)
    bmax = max(p.b for p in pts)
    top_b = [p for p in pts if p.b == bmax]
    minimal = [p for p in top_b if not any(lt(q, p) for q in top_b)]
    first = sorted(minimal, key=lambda p: format_germ(p.germ) + "|" + str(p.radius_exp))
    rest = sorted(
        (p for p in pts if p not in first),
        key=lambda p: (-p.b, -p.radius_exp, format_germ(p.germ)),
    )
    return first + rest


def deconstruct(gamma: VertexSet) -> DeconstructResult:
    """Blow the set down one vertex at a time to a single integral vertex."""
    if len(gamma) == 0:
        raise ValueError("empty vertex set")
    removed: list[Step] = []
    cur = gamma
    while len(cur) > 1:
        for z in _candidates(cur):
            rest = cur.remove(z)
            op = _locate(rest, z)
            if not isinstance(op, str) and _removable(op, z):
                removed.append(Step(op, z))
                cur = rest
                break
        else:
            return DeconstructResult(False, None, None, cur, "no vertex can be blown down")
    seed = cur.points[0]
    if not seed.is_integral:
        return DeconstructResult(False, None, None, cur, "remaining vertex is not integral")
    script = BlowupScript(cur, tuple(reversed(removed)))
    return DeconstructResult(True, seed, script)


def _removable(op: BlowupOp, z: PointII) -> bool:
    # blowups are only defined at smooth points; these are the structural parts
    if isinstance(op, FreeAtInfinity) and not op.at.is_integral:
        return False
    if isinstance(op, Free) and op.direction.kind == "center" and not op.at.is_free:
        return False
    return _op_result(op) == z


# -- numerical data of a model ------------------------------------------------

def _neighbours(sk: Skeleton, i: int) -> list[int]:
    out = [k for k in sk.children[i]]
    if sk.parent[i] is not None:
        out.append(sk.parent[i])
    return out


def self_intersection(gamma: VertexSet, z: PointII) -> Fraction:
    if z not in gamma:
        raise ValueError(f"{z} is not a vertex")
    sk = skeleton(gamma)
    i = sk.index(z)
    total = sum(sk.nodes[k].b for k in _neighbours(sk, i) if sk.member[k])
    return Fraction(-total, z.b)


def closed_point_mult(gamma: VertexSet, d: Domain) -> int:
    if isinstance(d, (Disk, InfinityDisk)):
        return d.boundary.b
    if isinstance(d, Annulus):
        return d.lower.b + d.upper.b
    raise ValueError("multiplicity is only defined for disks and annuli")


def export_dual_graph(gamma: VertexSet, fmt: str = "dot") -> str:
    sk = skeleton(gamma)
    nodes = []
    for i, p in enumerate(sk.nodes):
        nodes.append(
            {
                "id": f"n{i}",
                "point": str(p),
                "radius_exp": format_frac(p.radius_exp),
                "a": p.a,
                "b": p.b,
                "m": p.m,
                "steiner": not sk.member[i],
            }
        )
    edges = []
    for i, pa in enumerate(sk.parent):
        if pa is not None:
            edges.append(
                {
                    "source": f"n{i}",
                    "target": f"n{pa}",
                    "length": format_frac(hyp_dist(sk.nodes[i], sk.nodes[pa])),
                }
            )
    if fmt == "json":
        return json.dumps({"nodes": nodes, "edges": edges}, indent=2)
    if fmt != "dot":
        raise ValueError(f"unknown format {fmt!r}")
    lines = ["graph dual {"]
    for n in nodes:
        label = f"{n['point']}\\n(a,b,m)=({n['a']},{n['b']},{n['m']})"
        style = ", style=dashed" if n["steiner"] else ""
        lines.append(f'  {n["id"]} [label="{label}"{style}];')
    for e in edges:
        lines.append(f'  {e["source"]} -- {e["target"]} [label="{e["length"]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
