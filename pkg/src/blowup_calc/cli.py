"""Command-line front end: ``blowup-calc <command> ...``.

Exit codes: 0 ok, 1 negative verdict (non-smooth set, failed blowup,
selftest mismatch), 2 usage or parse error.
"""
from __future__ import annotations

import json
import os
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import click

from . import farey as fy
from .berkovich import (
    PointI,
    PointII,
    classify_point,
    gauss_point,
    parse_point,
    parse_pointII,
    point_from_json,
    point_to_json,
)
from .models import (
    BlowupError,
    BlowupOp,
    BlowupScript,
    Free,
    FreeAtInfinity,
    Satellite,
    Step,
    VertexSet,
    blowup,
    check_smooth,
    deconstruct,
    domain_to_json,
    export_dual_graph,
    farey_adjacent,
    parse_direction,
    resolve,
)
from .puiseux import ParseError, format_jet
from .skew import (
    DEFAULT_ORDER_CAP,
    InstabilityError,
    MapVerdict,
    SkewProduct,
    load_product,
    map_point_exact,
    map_pointI,
    map_pointII,
    map_ray,
    orbit,
    reduction,
)


@dataclass
class Config:
    format: str = "text"
    jet_order_cap: Fraction = DEFAULT_ORDER_CAP
    sample_count_override: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.jet_order_cap <= 0:
            raise ValueError("jet order cap must be positive")

    def map_kw(self) -> dict:
        return {"samples": self.sample_count_override, "order_cap": self.jet_order_cap}


class InputError(click.ClickException):
    exit_code = 2

    def show(self, file=None) -> None:
        click.echo(f"error: {self.format_message()}", err=True)


class Negative(click.ClickException):
    exit_code = 1

    def show(self, file=None) -> None:
        click.echo(self.format_message(), err=True)


# -- input helpers ---------------------------------------------------------

def _slurp(value: str) -> str:
    """A flag value is either a path to an existing file or literal text."""
    if os.path.isfile(value):
        with open(value, encoding="utf-8") as fh:
            return fh.read()
    return value


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur))
    return [p.strip() for p in parts]


def read_point(value: str) -> PointII:
    s = _slurp(value).strip()
    if s.startswith("{"):
        return point_from_json(json.loads(s))
    return parse_pointII(s)


def read_set(value: str) -> VertexSet:
    s = _slurp(value).strip()
    if not s:
        raise ValueError("empty vertex set")
    if s.startswith("["):
        try:
            data = json.loads(s)
        except json.JSONDecodeError:
            data = None
        if isinstance(data, list):
            return VertexSet(point_from_json(o) for o in data)
        if isinstance(data, dict):
            return VertexSet.from_json(data["vertices"])
        if not s.endswith("]"):
            raise ParseError("expected ']' closing the vertex list", s, len(s))
        s = s[1:-1]
    elif s.startswith("{"):
        data = json.loads(s)
        return BlowupScript.from_json(data).final() if "steps" in data else VertexSet.from_json(data["vertices"])
    items = [t for line in s.splitlines() for t in _split_top(line) if t]
    return VertexSet(parse_pointII(t) for t in items)


def read_product(value: str) -> SkewProduct:
    return load_product(_slurp(value))


def format_op(op: BlowupOp) -> str:
    if isinstance(op, FreeAtInfinity):
        return f"free_at_infinity({op.at})"
    if isinstance(op, Free):
        return f"free({op.at}, {op.direction})"
    return f"satellite({op.lower}, {op.upper})"


def parse_op(text: str) -> BlowupOp:
    s = text.strip()
    head, _, body = s.partition("(")
    if not body.endswith(")"):
        raise ParseError("expected <op>(<args>)", text, len(text))
    args = _split_top(body[:-1])
    head = head.strip()
    if head == "free_at_infinity" and len(args) == 1:
        return FreeAtInfinity(parse_pointII(args[0]))
    if head == "free" and len(args) == 2:
        return Free(parse_pointII(args[0]), parse_direction(args[1]))
    if head == "satellite" and len(args) == 2:
        return Satellite(parse_pointII(args[0]), parse_pointII(args[1]))
    raise ParseError(f"unknown op {head!r} or wrong arity", text, 0)


def _set_text(gamma: VertexSet) -> str:
    return "[" + ", ".join(str(p) for p in gamma) + "]"


def _script_text(script: BlowupScript) -> str:
    lines = [f"base: {_set_text(script.base)}"]
    for i, st in enumerate(script.steps, 1):
        lines.append(f"{i:3d}. {format_op(st.op)} -> {st.result}")
    lines.append(f"ops: {len(script)}")
    return "\n".join(lines)


def _emit(cfg: Config, obj, text: str) -> None:
    if cfg.format == "json":
        click.echo(json.dumps(obj, indent=2))
    else:
        click.echo(text)


def _guard(fn):
    """Turn library input errors into exit code 2."""
    import functools

    @functools.wraps(fn)
    def inner(*a, **kw):
        try:
            return fn(*a, **kw)
        except (click.ClickException, click.exceptions.Exit):
            raise
        except ParseError as exc:
            raise InputError(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"bad JSON: {exc}") from exc
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(str(exc)) from exc

    return inner


# -- commands ----------------------------------------------------------------

@click.group()
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized commands.")
@click.option("--jet-cap", type=str, default=str(DEFAULT_ORDER_CAP), show_default=True, help="Hard cap on jet order.")
@click.option("--samples", type=int, default=None, help="Override the number of sampled residues.")
@click.pass_context
def cli(ctx: click.Context, fmt: str, seed: int, jet_cap: str, samples: int | None) -> None:
    """Blowups, Farey parameters and skew products on the Berkovich line."""
    try:
        cap = fy.parse_frac(jet_cap)
        ctx.obj = Config(fmt, cap, samples, seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if samples is not None and samples < 2:
        raise InputError("--samples must be at least 2")


@cli.group()
def farey() -> None:
    """Farey pair arithmetic."""


def _pair(text: str) -> fy.FareyPair:
    s = text.strip()
    if s in ("1/0", "-1/0"):
        return fy.FareyPair(1 if s[0] == "1" else -1, 0)
    return fy.FareyPair.from_fraction(fy.parse_frac(s))


@farey.command("mediant")
@click.argument("p")
@click.argument("q")
@click.pass_obj
@_guard
def farey_mediant(cfg: Config, p: str, q: str) -> None:
    m = fy.mediant(_pair(p), _pair(q))
    _emit(cfg, {"mediant": str(m)}, str(m))


@farey.command("adjacent")
@click.argument("p")
@click.argument("q")
@click.pass_obj
@_guard
def farey_adjacent_cmd(cfg: Config, p: str, q: str) -> None:
    a, b = _pair(p), _pair(q)
    ok = fy.is_adjacent(a, b)
    _emit(cfg, {"adjacent": ok, "bracket": fy.bracket(a, b)}, "adjacent" if ok else "not adjacent")
    if not ok:
        raise click.exceptions.Exit(1)


@farey.command("parents")
@click.argument("p")
@click.pass_obj
@_guard
def farey_parents(cfg: Config, p: str) -> None:
    lo, hi = fy.parents(_pair(p))
    _emit(cfg, {"lo": str(lo), "hi": str(hi)}, f"{lo} {hi}")


@farey.command("haros")
@click.argument("lo")
@click.argument("hi")
@click.argument("p")
@click.pass_obj
@_guard
def farey_haros(cfg: Config, lo: str, hi: str, p: str) -> None:
    m, n = fy.haros_coeffs(_pair(lo), _pair(hi), _pair(p))
    _emit(cfg, {"m": m, "n": n}, f"{m} {n}")


@farey.command("path")
@click.argument("lo")
@click.argument("hi")
@click.argument("target")
@click.pass_obj
@_guard
def farey_path(cfg: Config, lo: str, hi: str, target: str) -> None:
    path = fy.stern_brocot_path(_pair(lo), _pair(hi), _pair(target))
    _emit(cfg, {"path": [str(x) for x in path], "length": len(path)}, " ".join(str(x) for x in path))


@farey.command("sequence")
@click.argument("lo", type=int)
@click.argument("hi", type=int)
@click.argument("order", type=int)
@click.pass_obj
@_guard
def farey_sequence(cfg: Config, lo: int, hi: int, order: int) -> None:
    seq = fy.complete_sequence(lo, hi, order)
    _emit(cfg, [str(x) for x in seq], " ".join(str(x) for x in seq))


@cli.command()
@click.argument("expr")
@click.pass_obj
@_guard
def point(cfg: Config, expr: str) -> None:
    """Invariants (m, b, a) and kind of a disk point."""
    p = parse_point(_slurp(expr).strip())
    if isinstance(p, PointI):
        _emit(cfg, {"point": str(p), "type": "I", "m": p.multiplicity()}, f"{p}  type I  m={p.multiplicity()}")
        return
    kind = classify_point(p).value
    obj = {"point": str(p), **point_to_json(p), "m": p.m, "b": p.b, "a": p.a, "kind": kind}
    _emit(cfg, obj, f"{p}  (m, b, a) = ({p.m}, {p.b}, {p.a})  {kind}")


@cli.command("resolve")
@click.option("--target", required=True, help="Disk point to reach, e.g. 'zeta(x^(5/7), 6/7)'.")
@click.option("--base", default=None, help="Starting vertex set (EXPR or FILE); default the Gauss point.")
@click.pass_obj
@_guard
def resolve_cmd(cfg: Config, target: str, base: str | None) -> None:
    """Minimal blowup script from a smooth set to one containing TARGET."""
    z = read_point(target)
    gamma = read_set(base) if base else None
    try:
        script = resolve(z, gamma)
    except BlowupError as exc:
        raise Negative(f"cannot resolve: {exc}") from exc
    _emit(cfg, {**script.to_json(), "ops": len(script)}, _script_text(script))


@cli.command()
@click.option("--set", "set_", required=True, help="Vertex set (EXPR or FILE).")
@click.pass_obj
@_guard
def check(cfg: Config, set_: str) -> None:
    """Smoothness verdict for a vertex set; exit 1 if not smooth."""
    gamma = read_set(set_)
    v = check_smooth(gamma)
    obj = {
        "ok": v.ok,
        "failures": [{"domain": domain_to_json(d), "reason": r} for d, r in v.failures],
    }
    lines = ["smooth" if v.ok else "not smooth"]
    lines += [f"  {d.describe()}: {r}" for d, r in v.failures]
    _emit(cfg, obj, "\n".join(lines))
    if not v.ok:
        raise click.exceptions.Exit(1)


@cli.command()
@click.option("--base", default=None, help="Starting vertex set (EXPR or FILE); default the Gauss point.")
@click.option("--script", "script_", default=None, help="Blowup script JSON (FILE or text).")
@click.option("--op", "ops", multiple=True, help="One blowup, e.g. 'free(zeta(0, 0), center)'. Repeatable.")
@click.pass_obj
@_guard
def apply(cfg: Config, base: str | None, script_: str | None, ops: Sequence[str]) -> None:
    """Apply blowups and print the resulting vertex set."""
    steps: list = []
    gamma = VertexSet([gauss_point()])
    if script_:
        sc = BlowupScript.from_json(json.loads(_slurp(script_)))
        gamma = sc.base
        steps = list(sc.steps)
    if base:
        gamma = read_set(base)
    steps += [Step(parse_op(o), None) for o in ops]
    done = []
    for i, st in enumerate(steps, 1):
        try:
            gamma, new = blowup(gamma, st.op)
        except BlowupError as exc:
            raise Negative(f"step {i} ({format_op(st.op)}) refused: {exc}") from exc
        if st.result is not None and st.result != new:
            raise Negative(f"step {i} produced {new}, script says {st.result}")
        done.append(new)
    _emit(
        cfg,
        {"vertices": gamma.to_json(), "created": [point_to_json(p) for p in done]},
        _set_text(gamma),
    )


@cli.command("deconstruct")
@click.option("--set", "set_", required=True, help="Vertex set (EXPR or FILE).")
@click.pass_obj
@_guard
def deconstruct_cmd(cfg: Config, set_: str) -> None:
    """Blow a vertex set down to one integral vertex; exit 1 if impossible."""
    gamma = read_set(set_)
    res = deconstruct(gamma)
    if not res.ok:
        obj = {"ok": False, "reason": res.reason, "stuck": res.witness.to_json()}
        _emit(cfg, obj, f"cannot deconstruct: {res.reason}\n  stuck at {_set_text(res.witness)}")
        raise click.exceptions.Exit(1)
    _emit(cfg, {"ok": True, "seed": point_to_json(res.seed), **res.script.to_json()}, _script_text(res.script))


@cli.command()
@click.option("--set", "set_", required=True, help="Vertex set (EXPR or FILE).")
@click.option("--graph-format", type=click.Choice(["dot", "json"]), default=None, help="Defaults to dot, or json under --format json.")
@click.pass_obj
@_guard
def graph(cfg: Config, set_: str, graph_format: str | None) -> None:
    """Dual graph of the convex hull, as DOT or JSON."""
    gamma = read_set(set_)
    fmt = graph_format or ("json" if cfg.format == "json" else "dot")
    click.echo(export_dual_graph(gamma, fmt).rstrip("\n"))


@cli.command("map")
@click.option("--phi", required=True, help="Skew product (EXPR or FILE), e.g. '(x^2, x^2/y)'.")
@click.option("--point", "point_", default=None, help="Point to map: zeta(...), a germ, or inf.")
@click.option("--ray", default=None, help="Map zeta(0, |x|^t) exactly for this t.")
@click.option("--order", default="8", show_default=True, help="Jet order for Type I images.")
@click.option("--reduction", "show_red", is_flag=True, help="Print the reduction of phi2 instead.")
@click.option("--exact", is_flag=True, help="Use the Newton polygon route instead of sampling.")
@click.pass_obj
@_guard
def map_cmd(cfg: Config, phi: str, point_: str | None, ray: str | None, order: str, show_red: bool, exact: bool) -> None:
    """Image of a point under a skew product."""
    f = read_product(phi)
    if show_red:
        r = reduction(f)
        _emit(cfg, {"reduction": str(r), "degree": r.degree, "good": r.good}, f"{r}  degree {r.degree}  {'good' if r.good else 'bad'}")
        return
    if ray is not None:
        img = map_ray(f, fy.parse_frac(ray))
        _emit(cfg, {"image": point_to_json(img), "text": str(img)}, str(img))
        return
    if point_ is None:
        raise InputError("give --point, --ray or --reduction")
    p = parse_point(_slurp(point_).strip())
    if isinstance(p, PointI):
        img = map_pointI(f, p, fy.parse_frac(order))
        text = str(img) if isinstance(img, PointI) else format_jet(img)
        _emit(cfg, {"image": text, "type": "I"}, text)
        return
    try:
        img = map_point_exact(f, p) if exact else map_pointII(f, p, **cfg.map_kw())
    except InstabilityError as exc:
        raise Negative(f"unstable: {exc}") from exc
    _emit(cfg, {"image": point_to_json(img), "text": str(img)}, str(img))


@cli.command("orbit")
@click.option("--phi", required=True, help="Skew product (EXPR or FILE).")
@click.option("--point", "point_", default="zeta(0, 0)", show_default=True)
@click.option("--steps", type=int, default=5, show_default=True)
@click.pass_obj
@_guard
def orbit_cmd(cfg: Config, phi: str, point_: str, steps: int) -> None:
    """Iterate the image of a disk point."""
    f = read_product(phi)
    z = read_point(point_)
    try:
        pts = orbit(f, z, steps, **cfg.map_kw())
    except InstabilityError as exc:
        raise Negative(str(exc)) from exc
    obj = {"orbit": [point_to_json(p) for p in pts], "radius_exps": [fy.format_frac(p.radius_exp) for p in pts]}
    _emit(cfg, obj, "\n".join(str(p) for p in pts))


@cli.command("classify")
@click.option("--phi", required=True, help="Skew product (EXPR or FILE).")
@click.option("--src", required=True, help="Source vertex set (EXPR or FILE).")
@click.option("--tgt", default=None, help="Target vertex set; defaults to the source.")
@click.pass_obj
@_guard
def classify_cmd(cfg: Config, phi: str, src: str, tgt: str | None) -> None:
    """Contraction and indeterminacy verdicts for vertices and domains."""
    from .skew import classify

    f = read_product(phi)
    a = read_set(src)
    b = read_set(tgt) if tgt else a
    v: MapVerdict = classify(f, a, b, **cfg.map_kw())
    obj = v.to_json()
    if cfg.format == "json":
        click.echo(json.dumps(obj, indent=2))
        return
    for row in obj["vertices"]:
        extra = row.get("image", "") + (f" in {row['into']}" if "into" in row else "")
        click.echo(f"vertex {row['vertex']}: {row['verdict']} {extra}".rstrip())
    for row in obj["domains"]:
        extra = row.get("into") or ", ".join(row.get("hits", [])) or row.get("reason", "")
        click.echo(f"{row['domain']}: {row['verdict']} {extra}".rstrip())


# -- selftest ---------------------------------------------------------------

def golden_cases() -> list[tuple[str, object, object]]:
    """(name, expected, thunk) triples for the worked examples."""
    from .berkovich import mk_pointII

    def n_ops(g, r):
        return lambda: len(resolve(mk_pointII(g, r)))

    def orbit_r():
        f = load_product("(x^2, x^2/y)")
        return [p.radius_exp for p in orbit(f, gauss_point(), 5)]

    def hundred_17():
        sc = resolve(mk_pointII("x^(5/7) + x + x^(4/3)", Fraction(3, 2)))
        made = {st.result for st in sc.steps}
        need = [mk_pointII("x^(5/7)", Fraction(6, 7)), mk_pointII("x^(5/7) + x", Fraction(19, 14)), mk_pointII("x^(5/7) + x", Fraction(28, 21))]
        return (len(sc), all(p in made for p in need), check_smooth(sc.final()).ok)

    F = Fraction
    return [
        ("resolve 1/34 ray", 34, n_ops("0", F(1, 34))),
        ("resolve 11/34 ray", 14, n_ops("0", F(11, 34))),
        ("resolve 21/34 ray", 8, n_ops("0", F(21, 34))),
        ("resolve x^(5/7)+x+x^(4/3) at 3/2", (17, True, True), hundred_17),
        ("orbit of Gauss point", [F(0), F(1), F(1, 2), F(3, 4), F(5, 8), F(11, 16)], orbit_r),
        ("ray 0 maps to 1", F(1), lambda: map_ray(load_product("(x^2, x^2/y)"), 0).radius_exp),
        ("ray 2/3 fixed", F(2, 3), lambda: map_ray(load_product("(x^2, x^2/y)"), F(2, 3)).radius_exp),
        ("(x^34, x^21 y) ray 0", F(21, 34), lambda: map_ray(load_product("(x^34, x^21*y)"), 0).radius_exp),
        ("invariants m=6 r=5/9", (6, 18, 10), lambda: (lambda z: (z.m, z.b, z.a))(mk_pointII("x^(1/6)", F(5, 9)))),
        ("adjacent 1/2 and 3/4", True, lambda: farey_adjacent(mk_pointII("0", F(1, 2)), mk_pointII("x^(1/2)", F(3, 4)))),
        ("not adjacent 1/3 and 2/3", False, lambda: farey_adjacent(mk_pointII("0", F(1, 3)), mk_pointII("0", F(2, 3)))),
        ("not adjacent x^(1/3) at 1/2 and Gauss", False, lambda: farey_adjacent(mk_pointII("x^(1/3)", F(1, 2)), gauss_point())),
        ("mediant 2/5 3/7", "5/12", lambda: str(fy.mediant(fy.FareyPair(2, 5), fy.FareyPair(3, 7)))),
        ("bad reduction of x^2/y", False, lambda: reduction(load_product("(x^2, x^2/y)")).good),
    ]


def _random_oracle_check(seed: int, n_scripts: int) -> int:
    """check_smooth against deconstruct on random blowup scripts; returns mismatches."""
    from .berkovich import generic
    from .models import Annulus, TO_CENTER, domains

    rng = random.Random(seed)
    bad = 0
    for _ in range(n_scripts):
        gamma = VertexSet([gauss_point()])
        for _ in range(rng.randint(1, 12)):
            ops: list = [FreeAtInfinity(max(gamma, key=lambda p: -p.radius_exp))]
            for v in gamma:
                ops.append(Free(v, TO_CENTER))
                ops.append(Free(v, generic(rng.choice([1, 2, -1, 3]))))
            ops += [Satellite(d.lower, d.upper) for d in domains(gamma) if isinstance(d, Annulus)]
            rng.shuffle(ops)
            for op in ops:
                try:
                    gamma, _ = blowup(gamma, op)
                    break
                except BlowupError:
                    continue
        cands = [gamma] + ([gamma.remove(rng.choice(gamma.points))] if len(gamma) > 1 else [])
        for g in cands:
            if check_smooth(g).ok != deconstruct(g).ok:
                bad += 1
    return bad


@cli.command()
@click.option("--random", "n_random", type=int, default=20, show_default=True, help="Random oracle scripts to run.")
@click.pass_obj
def selftest(cfg: Config, n_random: int) -> None:
    """Replay the worked examples; exit 1 on any mismatch."""
    failed = 0
    rows = []
    for name, want, thunk in golden_cases():
        try:
            got = thunk()
        except Exception as exc:  # a crash is a failure, not a usage error
            got = f"error: {exc}"
        ok = got == want
        failed += not ok
        rows.append({"case": name, "ok": ok, "expected": str(want), "got": str(got)})
    bad = _random_oracle_check(cfg.seed, n_random)
    failed += bad > 0
    rows.append({"case": f"oracle agreement on {n_random} random scripts (seed {cfg.seed})", "ok": bad == 0, "expected": "0", "got": str(bad)})
    if cfg.format == "json":
        click.echo(json.dumps({"ok": failed == 0, "cases": rows}, indent=2))
    else:
        for r in rows:
            tail = "" if r["ok"] else f"  (expected {r['expected']}, got {r['got']})"
            click.echo(f"{'PASS' if r['ok'] else 'FAIL'}  {r['case']}{tail}")
    if failed:
        raise click.exceptions.Exit(1)


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="blowup-calc", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    # with standalone_mode off, click hands back Exit codes as the return value
    return rv if isinstance(rv, int) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
