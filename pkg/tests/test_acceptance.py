"""One pass/fail line per acceptance criterion, echoed in the terminal summary."""

import random
import time
from fractions import Fraction as F
from functools import cache
from math import gcd, lcm

from blowup_calc.berkovich import PointII, hyp_dist, invariants, mk_pointII
from blowup_calc.farey import FareyPair, complete_sequence, is_adjacent, mediant, stern_brocot_path
from blowup_calc.models import (
    FreeAtInfinity,
    Satellite,
    blowup,
    check_smooth,
    deconstruct,
    farey_adjacent,
    replay,
    resolve,
)
from blowup_calc.puiseux import PuiseuxGerm, parse_germ
from blowup_calc.skew import annulus_degree, map_point_exact, map_pointII, map_ray, orbit, parse_product

import conftest
from conftest import PRODUCT_CORPUS, random_corpus, random_point, random_product, random_ray

# pinned limits
RESOLVE_SECONDS = 0.1
ORACLE_SECONDS = 60.0
ORACLE_MIN_SETS = 1000
SIMPLE_PRODUCTS = 200
GENERAL_PRODUCTS = 60
RAYS_PER_PRODUCT = 50


def Z(g: str, r) -> PointII:
    return mk_pointII(parse_germ(g), F(r))


def report(n: int, ok: bool, text: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _timed_resolve(target):
    start = time.perf_counter()
    sc = resolve(target)
    return sc, time.perf_counter() - start


def test_criterion_1_monomial_counts():
    got = {}
    slow = 0.0
    for t in (F(1, 34), F(11, 34), F(21, 34)):
        sc, dt = _timed_resolve(Z("0", t))
        got[str(t)] = len(sc)
        slow = max(slow, dt)
    ok = got == {"1/34": 34, "11/34": 14, "21/34": 8} and slow < RESOLVE_SECONDS
    report(1, ok, f"resolve op counts {got} (want 34/14/8), slowest {slow:.4f}s < {RESOLVE_SECONDS}s")


def test_criterion_2_seventeen_blowups():
    sc, dt = _timed_resolve(Z("x^(5/7) + x + x^(4/3)", F(3, 2)))
    made = [s.result for s in sc.steps]
    need = [Z("x^(5/7)", F(6, 7)), Z("x^(5/7) + x", F(19, 14)), Z("x^(5/7) + x", F(28, 21))]
    ok = len(sc) == 17 and all(p in made for p in need) and check_smooth(sc.final()).ok and dt < RESOLVE_SECONDS
    report(2, ok, f"{len(sc)} ops (want 17), waypoints present {all(p in made for p in need)}, "
                  f"final smooth {check_smooth(sc.final()).ok}, {dt:.4f}s")


def test_criterion_3_orbit_and_fixed_ray():
    phi = parse_product("(x^2, x^2/y)")
    radii = [p.radius_exp for p in orbit(phi, Z("0", 0), 5)][1:]
    fixed = map_ray(phi, F(2, 3)).radius_exp
    ok = radii == [1, F(1, 2), F(3, 4), F(5, 8), F(11, 16)] and fixed == F(2, 3)
    report(3, ok, f"orbit radii {[str(r) for r in radii]}, ray 2/3 -> {fixed}")


def test_criterion_4_invariant_triple():
    got = invariants(Z("x^(1/6)", F(5, 9)))
    report(4, got == (6, 18, 10), f"(m, b, a) = {got} (want (6, 18, 10))")


def test_criterion_5_adjacency_examples():
    pos = farey_adjacent(Z("x^(1/2)", F(3, 4)), Z("x^(1/2)", F(1, 2)))
    neg1 = farey_adjacent(Z("0", F(1, 3)), Z("0", F(2, 3)))
    neg2 = farey_adjacent(Z("x^(1/3)", F(1, 2)), Z("0", 0))
    report(5, pos and not neg1 and not neg2, f"multiplicity-two pair {pos}, counterexamples {neg1}, {neg2}")


@cache
def _oracle_corpus():
    corpus, seed = [], 2025
    while sum(len(sets) for _, sets in corpus) < ORACLE_MIN_SETS:
        corpus += random_corpus(seed, 50, max_len=25, deletions=2)
        seed += 1
    return corpus


def test_criterion_6_oracle_equivalence():
    start = time.perf_counter()
    corpus = _oracle_corpus()
    n_sets = mismatches = bad_replay = smooth = 0
    for sc, sets in corpus:
        if replay(sc) != sc.final():
            bad_replay += 1
        for g in sets:
            n_sets += 1
            verdict, res = check_smooth(g), deconstruct(g)
            smooth += verdict.ok
            if verdict.ok != res.ok:
                mismatches += 1
            elif res.ok and replay(res.script) != g:
                bad_replay += 1
    dt = time.perf_counter() - start
    ok = n_sets >= ORACLE_MIN_SETS and mismatches == 0 and bad_replay == 0 and dt < ORACLE_SECONDS
    report(6, ok, f"{n_sets} sets ({smooth} smooth), {mismatches} verdict mismatches, "
                  f"{bad_replay} replay failures, {dt:.1f}s < {ORACLE_SECONDS}s")


def test_criterion_7_farey_addition():
    checked = bad = 0
    for sc, _ in _oracle_corpus():
        g = sc.base
        for step in sc.steps:
            g, new = blowup(g, step.op)
            op = step.op
            if isinstance(op, Satellite):
                want = (op.lower.a + op.upper.a, op.lower.b + op.upper.b)
            elif isinstance(op, FreeAtInfinity):
                want = (op.at.a - 1, 1)
            else:
                want = (op.at.a + 1, op.at.b)
            m, b, a = invariants(mk_pointII(new.germ, new.radius_exp))
            checked += 1
            bad += (a, b) != want or gcd(a, b // m) != 1
    report(7, checked > 0 and bad == 0, f"{checked} blowups, {bad} discrepancies")


def test_criterion_8_divisibility():
    rng = random.Random(88)
    simple_bad = general_bad = 0
    for _ in range(SIMPLE_PRODUCTS):
        phi, z = random_product(rng), random_point(rng)
        w = map_pointII(phi, z, check=False)
        simple_bad += z.m % w.m != 0
    for _ in range(GENERAL_PRODUCTS):
        phi, z = random_product(rng, simple=False), random_point(rng)
        w = map_pointII(phi, z, check=False)
        general_bad += (phi.n * lcm(z.m, phi.mult)) % w.m != 0
        general_bad += w != map_point_exact(phi, z)
    ok = simple_bad == 0 and general_bad == 0
    report(8, ok, f"{SIMPLE_PRODUCTS} simple products: {simple_bad} violations; "
                  f"{GENERAL_PRODUCTS} Puiseux products: {general_bad} violations")


def test_criterion_9_ray_agreement_and_spine_scaling():
    rng = random.Random(99)
    rays = mism = spines = scale_bad = 0
    for text in PRODUCT_CORPUS:
        phi = parse_product(text)
        for _ in range(RAYS_PER_PRODUCT):
            t = random_ray(rng)
            rays += 1
            mism += map_ray(phi, t) != map_pointII(phi, PointII(PuiseuxGerm(), t))
        for _ in range(20):
            t1, t2 = sorted([random_ray(rng), random_ray(rng)])
            if t1 == t2:
                continue
            lo, up = PointII(PuiseuxGerm(), t2), PointII(PuiseuxGerm(), t1)
            deg = annulus_degree(phi, lo, up)
            if deg is None:
                continue
            spines += 1
            d = hyp_dist(map_pointII(phi, lo), map_pointII(phi, up))
            scale_bad += d != F(deg, phi.n) * (t2 - t1)
    ok = rays == RAYS_PER_PRODUCT * len(PRODUCT_CORPUS) and mism == 0 and spines > 0 and scale_bad == 0
    report(9, ok, f"{rays} rays over {len(PRODUCT_CORPUS)} products: {mism} mismatches; "
                  f"{spines} monomial annuli: {scale_bad} scaling failures")


def _brute_depth(target: F) -> int:
    frontier, depth = [(FareyPair.of(0, 1), FareyPair.of(1, 1))], 0
    while True:
        depth += 1
        nxt = []
        for a, b in frontier:
            m = mediant(a, b)
            if m.to_fraction() == target:
                return depth
            if a.to_fraction() < target < m.to_fraction():
                nxt.append((a, m))
            elif m.to_fraction() < target < b.to_fraction():
                nxt.append((m, b))
        frontier = nxt


def test_criterion_10_farey_brute_force():
    seq_bad = 0
    for order in range(1, 13):
        vals = sorted({F(a, b) for b in range(1, order + 1) for a in range(0, b + 1)})
        got = complete_sequence(0, 1, order)
        seq_bad += [p.to_fraction() for p in got] != vals
        seq_bad += not all(is_adjacent(a, b) for a, b in zip(got, got[1:]))
    path_bad = paths = 0
    for den in range(2, 51):
        for num in range(1, den):
            if gcd(num, den) == 1:
                paths += 1
                t = F(num, den)
                path = stern_brocot_path(FareyPair.of(0, 1), FareyPair.of(1, 1), FareyPair.from_fraction(t))
                path_bad += len(path) != _brute_depth(t)
    report(10, seq_bad == 0 and path_bad == 0,
           f"sequences B<=12: {seq_bad} mismatches; {paths} paths (den<=50): {path_bad} mismatches")
