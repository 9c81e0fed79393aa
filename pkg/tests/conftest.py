import random
from fractions import Fraction

from hypothesis import settings

from blowup_calc.berkovich import TO_CENTER, PointII, gauss_point, generic, mk_pointII
from blowup_calc.models import (
    Annulus,
    BlowupError,
    BlowupScript,
    Free,
    FreeAtInfinity,
    Satellite,
    Step,
    VertexSet,
    blowup,
    domains,
    skeleton,
)
from blowup_calc.puiseux import PuiseuxGerm, as_jet
from blowup_calc.skew import SkewProduct

RESIDUES = [1, 2, -1, 3, Fraction(1, 2), -2]

# acceptance lines collected during the run, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_script(rng: random.Random, n: int) -> BlowupScript:
    """n legal blowups from the Gauss point, picking uniformly among shuffled ops."""
    gamma = VertexSet([gauss_point()])
    steps = []
    for _ in range(n):
        sk = skeleton(gamma)
        ops = [FreeAtInfinity(sk.nodes[sk.top])]
        for v in gamma:
            ops.append(Free(v, TO_CENTER))
            ops.append(Free(v, generic(rng.choice(RESIDUES))))
        ops += [Satellite(d.lower, d.upper) for d in domains(gamma, sk) if isinstance(d, Annulus)]
        rng.shuffle(ops)
        for op in ops:
            try:
                gamma, new = blowup(gamma, op)
            except BlowupError:
                continue
            steps.append(Step(op, new))
            break
    return BlowupScript(VertexSet([gauss_point()]), tuple(steps))


def random_corpus(seed: int, n_scripts: int, max_len: int = 25, deletions: int = 2):
    """(script, [vertex sets]) pairs: the final set plus random single deletions."""
    rng = random.Random(seed)
    out = []
    for _ in range(n_scripts):
        sc = random_script(rng, rng.randint(0, max_len))
        g = sc.final()
        sets = [g]
        if len(g) > 1:
            for p in rng.sample(list(g), min(deletions, len(g))):
                sets.append(g.remove(p))
        out.append((sc, sets))
    return out


PRODUCT_CORPUS = [
    "(x^2, x^2/y)",
    "(x^34, x^21*y)",
    "(x, y^2)",
    "(x, (y^2 + x)/(1 + x*y))",
    "(x^2*(1 + x), (y^2 + x)/(1 + x*y))",
    "(x^3, (y^3 + x^2*y)/(x + y^2))",
    "(x, x^(1/2)*y + y^3)",
    "(x^2, (y - x)/(y^2 + x^3))",
    "(x*(1 + x), y^2 + x*y + x^3)",
    "(x^3, (x + y^3)/y^2)",
]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


settings.register_profile("default", deadline=None)
settings.load_profile("default")


def _random_germ(rng: random.Random, den: int = 1, lo: int = -1, hi: int = 3, k: int = 2) -> PuiseuxGerm:
    terms = [
        (Fraction(rng.randint(lo * den, hi * den), den), Fraction(rng.choice([1, -1, 2, 3, -2])))
        for _ in range(rng.randint(1, k))
    ]
    return PuiseuxGerm.from_terms(terms)


def random_product(rng: random.Random, simple: bool = True) -> SkewProduct:
    """Random phi2 = P/Q of degree <= 2; Laurent coefficients and phi1 = x when simple."""
    while True:
        den = 1 if simple else rng.randint(1, 4)
        dp, dq = rng.randint(0, 2), rng.randint(0, 2)
        if max(dp, dq) < 1:
            continue
        P = [_random_germ(rng, den) if rng.random() < 0.7 else PuiseuxGerm() for _ in range(dp)]
        Q = [_random_germ(rng, den) if rng.random() < 0.7 else PuiseuxGerm() for _ in range(dq)]
        P.append(_random_germ(rng, den))
        Q.append(_random_germ(rng, den))
        n, unit = 1, PuiseuxGerm.const(1)
        if not simple:
            n = rng.randint(1, 3)
            unit = unit + PuiseuxGerm.monomial(rng.choice([0, 1, -1, 2]), 1)
        try:
            return SkewProduct(Fraction(1), n, as_jet(unit), tuple(P), tuple(Q))
        except ValueError:
            continue


def random_point(rng: random.Random, max_m: int = 12) -> PointII:
    m = rng.randint(1, max_m)
    g = PuiseuxGerm.from_terms(
        [(Fraction(rng.randint(0, 3 * m), m), Fraction(rng.choice([1, -1, 2]))) for _ in range(rng.randint(0, 3))]
    )
    r = Fraction(rng.randint(0, 3 * m), m) + Fraction(rng.randint(1, 3), rng.randint(1, 4) * m)
    return mk_pointII(g, r)


def random_ray(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-12, 36), rng.randint(1, 12))
