import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from adelikit.polynomials import Poly, poly_from_string

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def P(text, names=("x", "y")):
    return poly_from_string(text, list(names))


def random_rational(rng, size=9):
    num = rng.randint(-size, size)
    den = rng.randint(1, size)
    return Fraction(num, den)


def random_poly(rng, nvars, degree, nterms=4, size=9, constant=True):
    terms = {}
    for _ in range(nterms):
        d = rng.randint(0 if constant else 1, degree)
        mono = [0] * nvars
        for _ in range(d):
            mono[rng.randrange(nvars)] += 1
        terms[tuple(mono)] = random_rational(rng, size)
    return Poly(nvars, terms)


@pytest.fixture
def rng():
    return random.Random(1234)


def random_ideal(rng, nvars, degree=3, ngens=None):
    """A small ideal through the origin with a cheap Groebner basis."""
    from adelikit.polynomials import groebner_basis

    while True:
        k = ngens or rng.choice([1, 1, 2])
        gens = [random_poly(rng, nvars, degree, nterms=3, size=6, constant=False) for _ in range(k)]
        gens = [g for g in gens if g.terms]
        if not gens:
            continue
        gb = groebner_basis(gens)
        if not gb.is_unit_ideal() and len(gb.generators) <= 6:
            return gens, gb


def series(text, order, names=("u",), ring=None):
    from adelikit.polynomials import QuotientRing
    from adelikit.power_series import TruncatedSeries

    ring = ring or QuotientRing.rationals()
    f = poly_from_string(text, list(names))
    return TruncatedSeries(ring, len(names), order, {m: ring.const(c) for m, c in f.terms.items()})


def random_series(rng, ring, nvars, order, constant=True, density=0.6, size=5):
    from adelikit.power_series import TruncatedSeries, monomials_below

    coeffs = {}
    for m in monomials_below(nvars, order):
        if not any(m) and not constant:
            continue
        if rng.random() < density:
            c = ring.const(random_rational(rng, size))
            if ring.nvars and rng.random() < 0.5:
                c = c + Poly.var(rng.randrange(ring.nvars), ring.nvars).scale(random_rational(rng, size))
            coeffs[m] = c
    return TruncatedSeries(ring, nvars, order, coeffs)


def random_fdb_instance(rng, order=9):
    """Outer function and inner series for the Faa di Bruno cross-check.

    Half of the instances use a polynomial outer function with inner series
    that have a constant term; the rest use a series outer function with inner
    series vanishing at the origin.
    """
    from adelikit.polynomials import QuotientRing, groebner_basis

    rings = [
        QuotientRing.rationals(),
        QuotientRing.polynomial_ring(1, ["x"]),
        QuotientRing(groebner_basis([poly_from_string("x**2 - 2*x", ["x"])])),
    ]
    ring = rng.choice(rings)
    nu = rng.choice([1, 2])
    sigma = rng.choice([1, 2])
    if rng.random() < 0.5:
        B = random_poly(rng, sigma, 3, nterms=4, size=4)
        A = [random_series(rng, ring, nu, order, constant=True, density=0.4) for _ in range(sigma)]
    else:
        B = random_series(rng, ring, sigma, order, constant=True, density=0.4)
        A = [random_series(rng, ring, nu, order, constant=False, density=0.4) for _ in range(sigma)]
    return B, A


def random_chart(rng, max_vars=3):
    """A graph hypersurface ``z_m = h(z_1..z_{m-1})`` with triangular etale coordinates.

    ``f_i = c_i z_i + q_i(z_{i+1}, ..)`` has an invertible constant Jacobian
    block, so the dual derivations exist over the polynomial ring.
    """
    from adelikit.polynomials import groebner_basis
    from adelikit.tube_engine import build_chart

    m = rng.randint(2, max_vars)
    names = [f"z{i + 1}" for i in range(m)]
    q = m - 1
    h = random_poly(rng, q, 2, nterms=3, size=4, constant=False)
    h = Poly(m, {mono + (0,): c for mono, c in h.terms.items()})
    graph = Poly.var(m - 1, m) - h
    gb = groebner_basis([graph], names=names)
    etale = []
    for i in range(q):
        c = Fraction(rng.choice([1, -1, 2, 3, -1]), rng.choice([1, 1, 2]))
        f = Poly.var(i, m).scale(c)
        if i + 1 < q:
            tail = random_poly(rng, q - i - 1, 2, nterms=2, size=3, constant=False)
            f = f + Poly(m, {(0,) * (i + 1) + mono + (0,): cc for mono, cc in tail.terms.items()})
        etale.append(f)
    p = rng.randint(1, q)
    return build_chart(gb, etale, p)


def random_invertible(rng, n):
    from adelikit.linalg import identity, inverse, matmul

    g = identity(n)
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        e = identity(n)
        if i != j:
            e[i][j] = Fraction(rng.randint(-3, 3), rng.choice([1, 1, 2]))
        else:
            e[i][i] = Fraction(rng.choice([2, -1, 3]))
        g = matmul(g, e)
    return g, inverse(g)


def random_nilpotent(rng, n_max=8, max_block=3):
    """A conjugated Jordan nilpotent with random block sizes; returns (N, blocks, g)."""
    from adelikit.monodromy_weight import conjugate, jordan_nilpotent

    n = rng.randint(1, n_max)
    blocks = []
    while sum(blocks) < n:
        blocks.append(rng.randint(1, min(max_block, n - sum(blocks))))
    rng.shuffle(blocks)
    g, g_inv = random_invertible(rng, n)
    return conjugate(jordan_nilpotent(blocks), g, g_inv), blocks, g


def random_strata(rng):
    from adelikit.monodromy_weight import StrataData

    comps = tuple((rng.randint(1, 2), rng.randint(0, 4), rng.randint(0, 20)) for _ in range(rng.randint(1, 6)))
    curves = tuple((rng.randint(1, 2), rng.randint(0, 6)) for _ in range(rng.randint(0, 8)))
    return StrataData(comps, curves, rng.randint(0, 6))


# one (number, title, passed, detail) entry per acceptance criterion, printed at the end
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title} ({detail})")
