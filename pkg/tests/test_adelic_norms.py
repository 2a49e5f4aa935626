import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adelikit.adelic_norms import (
    NotAdelic,
    brute_force_norm,
    certificate_holds,
    check_adelic,
    norm_profile,
    quotient_norm,
    uncertified_primes,
)
from adelikit.exact_arith import INF, BudgetExceeded, DomainError, abs_value, finite_place, prime_divisors
from adelikit.polynomials import QuotientRing, groebner_basis, normal_form

from conftest import P, random_ideal, random_poly

p2, p3, p5, p7 = (finite_place(p) for p in (2, 3, 5, 7))


def coset(text, gens):
    gb = groebner_basis([P(g) for g in gens])
    return normal_form(P(text), gb)


def test_quotient_norm_examples():
    f = coset("x", ["x - 2*y"])
    assert quotient_norm(f, p5) == (1, True)
    assert quotient_norm(f, p2) == (Fraction(1, 2), True)
    assert quotient_norm(coset("x - 2*y", ["x - 2*y"]), p3) == (0, True)
    with pytest.raises(DomainError):
        quotient_norm(f, INF)


def test_norm_profile_examples():
    prof = norm_profile(coset("x", ["x - 2*y"]))
    assert prof.bad_places == {p2}
    assert prof.value_at(p2) == Fraction(1, 2)
    assert prof.value_at(p3) == 1
    prof = norm_profile(coset("7", ["x"]))
    assert prof.bad_places == {p7} and prof.value_at(p7) == Fraction(1, 7)
    assert norm_profile(coset("x + 1", ["x**2 - y"])).bad_places == frozenset()
    with pytest.raises(DomainError):
        norm_profile(coset("0", ["x"]))


def test_base_point_enforced():
    with pytest.raises(DomainError):
        quotient_norm(coset("x", ["x - 1"]), p2)


def test_uncertified_place_flagged():
    # leading coefficient 3 makes p = 3 uncertified
    f = coset("y", ["3*x**2 - y"])
    assert 3 in uncertified_primes(f.ideal)
    value, certified = quotient_norm(f, p3)
    assert not certified
    assert brute_force_norm(f, p3, 2, 16) <= value


def test_brute_force_examples():
    assert brute_force_norm(coset("x", ["x - 2*y"]), p2, 2, 16) == Fraction(1, 2)
    assert brute_force_norm(coset("x**2 - y", ["x**2 - y"]), p3, 1, 4) == 0
    assert brute_force_norm(coset("x + 1", ["x**2 - y"]), p3, 2, 9) == 1


def test_brute_force_budget():
    with pytest.raises(BudgetExceeded):
        brute_force_norm(coset("x", ["x**2 - y"]), p2, 4, 16, budget=3)


def test_oracle_agreement_small():
    rng = random.Random(5)
    checked = 0
    while checked < 15:
        n = rng.choice([2, 3])
        _, gb = random_ideal(rng, n)
        f = normal_form(random_poly(rng, n, 3), gb)
        if f.is_zero():
            continue
        for q in (2, 3, 5):
            v = finite_place(q)
            value, certified = quotient_norm(f, v)
            if certified:
                assert brute_force_norm(f, v, 2, 16) == value
        checked += 1


def test_bad_place_containment():
    rng = random.Random(9)
    for _ in range(40):
        n = rng.choice([2, 3])
        _, gb = random_ideal(rng, n)
        f = normal_form(random_poly(rng, n, 4), gb)
        if f.is_zero():
            continue
        allowed = set(uncertified_primes(gb))
        c = f.rep.content()
        allowed |= set(prime_divisors(c.numerator)) | set(prime_divisors(c.denominator))
        prof = norm_profile(f)
        assert {v.prime for v in prof.bad_places} <= allowed


seeds = st.integers(0, 10**6)


@given(seeds)
def test_norm_axioms(seed):
    rng = random.Random(seed)
    n = rng.choice([2, 3])
    _, gb = random_ideal(rng, n)
    f = normal_form(random_poly(rng, n, 3), gb)
    g = normal_form(random_poly(rng, n, 3), gb)
    a = Fraction(rng.choice([1, -1]) * rng.randint(1, 50), rng.randint(1, 50))
    for q in (2, 3, 5):
        v = finite_place(q)
        if q in uncertified_primes(gb):
            continue
        nf, _ = quotient_norm(f, v)
        ng, _ = quotient_norm(g, v)
        assert (nf == 0) == f.is_zero()
        assert quotient_norm(f + g, v)[0] <= max(nf, ng)
        assert quotient_norm(f * a, v)[0] == abs_value(a, v) * nf
        assert quotient_norm(f * g, v)[0] <= nf * ng


def test_check_adelic_examples():
    Q = QuotientRing.polynomial_ring(1, ["x"])
    ones = [Q.element(Q.one)] * 10
    cert = check_adelic(ones)
    assert cert.c == {} and cert.kappa == {} and (cert.alpha, cert.beta) == (0, 0)
    powers = [Q.element(P(f"x**{o}", ["x"])) for o in range(12)]
    cert = check_adelic(powers)
    assert cert.c == {} and (cert.alpha, cert.beta) == (1, 0)
    assert certificate_holds(cert, powers)
    fact = [Q.element(Q.const(Fraction(1, math.factorial(o)))) for o in range(16)]
    with pytest.raises(NotAdelic, match="not adelic at order"):
        check_adelic(fact)


def test_check_adelic_geometric_bound():
    Q = QuotientRing.polynomial_ring(1, ["x"])
    stream = [Q.element(Q.const(Fraction(3, 2) ** o)) for o in range(20)]
    cert = check_adelic(stream)
    assert cert.c[p2] == 2
    assert certificate_holds(cert, stream)
