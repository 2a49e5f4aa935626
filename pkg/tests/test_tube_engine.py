import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adelikit.adelic_norms import quotient_norm, uncertified_primes
from adelikit.exact_arith import DomainError, finite_place
from adelikit.polynomials import GroebnerBasis, Poly, QuotientRing, groebner_basis, poly_from_string
from adelikit.power_series import TruncatedSeries, compose, factorial_multi
from adelikit.tube_engine import (
    AdelicTube,
    BoundViolation,
    build_chart,
    flatten,
    flatten_series,
    flatten_terms,
    localize_chart,
    parameterize_tube,
    refine_tube,
    retraction_check,
    solve_tube_system,
    standard_tube,
    total_derivative,
    tube_membership,
    verify_bounds,
    verify_cover,
)

from conftest import random_chart, series

Q = QuotientRing.rationals()
XY = ["x", "y"]
Z12 = ["z1", "z2"]


def poly(text, names):
    return poly_from_string(text, list(names))


def plane_chart(etale=("x", "y"), p=1):
    gb = GroebnerBasis.zero_ideal(2, names=XY)
    return build_chart(gb, [poly(f, XY) for f in etale], p)


def hyperbola_chart():
    gb = groebner_basis([poly("z1*z2 - 1", Z12)], names=Z12)
    return build_chart(gb, [poly("z1 - 1", Z12)], 1)


def test_build_chart_examples():
    assert plane_chart().derivations == ((poly("1", XY), Poly.zero(2)), (Poly.zero(2), poly("1", XY)))
    assert hyperbola_chart().derivations == ((poly("1", Z12), poly("-z2**2", Z12)),)
    ch = plane_chart(("x + y**2", "y"))
    assert ch.derivations == ((poly("1", XY), Poly.zero(2)), (poly("-2*y", XY), poly("1", XY)))


def test_chart_kronecker_and_ideal_stability():
    rng = random.Random(2)
    for ch in [hyperbola_chart(), plane_chart(("x + y**2", "y"))] + [random_chart(rng) for _ in range(8)]:
        for i in range(ch.q):
            for j, f in enumerate(ch.etale):
                assert ch.derive(i, f) == ch.ring.const(1 if i == j else 0)
            for g in ch.ideal.generators:
                assert not ch.derive(i, g).terms


def test_build_chart_rejects_degenerate():
    gb = GroebnerBasis.zero_ideal(2, names=XY)
    with pytest.raises(DomainError):
        build_chart(gb, [poly("x", XY), poly("2*x", XY)], 1)


def test_flatten_examples():
    ch = plane_chart()
    out = flatten(poly("x + y", XY), ch, 6)
    assert out.constant_rep() == poly("y", XY) and len(out.coeffs) == 1
    assert flatten(poly("x*y", XY), ch, 6).is_zero()
    out = flatten(poly("y**2", XY), ch, 6)
    assert out.constant_rep() == poly("y**2", XY) and len(out.coeffs) == 1


def test_parameterize_examples():
    gb = GroebnerBasis.zero_ideal(1, names=["x"])
    sol = parameterize_tube(build_chart(gb, [poly("x", ["x"])], 1), 6)
    assert sol[0].equal_mod(series("u", 6, ["u"], sol.ring))
    sol = parameterize_tube(hyperbola_chart(), 12)
    assert sol[0].equal_mod(series("1 + u", 12, ["u"], sol.ring))
    geo = TruncatedSeries(sol.ring, 1, 12, {(n,): sol.ring.const((-1) ** n) for n in range(12)})
    assert sol[1].equal_mod(geo)
    sol = parameterize_tube(plane_chart(), 8)
    assert sol[0].equal_mod(series("u", 8, ["u"], sol.ring))
    assert sol[1].equal_mod(TruncatedSeries.constant(sol.ring, poly("y", XY), 1, 8))


def test_solver_examples():
    z = ["z"]
    sol = solve_tube_system([poly("z", z)], [series("3 + u", 6)], [Poly.constant(3, 0)])
    assert sol[0].equal_mod(series("3 + u", 6))
    sol = solve_tube_system([poly("z**2", z)], [series("1 + u", 8)], [Poly.constant(1, 0)])
    binom = [Fraction(1)]
    for n in range(1, 8):
        binom.append(binom[-1] * (Fraction(1, 2) - n + 1) / n)
    assert all(sol[0].coefficient_rep((n,)).constant_term() == binom[n] for n in range(8))
    B = [poly("z1 + z2", Z12), poly("z1*z2", Z12)]
    sol = solve_tube_system(B, [series("3 + u", 8), series("2 + u", 8)], [Poly.constant(2, 0), Poly.constant(1, 0)])
    assert sol[0].equal_mod(series("2 + u", 8)) and sol[1].equal_mod(series("1", 8))


def test_solver_errors():
    z = ["z"]
    with pytest.raises(DomainError):
        solve_tube_system([poly("z**2", z)], [series("1 + u", 4)], [Poly.constant(2, 0)])
    with pytest.raises(DomainError):
        solve_tube_system([poly("z**2", z)], [series("u", 4)], [Poly.constant(0, 0)])


def test_solver_methods_agree():
    z = ["z"]
    a = solve_tube_system([poly("z**3 + z", z)], [series("2 + u - u**2", 7)], [Poly.constant(1, 0)])
    b = solve_tube_system(
        [poly("z**3 + z", z)], [series("2 + u - u**2", 7)], [Poly.constant(1, 0)], method="faa_di_bruno"
    )
    assert a[0].equal_mod(b[0])


def _check_conditions(ch, sol):
    N = sol.order
    for g in ch.ideal.generators:
        assert compose(g, list(sol), N).is_zero()
    for t, f in enumerate(ch.etale):
        pulled = compose(f, list(sol), N)
        if t < ch.p:
            assert pulled.equal_mod(TruncatedSeries.variable(sol.ring, t, ch.p, N))
        else:
            assert pulled.equal_mod(TruncatedSeries.constant(sol.ring, f, ch.p, N))
    assert tuple(c.constant_rep() for c in sol) == sol.base_point


def test_solution_conditions_and_retraction():
    rng = random.Random(4)
    charts = [hyperbola_chart(), plane_chart(), plane_chart(("x + y**2", "y"))]
    charts += [random_chart(rng) for _ in range(6)]
    for ch in charts:
        sol = parameterize_tube(ch, 8)
        _check_conditions(ch, sol)
        assert retraction_check(sol)
        assert all(r == 0 for r in sol.residuals)


def test_uniqueness_under_permuted_minor():
    ch = hyperbola_chart()
    a = parameterize_tube(ch, 8, minor_rows=[0, 1])
    b = parameterize_tube(ch, 8, minor_rows=[1, 0])
    assert all(x.equal_mod(y) for x, y in zip(a, b))


def test_flatness_and_idempotence():
    rng = random.Random(6)
    charts = [hyperbola_chart(), plane_chart(), plane_chart(("x + y**2", "y"), 2)]
    charts += [random_chart(rng) for _ in range(4)]
    for ch in charts:
        sol = parameterize_tube(ch, 8)
        for _ in range(3):
            a = ch.ring.reduce(_random_element(rng, ch.nvars))
            S = flatten_terms(a, ch, 8)
            for ell in range(ch.p):
                assert total_derivative(S, ch, ell).is_zero()
            assert flatten_series(S, ch).equal_mod(S)
            flat = flatten(a, ch, 8, sol)
            assert all(not any(m) for m in flat.coeffs)
            assert flat.constant_rep() == sol.ring.reduce(a)


def _random_element(rng, n):
    terms = {}
    for _ in range(3):
        mono = tuple(rng.randint(0, 2) for _ in range(n))
        terms[mono] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return Poly(n, terms)


def test_verify_bounds_examples():
    rep = verify_bounds(parameterize_tube(plane_chart(), 8))
    assert rep.alpha == 0 and rep.beta == 1 and rep.tau == {}
    rep = verify_bounds(parameterize_tube(hyperbola_chart(), 8))
    assert rep.alpha == 0 and rep.tau == {}
    sol = solve_tube_system([poly("z**2", ["z"])], [series("1 + u", 10)], [Poly.constant(1, 0)])
    rep = verify_bounds(sol)
    assert rep.bad_places == (finite_place(2),)
    assert set(rep.tau) == {finite_place(2)}
    with pytest.raises(DomainError):
        verify_bounds(parameterize_tube(plane_chart(), 4))


def test_verify_bounds_flags_a_tampered_solution():
    sol = parameterize_tube(hyperbola_chart(), 8)
    bad = sol[1] + TruncatedSeries(sol.ring, 1, 8, {(3,): sol.ring.const(Fraction(1, 7))})
    forged = type(sol)(**{**sol.__dict__, "components": (sol[0], bad)})
    with pytest.raises(BoundViolation):
        verify_bounds(forged)


def test_derivative_norm_inequality():
    rng = random.Random(8)
    for _ in range(6):
        ch = random_chart(rng)
        bad = ch.bad_primes() | uncertified_primes(ch.ideal)
        u = ch.ring.reduce(_random_element(rng, ch.nvars))
        for q in (2, 3, 5, 7):
            if q in bad or not u.terms:
                continue
            v = finite_place(q)
            base = ch.ring.element(u)
            for i in range(ch.q):
                d = u
                for k in range(1, 7):
                    d = ch.derive(i, d)
                    term = ch.ring.element(d.scale(Fraction(1, factorial_multi((k,)))))
                    assert quotient_norm(term, v)[0] <= quotient_norm(base, v)[0]


def test_localization():
    ch = plane_chart()
    loc = localize_chart(ch, poly("1 + x", XY))
    assert loc.nvars == 3
    assert all(not g.constant_term() for g in loc.ideal.generators)
    sol = parameterize_tube(loc, 6)
    assert retraction_check(sol)
    assert verify_cover([poly("1 + x", XY), poly("x", XY)], [Poly.one(2), Poly.constant(-1, 2)], ch.ideal)


def test_tube_membership_examples():
    T = standard_tube(["y", "z"], 1, 2, 2)
    p2, p3 = finite_place(2), finite_place(3)
    assert not tube_membership([2, 1], T, p2)
    assert tube_membership([4, 1], T, p2)
    assert tube_membership([3, 1], T, p3)


def test_tube_validation():
    with pytest.raises(DomainError):
        standard_tube(["y", "z"], 1, 0, 2)
    with pytest.raises(DomainError):
        standard_tube(["y", "z"], 1, 2, 1)
    gb = groebner_basis([poly("z - y**2", ["y", "z"])], names=["y", "z"])
    T = standard_tube(["y", "z"], 1, 2, 2, gb)
    with pytest.raises(DomainError):
        tube_membership([1, 2], T, finite_place(2))


@given(st.integers(-64, 64), st.integers(-64, 64))
def test_membership_matches_direct_inequalities(a, b):
    from adelikit.exact_arith import abs_value

    T = standard_tube(["y", "z"], 1, 6, 3)
    for q in (2, 3, 5):
        v = finite_place(q)
        direct = all(
            abs_value(Fraction(a) ** a1 * Fraction(b) ** a2, v) < abs_value(6, v)
            for a1 in range(1, 4)
            for a2 in range(0, 4 - a1)
        )
        assert tube_membership([a, b], T, v) == direct


def _tube(names, ys, rho, alpha):
    return AdelicTube(tuple(names), tuple(poly(y, names) for y in ys), rho, alpha)


def test_refine_identity():
    T = _tube(["y", "z"], ["y"], 2, 2)
    Tp = _tube(["y", "z"], ["y"], 3, 3)
    res = refine_tube(T, Tp, [[poly("1", ["y", "z"])]], [poly("y", ["y", "z"]), poly("z", ["y", "z"])])
    assert res.tube.alpha == 3
    for q in (2, 3, 5):
        v = finite_place(q)
        from adelikit.exact_arith import abs_value

        assert abs_value(res.tube.rho, v) <= min(abs_value(2, v), abs_value(3, v))


@pytest.mark.parametrize("coef,rho", [("1", 4), ("1/3", 12), ("3", 4), ("1/9", 36)])
def test_refine_quadratic_lift(coef, rho):
    names = ["yp", "zp"]
    T = _tube(["y", "z"], ["y"], 2, 2)
    Tp = _tube(names, ["yp"], 2, 2)
    h = [[poly(f"(1 + zp)*{coef}", names)]]
    g = [poly(f"yp*(1 + zp)*{coef}", names), poly("zp**2", names)]
    res = refine_tube(T, Tp, h, g)
    assert res.tau0 == 2
    assert res.tube.alpha == 8
    assert res.tube.rho == rho


def test_refine_rejects_bad_lifting():
    names = ["yp", "zp"]
    T = _tube(["y", "z"], ["y"], 2, 2)
    Tp = _tube(names, ["yp"], 2, 2)
    with pytest.raises(DomainError):
        refine_tube(T, Tp, [[poly("2", names)]], [poly("yp", names), poly("zp", names)])
