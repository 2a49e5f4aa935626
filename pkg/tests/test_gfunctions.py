import math
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adelikit.exact_arith import INF, DomainError, finite_place, primes_up_to
from adelikit.gfunctions import (
    GSystem,
    LogConnection,
    evaluate_relation,
    flat_section,
    hypergeometric_connection,
    ode_residual,
    radius_profile,
    relevant_places,
    residue,
    transport_flat_section,
    truncated_height,
    weil_height,
)
from adelikit.polynomials import poly_from_string


def closed_form(n):
    return Fraction(comb(2 * n, n), 4**n) ** 2


def kummer_v2(n):
    # v_2 of binom(2n, n) is the number of carries when adding n + n
    return 2 * bin(n).count("1") - 4 * n


def geometric(order=80):
    return GSystem.from_coefficients([[1] * order])


def test_residue_examples():
    assert residue(LogConnection.from_matrices([[0, 0], [0, 0]])) == [[0, 0], [0, 0]]
    assert residue(LogConnection.from_matrices([[1, 2], [3, 4]])) == [[1, 2], [3, 4]]
    conn = LogConnection.from_matrices([[0, 1], [0, 0]], [[1, 0], [0, 0]])
    assert residue(conn) == [[0, 1], [0, 0]]


def test_higher_pole_rejected():
    with pytest.raises(DomainError):
        LogConnection([[([1], [0, 0, 1])]])


def test_flat_section_examples():
    zero = LogConnection.from_matrices([[0, 0], [0, 0]])
    assert flat_section(zero, [3, -1], 6).coeffs == ((3, 0, 0, 0, 0, 0), (-1, 0, 0, 0, 0, 0))
    nil = LogConnection.from_matrices([[0, 1], [0, 0]])
    assert flat_section(nil, [1, 0], 6).coeffs == ((1, 0, 0, 0, 0, 0), (0,) * 6)
    with pytest.raises(DomainError):
        flat_section(nil, [0, 1], 6)
    G = flat_section(hypergeometric_connection(), [1, 0], 8)
    assert G.coeffs[0][:4] == (1, Fraction(1, 4), Fraction(9, 64), Fraction(25, 256))


def test_hypergeometric_against_closed_form():
    G = flat_section(hypergeometric_connection(), [1, 0], 101)
    assert all(G.coeffs[0][n] == closed_form(n) for n in range(101))
    assert all(all(x == 0 for x in row) for row in ode_residual(G.connection, G))


def test_extension_independence():
    conn = hypergeometric_connection()
    plain = flat_section(conn, [1, 0], 40)
    other = flat_section(conn, [1, 0], 40, extension=[[1, 5, -3, 7], [0, 2, Fraction(1, 3)]])
    assert plain.coeffs == other.coeffs


def test_transport_matches_for_regular_connections():
    conn = LogConnection([[([1], [1, -1]), ([0, 2], [1])], [([3], [2, 1]), ([0], [1])]])
    a = flat_section(conn, [1, 2], 12)
    b = transport_flat_section(conn, [[1], [2]], 12)
    assert a.coeffs == b.coeffs
    with pytest.raises(DomainError):
        transport_flat_section(hypergeometric_connection(), [[1], [0]], 5)


def test_radius_profile_examples():
    prof = radius_profile(geometric(), [finite_place(2), finite_place(3), INF], window=64)
    for v in prof.places:
        assert prof.radius(v) == 1
    assert prof.flagged == ()
    with pytest.raises(DomainError):
        radius_profile(geometric(), window=16)


def test_hypergeometric_radius():
    G = flat_section(hypergeometric_connection(), [1, 0], 513)
    odd = [finite_place(p) for p in primes_up_to(50) if p > 2]
    prof = radius_profile(G, [finite_place(2)] + odd, window=512)
    kummer = max(kummer_v2(n) * -math.log(2) / n for n in range(256, 513))
    assert abs(prof.slope[finite_place(2)] - kummer) < 1e-9
    assert abs(prof.slope[finite_place(2)] - 4 * math.log(2)) < 0.2
    assert all(prof.slope[v] <= 0 for v in odd)
    scaled = radius_profile(G.rescale(16), [finite_place(2)] + odd, window=512)
    assert all(scaled.slope[v] <= 0 for v in scaled.places)


def test_relevant_places_examples():
    assert relevant_places(Fraction(1, 3), geometric()) == {INF}
    assert relevant_places(2, geometric()) == {finite_place(2)}
    assert relevant_places(1, geometric()) == set()
    with pytest.raises(DomainError):
        relevant_places(0, geometric())


def test_height_examples():
    bounded = GSystem.from_coefficients([[(-1) ** n * (n % 3) for n in range(200)]])
    est = truncated_height(bounded, 128)
    assert not est.diverging and est.sigma < 0.1
    fact = GSystem.from_coefficients([[Fraction(1, math.factorial(n)) for n in range(260)]])
    assert truncated_height(fact, 256).diverging
    G = flat_section(hypergeometric_connection(), [1, 0], 260)
    est = truncated_height(G, 256)
    assert not est.diverging
    assert abs(est.sigma - 4 * math.log(2)) < 0.2
    with pytest.raises(DomainError):
        truncated_height(G, 4)


def test_relation_examples():
    names = ["x1", "x2"]
    G = GSystem.from_coefficients([[1, 2, 3, 4], [1, 2, 3, 4]])
    out = evaluate_relation(poly_from_string("x1 - x2", names), G, 2, finite_place(2))
    assert out.residual == 0 and out.homogeneous
    G = GSystem.from_coefficients([[1, 1, 1], [0, 5, 0]])
    out = evaluate_relation(poly_from_string("x1 - 1", names), G, 0, finite_place(5))
    assert out.residual == 0 and not out.homogeneous
    names = ["x1", "x2", "x3"]
    G = GSystem.from_coefficients([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    out = evaluate_relation(poly_from_string("x1*x3 - x2**2", names), G, 3, finite_place(3))
    assert out.residual == 0


def test_relation_rejects_irrelevant_place():
    G = GSystem.from_coefficients([[1] * 40, [1] * 40])
    with pytest.raises(DomainError):
        evaluate_relation(poly_from_string("x1 - x2", ["x1", "x2"]), G, 2, finite_place(3))


def test_weil_height_examples():
    assert weil_height(0) == 0
    assert weil_height(Fraction(1, 3)) == pytest.approx(math.log(3))
    assert weil_height(Fraction(-12, 5)) == pytest.approx(math.log(12))


@given(st.fractions(max_denominator=200).filter(lambda q: q != 0))
def test_weil_height_inversion(q):
    assert weil_height(q) == pytest.approx(weil_height(1 / q))


@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_nilpotent_log_pole_gives_constant_section(entries):
    # strictly upper triangular residue, v0 in its kernel
    N = [[0, entries[0], entries[1]], [0, 0, entries[2]], [0, 0, 0]]
    conn = LogConnection.from_matrices(N)
    G = flat_section(conn, [entries[3], 0, 0], 10)
    assert all(x == 0 for row in G.coeffs for x in row[1:])
