# Formal neighbourhoods of a point on the hyperbola z1*z2 = 1, then bounds.
from adelikit.exact_arith import format_place
from adelikit.polynomials import Poly, QuotientRing, groebner_basis, poly_from_string
from adelikit.power_series import TruncatedSeries
from adelikit.tube_engine import (
    build_chart,
    flatten,
    parameterize_tube,
    retraction_check,
    solve_tube_system,
    verify_bounds,
)

Z = ["z1", "z2"]
I = groebner_basis([poly_from_string("z1*z2 - 1", Z)], names=Z)
chart = build_chart(I, [poly_from_string("z1 - 1", Z)], p=1)
print("dual derivation d1 =", chart.derivations[0])  # d/dz1 - z2^2 d/dz2

G = parameterize_tube(chart, order=10)
print("G1 =", G[0])
print("G2 =", G[1])  # the geometric series 1 - u + u^2 - ...
print("G1*G2 - 1 vanishes:", (G[0] * G[1] - 1).is_zero())
print("retraction gives back (u, z|E):", retraction_check(G))

# flattening z2 along z1 - 1 leaves only its value on E = {(1, 1)}
print("delta(z2) =", flatten(poly_from_string("z2", Z), chart, 10, G))

report = verify_bounds(G)
print("alpha, beta =", report.alpha, report.beta, " tau =", {format_place(v): str(t) for v, t in report.tau.items()})

# a system with a bad prime: the square root of 1 + u needs powers of 1/2
Q = QuotientRing.rationals()
C = TruncatedSeries(Q, 1, 10, {(0,): Q.const(1), (1,): Q.const(1)})
root = solve_tube_system([poly_from_string("z**2", ["z"])], [C], [Poly.constant(1, 0)])
print("sqrt(1+u) =", root[0])
rep = verify_bounds(root)
print("bad places:", [format_place(v) for v in rep.bad_places], "tau:", {format_place(v): str(t) for v, t in rep.tau.items()})
