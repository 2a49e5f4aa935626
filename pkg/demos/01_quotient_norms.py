# Quotient norms of cosets f + I at every finite place.
from fractions import Fraction

from adelikit.adelic_norms import brute_force_search, norm_profile, quotient_norm
from adelikit.exact_arith import finite_place, format_place
from adelikit.polynomials import groebner_basis, normal_form, poly_from_string

names = ["x", "y"]
I = groebner_basis([poly_from_string("x - 2*y", names)], names=names)
f = normal_form(poly_from_string("x", names), I)
print("normal form of x:", f)  # x = 2y on the line

# the Gauss norm of 2y at 2 is 1/2 and lead reduction is norm-minimal there
for p in (2, 3, 5):
    value, certified = quotient_norm(f, finite_place(p))
    print(f"|x|_{p} on the line = {value}  certified={certified}")

prof = norm_profile(f)
print("places where the norm is not 1:", [format_place(v) for v in sorted(prof.bad_places)])

# an independent check: search all representatives x + h*(x - 2y), deg h <= 2
res = brute_force_search(f, finite_place(2), 2, 16)
print("oracle minimum at 2:", res.value, "columns searched:", res.columns)

# an uncertified place: the leading coefficient 3 of 3x^2 - y
J = groebner_basis([poly_from_string("3*x**2 - y", names)], names=names)
g = normal_form(poly_from_string("y + x", names), J)
print("at 3:", quotient_norm(g, finite_place(3)), "oracle:", brute_force_search(g, finite_place(3), 2, 16).value)

# scalar homogeneity is exact
a = Fraction(9, 4)
print(quotient_norm(f * a, finite_place(3))[0], "=", Fraction(1, 9) * quotient_norm(f, finite_place(3))[0])
