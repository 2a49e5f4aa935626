# The flat section of the hypergeometric connection with a = b = 1/2, c = 1.
import math
from fractions import Fraction
from math import comb

from adelikit.exact_arith import INF, finite_place
from adelikit.gfunctions import (
    flat_section,
    hypergeometric_connection,
    radius_profile,
    relevant_places,
    truncated_height,
)

conn = hypergeometric_connection()
print("residue:", [[str(x) for x in row] for row in conn.residue()])  # nilpotent, kernel spanned by e1
G = flat_section(conn, [1, 0], order=513)
print("first coefficients:", [str(c) for c in G.coeffs[0][:6]])
print("closed form holds to n=100:", all(G.coeffs[0][n] == Fraction(comb(2 * n, n), 4**n) ** 2 for n in range(101)))

# only 2 divides a denominator; v_2(c_n) = 2 s_2(n) - 4n gives radius 2^-4 there
places = [finite_place(p) for p in (2, 3, 5, 7)] + [INF]
prof = radius_profile(G, places, window=512)
for v in places:
    print(f"{str(v):>4}: log radius {prof.log_radius(v):+.4f}")
print("-4 log 2 =", round(-4 * math.log(2), 4))

# rescaling moves every finite radius to >= 1; the archimedean one shrinks to 1/16
scaled = radius_profile(G.rescale(16), places, window=512)
print("after s -> 16 s, flagged places:", [str(v) for v in scaled.flagged])

print("relevant places at xi=2, before rescaling:", relevant_places(2, G))
print("relevant places at xi=2, after rescaling:", relevant_places(2, G.rescale(16)))
est = truncated_height(G, 256)
print("sigma_N:", {n: round(s, 3) for n, s in est.history.items()}, "diverging:", est.diverging)
