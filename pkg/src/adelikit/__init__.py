"""Exact adelic arithmetic on affine coordinate rings and formal tubes.

The package is organised bottom-up:

* :mod:`adelikit.exact_arith` -- rationals, places and absolute values
* :mod:`adelikit.polynomials` -- sparse polynomials, Groebner bases, quotient rings
* :mod:`adelikit.adelic_norms` -- quotient norms, norm profiles, adelic certificates
* :mod:`adelikit.power_series` -- truncated multivariate series, composition, inversion
* :mod:`adelikit.tube_engine` -- etale charts, tube parameterizations, adelic tubes
* :mod:`adelikit.gfunctions` -- log connections, flat sections, radii and heights
* :mod:`adelikit.monodromy_weight` -- monodromy weight filtrations and E1 dimensions
* :mod:`adelikit.cli` -- JSON-in/JSON-out command line front end
"""

from adelikit.exact_arith import (
    INF,
    AbsValue,
    Place,
    abs_value,
    bad_places,
    finite_place,
    valuation,
)
from adelikit.polynomials import (
    GroebnerBasis,
    MonomialOrder,
    Poly,
    QuotientElement,
    QuotientRing,
    groebner_basis,
    ideal_membership,
    normal_form,
)

__all__ = [
    "INF",
    "AbsValue",
    "Place",
    "abs_value",
    "bad_places",
    "finite_place",
    "valuation",
    "GroebnerBasis",
    "MonomialOrder",
    "Poly",
    "QuotientElement",
    "QuotientRing",
    "groebner_basis",
    "ideal_membership",
    "normal_form",
]

__version__ = "0.1.0"
