"""Etale charts, formal tube parameterizations and adelic tubes.

An :class:`EtaleChart` is an affine variety ``U = V(I)`` in ``m`` coordinates
``z_1..z_m`` together with etale coordinates ``f_1..f_q`` and the dual
derivations ``d_i = sum_j a_ij d/dz_j`` characterised by ``d_i f_j = delta_ij``.
The first ``p`` coordinates cut out ``E = V(f_1..f_p)``.

:func:`parameterize_tube` expands the formal neighbourhood of ``E`` in ``U``:
it returns power series ``G_1..G_m`` in ``u_1..u_p`` over ``O(E)`` with

* ``g(G) = 0`` for every generator ``g`` of ``I``,
* ``f_t(G) = u_t`` for ``t <= p`` and ``f_t(G) = f_t|_E`` for ``t > p``,
* ``G(0)`` the point of ``E`` given by the coordinate functions.

The engine behind it, :func:`solve_tube_system`, solves ``B(A) = C`` degree
layer by degree layer with a fixed invertible minor of the Jacobian of ``B``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

from adelikit.adelic_norms import (
    AdelicityCertificate,
    certificate_holds,
    check_adelic,
    uncertified_primes,
)
from adelikit.exact_arith import (
    DomainError,
    Place,
    abs_value,
    finite_place,
    prime_divisors,
    primes_of,
    valuation,
)
from adelikit.linalg import ring_det, ring_inverse, ring_matrix_inverse
from adelikit.polynomials import (
    DEGREVLEX,
    GroebnerBasis,
    Monomial,
    Poly,
    QuotientElement,
    QuotientRing,
    groebner_basis,
    ideal_membership,
)
from adelikit.power_series import (
    FaaDiBruno,
    TruncatedSeries,
    compose,
    evaluate_at,
    factorial_multi,
    monomials_below,
    monomials_of_degree,
)


class BoundViolation(AssertionError):
    """A proven bound failed on computed data, which means an implementation bug."""


def _denominator_primes(polys: Sequence[Poly]) -> set[int]:
    out: set[int] = set()
    for f in polys:
        for c in f.coefficients():
            out.update(prime_divisors(c.denominator))
    return out


# ---------------------------------------------------------------------------
# Charts


@dataclass(frozen=True)
class EtaleChart:
    """An affine chart with etale coordinates and their dual derivations."""

    ring: QuotientRing
    etale: tuple[Poly, ...]
    p: int
    derivations: tuple[tuple[Poly, ...], ...]
    minor_rows: tuple[int, ...]
    # primes where the chosen Jacobian minor or its inverse is not integral
    minor_primes: frozenset[int] = frozenset()

    @property
    def ideal(self) -> GroebnerBasis:
        return self.ring.gb

    @property
    def nvars(self) -> int:
        return self.ring.nvars

    @property
    def q(self) -> int:
        return len(self.etale)

    @property
    def names(self) -> tuple[str, ...]:
        return self.ring.gb.vars

    def derive(self, i: int, f: Poly) -> Poly:
        """Apply ``d_{i+1}`` to a polynomial and reduce modulo the ideal."""
        acc = self.ring.zero
        for j, a in enumerate(self.derivations[i]):
            if a.terms:
                d = f.derivative(j)
                if d.terms:
                    acc = acc + a * d
        return self.ring.reduce(acc)

    def bad_primes(self) -> set[int]:
        """Primes where the chart fails to be etale over the integers.

        These are the primes dividing a denominator of the derivation
        coefficients, of the Jacobian minor or of its inverse, together with
        the uncertified primes of the ideal.
        """
        polys = [a for row in self.derivations for a in row]
        return _denominator_primes(polys) | set(self.minor_primes) | uncertified_primes(self.ideal)

    def fiber_ideal(self) -> GroebnerBasis:
        """Groebner basis of ``I + (f_1..f_p)``, the ideal of ``E``."""
        gens = list(self.ideal.generators) + [f for f in self.etale[: self.p]]
        return groebner_basis(gens, self.ideal.order, self.names)


def _jacobian(polys: Sequence[Poly], nvars: int) -> list[list[Poly]]:
    return [[f.derivative(j) for j in range(nvars)] for f in polys]


def build_chart(
    ideal: GroebnerBasis,
    etale_coords: Sequence[Poly],
    p: int,
    max_inverse_degree: int = 6,
) -> EtaleChart:
    """Solve for the dual derivations of the etale coordinates over ``Q[z]/I``.

    The stacked Jacobian of the ideal generators and the etale coordinates is
    restricted to square minors containing every etale row; the first minor
    whose determinant is a unit of the ring gives ``a_i = M^{-1} e_i``.  The
    result is checked: ``d_i f_j = delta_ij`` and ``d_i g`` lies in ``I`` for
    every generator ``g``.
    """
    ring = QuotientRing(ideal)
    m = ideal.nvars
    fs = list(etale_coords)
    q = len(fs)
    if not 1 <= p <= q:
        raise DomainError(f"need 1 <= p <= q, got p={p}, q={q}")
    if any(f.nvars != m for f in fs):
        raise DomainError("etale coordinates must live in the ambient ring")
    gens = list(ideal.generators)
    jac_g = [[ring.reduce(x) for x in row] for row in _jacobian(gens, m)]
    jac_f = [[ring.reduce(x) for x in row] for row in _jacobian(fs, m)]
    need = m - q
    if need < 0 or need > len(gens):
        raise DomainError(
            f"{q} etale coordinates and {len(gens)} generators cannot give a square system in {m} variables"
        )
    last_obstruction = "no square minor available"
    for chosen in combinations(range(len(gens)), need):
        rows = [jac_g[k] for k in chosen] + jac_f
        try:
            inv, det = ring_matrix_inverse(rows, ring, max_inverse_degree)
        except DomainError as exc:
            last_obstruction = str(exc)
            continue
        derivs = []
        for i in range(q):
            col = need + i
            derivs.append(tuple(ring.reduce(inv[j][col]) for j in range(m)))
        entries = [x for row in rows for x in row] + [x for row in inv for x in row]
        chart = EtaleChart(ring, tuple(fs), p, tuple(derivs), tuple(chosen), frozenset(_denominator_primes(entries)))
        if _chart_is_valid(chart, gens):
            return chart
        last_obstruction = (
            f"minor on generator rows {list(chosen)} is invertible but the resulting "
            "derivations do not preserve the ideal"
        )
    raise DomainError(f"derivation system is not solvable over the ring: {last_obstruction}")


def _chart_is_valid(chart: EtaleChart, gens: Sequence[Poly]) -> bool:
    for i in range(chart.q):
        for j, f in enumerate(chart.etale):
            target = chart.ring.const(1 if i == j else 0)
            if not ideal_membership(chart.derive(i, f) - target, chart.ideal):
                return False
        for g in gens:
            if chart.derive(i, g).terms:
                return False
    return True


def localize_chart(chart: EtaleChart, h: Poly, name: str = "w") -> EtaleChart:
    """Invert ``h`` by adjoining a variable, shifted so the origin stays on the chart.

    The new generator is ``(w + 1/h(0)) * h - 1`` when ``h(0) != 0`` and
    ``w * h - 1`` otherwise.
    """
    m = chart.nvars
    gens = [g.embed(m + 1) for g in chart.ideal.generators]
    hh = h.embed(m + 1)
    w = Poly.var(m, m + 1)
    h0 = h.constant_term()
    shift = w + Fraction(1) / h0 if h0 else w
    gens.append(shift * hh - 1)
    gb = groebner_basis(gens, chart.ideal.order, tuple(chart.names) + (name,))
    etale = [f.embed(m + 1) for f in chart.etale]
    return build_chart(gb, etale, chart.p)


def verify_cover(hs: Sequence[Poly], rs: Sequence[Poly], ideal: GroebnerBasis) -> bool:
    """Check a partition-of-unity certificate ``sum r_i h_i = 1`` on ``V(I)``."""
    if len(hs) != len(rs) or not hs:
        raise DomainError("a cover certificate needs matching nonempty lists")
    total = Poly.zero(ideal.nvars)
    for h, r in zip(hs, rs):
        total = total + h * r
    return ideal_membership(total - 1, ideal)


# ---------------------------------------------------------------------------
# Flattening


def _iterated_derivatives(a: Poly, chart: EtaleChart, order: int) -> dict[Monomial, Poly]:
    """``d^J a`` for all ``J`` in the first ``p`` directions with ``|J| < order``."""
    p = chart.p
    out: dict[Monomial, Poly] = {(0,) * p: chart.ring.reduce(a)}
    for d in range(1, order):
        for J in monomials_of_degree(p, d):
            i = next(k for k, e in enumerate(J) if e)
            prev = J[:i] + (J[i] - 1,) + J[i + 1 :]
            out[J] = chart.derive(i, out[prev])
    return out


def total_derivative(S: TruncatedSeries, chart: EtaleChart, ell: int) -> TruncatedSeries:
    """``d_ell`` of ``sum_M s_M f^M``, written again as a series in ``u = f``."""
    if S.ring != chart.ring:
        raise DomainError("series must have coefficients in the chart ring")
    n = S.order - 1
    out: dict[Monomial, Poly] = {}
    for M in monomials_below(S.nvars, n):
        val = chart.derive(ell, S.coeffs[M]) if M in S.coeffs else chart.ring.zero
        up = M[:ell] + (M[ell] + 1,) + M[ell + 1 :]
        if up in S.coeffs:
            val = val + S.coeffs[up].scale(M[ell] + 1)
        if val.terms:
            out[M] = val
    return TruncatedSeries(chart.ring, S.nvars, max(n, 0), out, reduce=False)


def flatten_series(S: TruncatedSeries, chart: EtaleChart) -> TruncatedSeries:
    """Apply ``delta = sum_K (-u)^K / K! D^K`` to ``S = sum_M s_M f^M``."""
    p = chart.p
    N = S.order
    ring = chart.ring
    derivs: dict[Monomial, TruncatedSeries] = {(0,) * p: S}
    for d in range(1, N):
        for K in monomials_of_degree(p, d):
            i = next(k for k, e in enumerate(K) if e)
            prev = K[:i] + (K[i] - 1,) + K[i + 1 :]
            derivs[K] = total_derivative(derivs[prev], chart, i)
    acc: dict[Monomial, Poly] = {}
    for K, DK in derivs.items():
        k = sum(K)
        factor = Fraction((-1) ** k, factorial_multi(K))
        for M, c in DK.coeffs.items():
            target = tuple(a + b for a, b in zip(M, K))
            if sum(target) < N:
                val = c.scale(factor)
                acc[target] = acc[target] + val if target in acc else val
    return TruncatedSeries(ring, p, N, acc)


def flatten_terms(a: QuotientElement | Poly, chart: EtaleChart, order: int) -> TruncatedSeries:
    """The expansion ``delta(a) = sum_J c_J f^J`` with ``c_J = (-1)^|J| d^J a / J!``.

    The result is a series in ``u_1..u_p`` over ``O(U)``, to be read with
    ``u_i = f_i``.
    """
    rep = a.rep if isinstance(a, QuotientElement) else a
    ders = _iterated_derivatives(rep, chart, order)
    coeffs = {J: d.scale(Fraction((-1) ** sum(J), factorial_multi(J))) for J, d in ders.items()}
    return TruncatedSeries(chart.ring, chart.p, order, coeffs)


def flat_value(S: TruncatedSeries, chart: EtaleChart) -> Poly:
    """``sum_M s_M f^M`` as a normal form on ``U`` (meaningful modulo ``(f)^order``)."""
    total = chart.ring.zero
    fs = chart.etale[: chart.p]
    for M, c in S.coeffs.items():
        term = c
        for f, e in zip(fs, M):
            if e:
                term = term * f**e
        total = total + term
    return chart.ring.reduce(total)


def pull_back(S: TruncatedSeries, sol: "TubeSolution") -> TruncatedSeries:
    """Substitute the tube parameterization: ``sum_M s_M(G(u)) u^M`` over ``O(E)``."""
    N = min(S.order, sol.order)
    ringE = sol.ring
    p = sol.components[0].nvars
    acc = TruncatedSeries.zero(ringE, p, N)
    for M, c in S.coeffs.items():
        if sum(M) >= N:
            continue
        term = compose(c, list(sol.components), N)
        mono = TruncatedSeries(ringE, p, N, {M: ringE.one})
        acc = acc + term * mono
    return acc


def flatten(
    a: QuotientElement | Poly,
    chart: EtaleChart,
    order: int = 10,
    solution: "TubeSolution | None" = None,
) -> TruncatedSeries:
    """``delta(a)`` as a series in ``u_1..u_p`` over ``O(E)``.

    The operator series of :func:`flatten_terms` is pulled back along the tube
    parameterization.  Flatness means that every positive-order coefficient
    vanishes, leaving the constant ``a|_E``.
    """
    sol = solution if solution is not None else parameterize_tube(chart, order)
    return pull_back(flatten_terms(a, chart, order), sol)


# ---------------------------------------------------------------------------
# Solving B(A) = C


def _select_minor(
    jac: list[list[Poly]], ring: QuotientRing, sigma: int, minor_rows: Sequence[int] | None
) -> tuple[tuple[int, ...], list[list[Poly]]]:
    if minor_rows is not None:
        rows = tuple(minor_rows)
        if len(rows) != sigma or len(set(rows)) != sigma or not all(0 <= r < len(jac) for r in rows):
            raise DomainError(f"minor_rows must be {sigma} distinct row indices")
        try:
            inv, _ = ring_matrix_inverse([jac[r] for r in rows], ring)
        except DomainError as exc:
            raise DomainError(f"singular minor on rows {list(rows)}: {exc}") from None
        return rows, inv
    for rows in combinations(range(len(jac)), sigma):
        det = ring_det([jac[r] for r in rows], ring)
        if det.terms and ring_inverse(det, ring) is not None:
            inv, _ = ring_matrix_inverse([jac[r] for r in rows], ring)
            return rows, inv
    raise DomainError("no invertible minor of the Jacobian exists at the base point")


def solve_tube_system(
    B: Sequence[Poly],
    C: Sequence[TruncatedSeries],
    e: Sequence[Poly],
    minor_rows: Sequence[int] | None = None,
    order: int | None = None,
    method: str = "substitution",
) -> "TubeSolution":
    """Solve ``B_r(A) = C_r`` with ``A(0) = e`` degree by degree.

    For each multi-index ``J`` of degree ``d``, the correction term ``P_{J,r}``
    collects everything in the ``J``-th coefficient of ``B_r(A)`` that depends
    only on coefficients of degree ``< d``; then ``A_J = M^{-1} (C_J - P_J)``
    with ``M`` the chosen minor of ``[(d_i B_r)(e)]``.  ``method`` selects how
    ``P`` is computed: by substituting the lower-degree truncation of ``A``
    (``"substitution"``) or from the closed Faa di Bruno formula
    (``"faa_di_bruno"``).
    """
    if not C:
        raise DomainError("need at least one equation")
    if len(B) != len(C):
        raise DomainError("B and C must have the same length")
    ring, nu = C[0].ring, C[0].nvars
    sigma = len(e)
    if any(b.nvars != sigma for b in B):
        raise DomainError("every B_r must be a polynomial in as many variables as e has entries")
    if len(B) < sigma:
        raise DomainError("fewer equations than unknowns")
    N = min(c.order for c in C) if order is None else min(order, *(c.order for c in C))
    e = [ring.reduce(x) for x in e]
    for r, (b, c) in enumerate(zip(B, C)):
        if c.ring != ring or c.nvars != nu:
            raise DomainError("all C_r must share ring and variables")
        if ring.reduce(evaluate_at(b, e, ring) - c.constant_rep()).terms:
            raise DomainError(f"inconsistent constant terms: C_{r + 1}(0) != B_{r + 1}(e)")
    jac = [[evaluate_at(b.derivative(i), e, ring) for i in range(sigma)] for b in B]
    rows, inv = _select_minor(jac, ring, sigma, minor_rows)
    zero_mono = (0,) * nu
    coeffs: list[dict[Monomial, Poly]] = [{zero_mono: x} if x.terms else {} for x in e]
    for d in range(1, N):
        current = [TruncatedSeries(ring, nu, d + 1, c, reduce=False) for c in coeffs]
        layer: dict[int, dict[Monomial, Poly]] = {}
        for r in rows:
            if method == "substitution":
                comp = compose(B[r], current, d + 1)
                layer[r] = {J: comp.coefficient_rep(J) for J in monomials_of_degree(nu, d)}
            elif method == "faa_di_bruno":
                fdb = FaaDiBruno(B[r], current)
                layer[r] = {J: fdb.coefficient(J) for J in monomials_of_degree(nu, d)}
            else:
                raise DomainError(f"unknown method {method!r}")
        for J in monomials_of_degree(nu, d):
            rhs = [ring.reduce(C[r].coefficient_rep(J) - layer[r][J]) for r in rows]
            for i in range(sigma):
                acc = ring.zero
                for k in range(sigma):
                    if inv[i][k].terms and rhs[k].terms:
                        acc = acc + inv[i][k] * rhs[k]
                val = ring.reduce(acc)
                if val.terms:
                    coeffs[i][J] = val
    comps = tuple(TruncatedSeries(ring, nu, N, c, reduce=False) for c in coeffs)
    residuals = [0] * N
    for r in rows:
        diff = compose(B[r], list(comps), N) - C[r]
        for J in diff.coeffs:
            residuals[sum(J)] += 1
    stream: list[list[QuotientElement]] = [[] for _ in range(N)]
    for comp in comps:
        for J in monomials_below(nu, N):
            stream[sum(J)].append(comp.coefficient(J))
    cert = check_adelic(stream, fit_alpha=True)
    data = _system_data_primes(B, C, e, inv, ring, N)
    alpha0, beta0 = _apriori_degree_bound(B, C, e, inv, rows, ring, N)
    return TubeSolution(
        None, ring, comps, tuple(B), tuple(C), tuple(e), rows, N, residuals, cert, data, alpha0, beta0
    )


def _system_data_primes(B, C, e, inv, ring: QuotientRing, N: int) -> set[int]:
    out = _denominator_primes(list(B))
    out |= _denominator_primes([c for s in C for c in s.coeffs.values()])
    out |= _denominator_primes(list(e))
    out |= _denominator_primes([x for row in inv for x in row])
    out |= uncertified_primes(ring.gb)
    return out


def _apriori_degree_bound(B, C, e, inv, rows, ring: QuotientRing, N: int) -> tuple[int, int]:
    """Degree bound ``deg A_J <= alpha |J| + beta`` for ``|J| >= 1`` implied by the data.

    With ``delta`` the largest degree of an entry of ``M^{-1}`` and ``c`` the
    largest degree of ``(d_lam B_r)(e)`` over ``|lam| >= 2``, induction on
    ``|J|`` gives the bound with ``beta = -(delta + c)`` and ``alpha`` the least
    integer making it hold for the contributions of ``C``.
    """
    delta = max((x.degree() for row in inv for x in row if x.terms), default=0)
    c_b = 0
    for r in rows:
        b = B[r]
        for d in range(2, b.degree() + 1):
            for lam in monomials_of_degree(b.nvars, d):
                der = b
                for i, k in enumerate(lam):
                    for _ in range(k):
                        der = der.derivative(i)
                if der.terms:
                    val = evaluate_at(der, e, ring)
                    if val.terms:
                        c_b = max(c_b, val.degree())
    beta = -(delta + c_b)
    alpha = 0
    for r in rows:
        for J, c in C[r].coeffs.items():
            k = sum(J)
            if 1 <= k < N:
                alpha = max(alpha, math.ceil((delta + c.degree() - beta) / k))
    return alpha, beta


# ---------------------------------------------------------------------------
# Tube parameterization


@dataclass
class TubeSolution:
    """A solution ``A`` of ``B(A) = C`` together with its checks.

    ``chart`` is set when the system is the tube system of an etale chart.
    The object indexes and iterates like the tuple of its components.
    """

    chart: EtaleChart | None
    ring: QuotientRing
    components: tuple[TruncatedSeries, ...]
    B: tuple[Poly, ...]
    C: tuple[TruncatedSeries, ...]
    base_point: tuple[Poly, ...]
    minor_rows: tuple[int, ...]
    order: int
    residuals: list[int]
    certificate: AdelicityCertificate
    data_primes: set[int]
    alpha_apriori: int
    beta_apriori: int

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i: int) -> TruncatedSeries:
        return self.components[i]

    def __len__(self) -> int:
        return len(self.components)

    def coefficient_stream(self) -> list[list[QuotientElement]]:
        """All coefficients of all components, grouped by total order."""
        out: list[list[QuotientElement]] = [[] for _ in range(self.order)]
        for comp in self.components:
            for J in monomials_below(comp.nvars, self.order):
                out[sum(J)].append(comp.coefficient(J))
        return out


def parameterize_tube(chart: EtaleChart, order: int = 10, minor_rows: Sequence[int] | None = None) -> TubeSolution:
    """Expand the formal neighbourhood of ``E = V(f_1..f_p)`` in the chart."""
    if order < 1:
        raise DomainError("order must be positive")
    gbE = chart.fiber_ideal()
    if gbE.is_unit_ideal():
        raise DomainError("E is empty on this chart")
    ringE = QuotientRing(gbE)
    m, p = chart.nvars, chart.p
    gens = list(chart.ideal.generators)
    B = gens + list(chart.etale)
    C: list[TruncatedSeries] = []
    for _ in gens:
        C.append(TruncatedSeries.zero(ringE, p, order))
    for t, f in enumerate(chart.etale):
        if t < p:
            C.append(TruncatedSeries.variable(ringE, t, p, order))
        else:
            C.append(TruncatedSeries.constant(ringE, ringE.reduce(f), p, order))
    e = [ringE.reduce(Poly.var(j, m)) for j in range(m)]
    sol = solve_tube_system(B, C, e, minor_rows, order)
    residuals = [0] * order
    for b, c in zip(B, C):
        diff = compose(b, list(sol.components), order) - c
        for J in diff.coeffs:
            residuals[sum(J)] += 1
    if any(residuals):
        raise DomainError(
            "the parameterization does not satisfy every equation; the presentation of U is "
            f"not a complete intersection near E (defects per order: {residuals})"
        )
    sol.chart = chart
    sol.residuals = residuals
    return sol


@dataclass(frozen=True)
class BoundsReport:
    alpha: int
    beta: int
    alpha_apriori: int
    beta_apriori: int
    tau: dict[Place, Fraction]
    bad_places: tuple[Place, ...]
    checked_order: int


def tau_at(components: Sequence[TruncatedSeries], prime: int) -> Fraction:
    """Least ``tau = p^t`` (``t >= 0``) with ``|coeff_J A_i|_p <= tau^(|J|+1)`` on the window."""
    t = 0
    for comp in components:
        for J, c in comp.coeffs.items():
            size = max(-valuation(x, prime) for x in c.coefficients())
            t = max(t, math.ceil(size / (sum(J) + 1)))
    return Fraction(prime) ** t


def verify_bounds(sol: TubeSolution, min_order: int = 6) -> BoundsReport:
    """Check the degree and norm bounds that the construction guarantees.

    * every coefficient of order ``o >= 1`` has degree at most
      ``alpha0 * o + beta0``, the bound derived a priori from the data;
    * the fitted certificate ``(alpha, beta)`` holds on every computed order;
    * ``tau_v = 1`` at every prime outside the data-divisor set, and ``tau_v``
      is reported at the primes inside it.

    Any failure raises :class:`BoundViolation`.
    """
    if sol.order < min_order:
        raise DomainError(f"bounds are fitted on solutions of order >= {min_order}")
    for i, comp in enumerate(sol.components):
        for J, c in comp.coeffs.items():
            k = sum(J)
            if k >= 1 and c.degree() > sol.alpha_apriori * k + sol.beta_apriori:
                raise BoundViolation(
                    f"component {i + 1} coefficient {J} has degree {c.degree()} above the a priori "
                    f"bound {sol.alpha_apriori}*{k}{sol.beta_apriori:+d}"
                )
    stream = sol.coefficient_stream()
    if not certificate_holds(sol.certificate, stream):
        raise BoundViolation("fitted adelic certificate fails on the computed coefficients")
    seen = _denominator_primes([c for comp in sol.components for c in comp.coeffs.values()])
    stray = seen - sol.data_primes
    if stray:
        raise BoundViolation(f"primes {sorted(stray)} appear in the solution but not in the data")
    tau = {}
    for prime in sorted(sol.data_primes | seen):
        val = tau_at(sol.components, prime)
        if val != 1:
            tau[finite_place(prime)] = val
    bad = tuple(finite_place(q) for q in sorted(sol.data_primes))
    return BoundsReport(
        sol.certificate.alpha or 0,
        sol.certificate.beta or 0,
        sol.alpha_apriori,
        sol.beta_apriori,
        tau,
        bad,
        sol.order,
    )


def retraction_check(sol: TubeSolution) -> bool:
    """Pull back ``f_1..f_p`` and the flattened coordinates ``delta(z_j)`` along ``G``.

    The results must be ``u_1..u_p`` and the constants ``z_j|_E``.
    """
    chart = sol.chart
    if chart is None:
        raise DomainError("retraction check needs a chart solution")
    N = sol.order
    for t in range(chart.p):
        pulled = compose(chart.etale[t], list(sol.components), N)
        if not pulled.equal_mod(TruncatedSeries.variable(sol.ring, t, chart.p, N)):
            return False
    for j in range(chart.nvars):
        flat = pull_back(flatten_terms(Poly.var(j, chart.nvars), chart, N), sol)
        expect = TruncatedSeries.constant(sol.ring, sol.base_point[j], chart.p, N)
        if not flat.equal_mod(expect):
            return False
    return True


# ---------------------------------------------------------------------------
# Adelic tubes


@dataclass(frozen=True)
class AdelicTube:
    """Tube data: ambient coordinates, defining functions ``y_i``, radius ``rho`` and ``alpha``.

    A rational point ``z`` on the ambient variety lies in the tube at ``v`` when
    ``|y_i(z)^a1 * z_r^a2|_v < |rho|_v`` for all ``i``, ``r`` and all
    ``a1 >= 1``, ``a2 >= 0`` with ``a1 + a2 <= alpha``.
    """

    names: tuple[str, ...]
    ys: tuple[Poly, ...]
    rho: int
    alpha: int
    ideal: GroebnerBasis | None = None

    def __post_init__(self) -> None:
        if isinstance(self.rho, bool) or not isinstance(self.rho, int) or self.rho == 0:
            raise DomainError("rho must be a nonzero integer (|rho|_v <= 1 at every finite place)")
        if self.alpha < 2:
            raise DomainError("alpha must be at least 2")
        n = len(self.names)
        if any(y.nvars != n for y in self.ys):
            raise DomainError("defining functions must use the tube's coordinates")
        if self.ideal is not None and self.ideal.nvars != n:
            raise DomainError("ambient ideal has the wrong arity")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def ambient_ideal(self) -> GroebnerBasis:
        return self.ideal if self.ideal is not None else GroebnerBasis.zero_ideal(self.nvars, DEGREVLEX, self.names)


def _val(x: Fraction, p: int) -> float:
    return math.inf if x == 0 else valuation(x, p)


def tube_membership(point: Sequence[Fraction], tube: AdelicTube, v: Place) -> bool:
    if v.prime is None:
        raise DomainError("tube membership is tested at finite places")
    pt = [Fraction(x) for x in point]
    if len(pt) != tube.nvars:
        raise DomainError("point has the wrong number of coordinates")
    for g in tube.ambient_ideal().generators:
        if g.evaluate(pt) != 0:
            raise DomainError("point does not lie on the ambient variety")
    p = v.prime
    bound = valuation(tube.rho, p)
    yv = [_val(y.evaluate(pt), p) for y in tube.ys]
    zv = [_val(z, p) for z in pt]
    return _tube_inequalities(yv, zv, tube.alpha, bound)


def standard_tube(names: Sequence[str], p: int, rho: int, alpha: int, ideal: GroebnerBasis | None = None) -> AdelicTube:
    """The tube on ``A^p x Y`` cut out by the first ``p`` coordinates."""
    n = len(names)
    ys = tuple(Poly.var(i, n) for i in range(p))
    return AdelicTube(tuple(names), ys, rho, alpha, ideal)


@dataclass(frozen=True)
class RefinementResult:
    tube: AdelicTube
    tau0: int
    checked_primes: tuple[int, ...]
    grid_points: dict[int, int] = field(default_factory=dict)


def _poly_min_valuation(f: Poly, zvals: Sequence[float], p: int) -> float:
    """Lower bound for the valuation of ``f`` at a point with the given coordinate valuations."""
    best = math.inf
    for m, c in f.terms.items():
        val = valuation(c, p)
        for e, z in zip(m, zvals):
            if e:
                val += e * z
        best = min(best, val)
    return best


def _tube_inequalities(yv: Sequence[float], zv: Sequence[float], alpha: int, r: float) -> bool:
    """``a1 * y + a2 * z > r`` for all ``a1 >= 1, a2 >= 0, a1 + a2 <= alpha`` in valuations."""
    for y in yv:
        for a1 in range(1, alpha + 1):
            for a2 in range(0, alpha - a1 + 1):
                for z in zv:
                    # a2 = 0 does not involve z; the product 0 * inf counts as 0
                    if not a1 * y + (a2 * z if a2 else 0) > r:
                        return False
    return True


def _implication_holds(
    T: AdelicTube, Tp: AdelicTube, h, g, alpha2: int, rho2: int, p: int, radius: int, max_points: int
) -> tuple[bool, int]:
    """Check on a grid of valuation vectors that ``T''`` inequalities imply those of ``T``.

    The grid runs over valuations of the coordinates of ``T'``.  A defining
    function that is a single term has its valuation fixed by them; otherwise
    it ranges over grid values at least its lower bound.
    """
    r2 = valuation(rho2, p)
    r1 = valuation(T.rho, p)
    z_choices = list(range(-radius, radius + 1)) + [math.inf]
    y_grid = list(range(r2 + 1, r2 + radius + 1)) + [math.inf]
    axes = [z_choices] * Tp.nvars
    total = len(z_choices) ** Tp.nvars
    if total <= max_points:
        zpoints = product(*axes)
    else:
        rng = random.Random(p * 7919 + alpha2)
        zpoints = (tuple(rng.choice(a) for a in axes) for _ in range(max_points))

    def conclusion(yv, zv) -> bool:
        return _tube_inequalities(yv, zv, T.alpha, r1)

    count = 0
    for zv in zpoints:
        lbs = [_poly_min_valuation(y, zv, p) for y in Tp.ys]
        options = []
        for y, lb in zip(Tp.ys, lbs):
            if len(y.terms) <= 1:
                options.append([lb])
            else:
                options.append([c for c in y_grid if c >= lb])
        for yv in product(*options):
            count += 1
            if not _tube_inequalities(yv, zv, alpha2, r2):
                continue
            z_old = [_poly_min_valuation(gi, zv, p) for gi in g]
            y_old = []
            for row in h:
                best = math.inf
                for hw, yw in zip(row, yv):
                    if hw.terms:
                        best = min(best, _poly_min_valuation(hw, zv, p) + yw)
                y_old.append(best)
            if not conclusion(y_old, z_old):
                return False, count
    return True, count


def refine_tube(
    T: AdelicTube,
    Tp: AdelicTube,
    h: Sequence[Sequence[Poly]],
    g: Sequence[Poly],
    grid_radius: int = 3,
    max_points: int = 20000,
    max_steps: int = 40,
) -> RefinementResult:
    """A tube in the coordinates of ``Tp`` refining both ``T`` and ``Tp``.

    ``h`` expresses ``y_i = sum_w h[i][w] * y'_w`` and ``g`` expresses the old
    coordinates ``z_i = g[i](z')``, both as identities on the variety of ``Tp``.
    The new tube has ``alpha'' = 2 * tau0 * alpha`` (``tau0`` the largest degree in
    the lifting data) or ``max(alpha, alpha')`` when the lifting is the
    identity.  ``rho''`` starts at ``rho * rho'``; at each prime where a lifting
    coefficient is not a unit its exponent is raised one step at a time until
    the implication certificate passes.
    """
    n2 = Tp.nvars
    if len(h) != len(T.ys) or any(len(row) != len(Tp.ys) for row in h):
        raise DomainError("h must have one row per y_i and one column per y'_w")
    if len(g) != T.nvars:
        raise DomainError("g must give one polynomial per coordinate of T")
    if any(x.nvars != n2 for row in h for x in row) or any(x.nvars != n2 for x in g):
        raise DomainError("lifting data must be polynomials in the coordinates of T'")
    gb2 = Tp.ambient_ideal()
    for gen in T.ambient_ideal().generators:
        if not ideal_membership(gen.substitute(list(g)), gb2):
            raise DomainError("the coordinate map does not send the variety of T' into that of T")
    for i, y in enumerate(T.ys):
        rhs = Poly.zero(n2)
        for hw, yw in zip(h[i], Tp.ys):
            rhs = rhs + hw * yw
        if not ideal_membership(y.substitute(list(g)) - rhs, gb2):
            raise DomainError(f"lifting data does not express y_{i + 1} on the variety of T'")
    identity = (
        T.nvars == n2
        and all(g[i] == Poly.var(i, n2) for i in range(n2))
        and len(T.ys) == len(Tp.ys)
        and all(h[i][w] == (1 if i == w else 0) for i in range(len(h)) for w in range(len(h[i])))
    )
    degs = [x.degree() for row in h for x in row if x.terms] + [x.degree() for x in g if x.terms]
    tau0 = max(max(degs, default=1), 1)
    alpha2 = max(T.alpha, Tp.alpha) if identity else max(2 * tau0 * T.alpha, Tp.alpha)
    rho2 = abs(T.rho * Tp.rho)
    coeffs = [c for row in h for x in row for c in x.coefficients()] + [c for x in g for c in x.coefficients()]
    bad = sorted(primes_of(coeffs))
    extra = sorted(set(prime_divisors(rho2)) - set(bad))
    good = 2
    while good in bad or good in extra:
        good += 1
        while any(good % q == 0 for q in range(2, int(good**0.5) + 1)):
            good += 1
    checked = tuple(bad + extra + [good])
    points: dict[int, int] = {}
    for prime in checked:
        for _ in range(max_steps):
            ok, count = _implication_holds(T, Tp, h, g, alpha2, rho2, prime, grid_radius, max_points)
            points[prime] = count
            if ok:
                break
            if prime not in bad:
                raise BoundViolation(
                    f"implication certificate fails at p={prime}, where the lifting data is integral"
                )
            rho2 *= prime
        else:
            raise DomainError(f"no admissible rho'' found at p={prime} within {max_steps} steps")
    for prime in set(prime_divisors(T.rho)) | set(prime_divisors(Tp.rho)):
        v = finite_place(prime)
        if abs_value(rho2, v) > min(abs_value(T.rho, v), abs_value(Tp.rho, v)):
            raise BoundViolation("refined radius is not smaller than both original radii")
    tube = AdelicTube(Tp.names, Tp.ys, rho2, alpha2, Tp.ideal)
    return RefinementResult(tube, tau0, checked, points)
