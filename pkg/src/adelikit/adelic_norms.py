"""Quotient norms on coordinate rings, at every finite place at once.

For an ideal ``I`` of ``Q[x]`` whose variety passes through the origin, the
norm of a coset ``f + I`` at a finite place ``v`` is the least Gauss norm of a
representative.  When ``v`` divides no leading coefficient of the
(integer-primitive) reduced basis, lead reduction never divides by a non-unit,
so the normal form is itself a minimizer and the value is certified exact.
At the remaining finitely many places the normal-form norm is only an upper
bound, and :func:`brute_force_norm` provides an independent refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Sequence, Union

from adelikit.exact_arith import (
    BudgetExceeded,
    DomainError,
    Place,
    abs_value,
    finite_place,
    prime_divisors,
    valuation,
)
from adelikit.polynomials import GroebnerBasis, Monomial, Poly, QuotientElement


class NotAdelic(DomainError):
    """A coefficient stream admits no adelic bound on the observed window."""


def _require_finite(v: Place) -> int:
    if v.prime is None:
        raise DomainError("quotient norms are defined at finite places only")
    return v.prime


def check_base_point(gb: GroebnerBasis) -> None:
    """Reject ideals whose variety does not contain the origin."""
    for g in gb.generators:
        if g.constant_term():
            raise DomainError(
                "every ideal generator must vanish at the base point 0; "
                f"generator {g.to_str(gb.vars)} has constant term {g.constant_term()}"
            )


def uncertified_primes(gb: GroebnerBasis) -> set[int]:
    """Primes dividing a leading coefficient or a denominator of the basis."""
    out: set[int] = set()
    for g in gb.generators:
        for c in g.coefficients():
            out.update(prime_divisors(c.denominator))
    for lc in gb.leading_coefficients():
        out.update(prime_divisors(lc.numerator))
    return out


def is_certified(gb: GroebnerBasis, v: Place) -> bool:
    return _require_finite(v) not in uncertified_primes(gb)


def quotient_norm(f: QuotientElement, v: Place) -> tuple[Fraction, bool]:
    """Gauss norm of the normal form at ``v`` and whether it is the exact minimum."""
    p = _require_finite(v)
    check_base_point(f.ideal)
    value = f.rep.gauss_norm(v)
    if not f.rep.terms:
        return Fraction(0), True
    return value, p not in uncertified_primes(f.ideal)


@dataclass(frozen=True)
class NormProfile:
    """Norm of a coset at every finite place, stored by its deviations from 1."""

    values: dict[Place, Fraction]
    certified: dict[Place, bool]

    @property
    def bad_places(self) -> frozenset[Place]:
        return frozenset(self.values)

    def value_at(self, v: Place) -> Fraction:
        _require_finite(v)
        return self.values.get(v, Fraction(1))

    def is_certified(self, v: Place) -> bool:
        return self.certified.get(v, True)


def _data_primes(rep: Poly) -> set[int]:
    """Primes at which the Gauss norm of ``rep`` differs from 1."""
    c = rep.content()
    return set(prime_divisors(c.numerator)) | set(prime_divisors(c.denominator))


def norm_profile(f: QuotientElement) -> NormProfile:
    if f.is_zero():
        raise DomainError("the zero coset has norm 0 everywhere and no profile")
    check_base_point(f.ideal)
    unc = uncertified_primes(f.ideal)
    values: dict[Place, Fraction] = {}
    certified: dict[Place, bool] = {}
    for p in sorted(_data_primes(f.rep) | unc):
        v = finite_place(p)
        val = f.rep.gauss_norm(v)
        if val != 1 or p in unc:
            values[v] = val
            certified[v] = p not in unc
    return NormProfile(values, certified)


# ---------------------------------------------------------------------------
# Independent oracle


@dataclass(frozen=True)
class OracleResult:
    """Outcome of the exhaustive representative search.

    ``value`` is the least Gauss norm over ``f + sum h_g g`` with every
    multiplier of degree at most the bound.  ``multipliers`` is one minimizing
    choice of the ``h_g``, and ``witness_height`` the largest numerator or
    denominator appearing in it.
    """

    value: Fraction
    multipliers: tuple[Poly, ...]
    witness_height: int
    columns: int


def _monomials_up_to(nvars: int, degree: int) -> list[Monomial]:
    out: list[Monomial] = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            m = [0] * nvars
            for i in combo:
                m[i] += 1
            out.append(tuple(m))
    return out


def _vadic_size(c: Fraction, p: int) -> int:
    """``-v_p(c)``, so that larger means larger absolute value."""
    return -valuation(c, p)


def brute_force_search(
    f: QuotientElement,
    v: Place,
    deg_bound: int,
    height_bound: int,
    generators: Sequence[Poly] | None = None,
    budget: int = 600,
    start: Poly | None = None,
) -> OracleResult:
    """Minimize ``||f + sum h_g g||_v`` over multipliers of degree ``<= deg_bound``.

    The minimization is exact over all rational multiplier coefficients: the
    spanned space of ``m * g`` is brought to a v-adically orthonormal echelon
    form (each pivot is a largest entry, scaled to 1), after which clearing the
    pivot coordinates of ``f`` is optimal by the ultrametric inequality.  The
    height box is therefore always contained in the searched set.  Only the
    ideal generators are used, never the Groebner basis, which keeps this path
    independent of lead reduction.  ``start`` may be any representative of the
    coset, such as the unreduced input polynomial.
    """
    p = _require_finite(v)
    if deg_bound < 0 or height_bound < 1:
        raise DomainError("deg_bound must be >= 0 and height_bound >= 1")
    gens = list(generators) if generators is not None else list(f.ideal.generators)
    n = f.ideal.nvars
    target = f.rep if start is None else start
    mults = _monomials_up_to(n, deg_bound)
    columns = [(gi, m) for gi in range(len(gens)) for m in mults]
    if len(columns) > budget:
        raise BudgetExceeded(
            f"oracle needs {len(columns)} multiplier columns, budget is {budget}"
        )
    # each row: (vector as dict monomial -> coeff, combination dict column -> coeff)
    rows: list[tuple[dict[Monomial, Fraction], dict[int, Fraction]]] = []
    for k, (gi, m) in enumerate(columns):
        vec = gens[gi].mul_term(m, Fraction(1)).terms
        if vec:
            rows.append((dict(vec), {k: Fraction(1)}))
    pivots: list[tuple[Monomial, dict[Monomial, Fraction], dict[int, Fraction]]] = []
    active = rows
    while active:
        best = None
        for idx, (vec, _) in enumerate(active):
            for mono in sorted(vec):
                s = _vadic_size(vec[mono], p)
                if best is None or s > best[0]:
                    best = (s, idx, mono)
        if best is None:
            break
        _, idx, mono = best
        vec, combo = active[idx]
        scale = 1 / vec[mono]
        vec = {m: c * scale for m, c in vec.items()}
        combo = {k: c * scale for k, c in combo.items()}
        nxt = []
        for j, (w, wc) in enumerate(active):
            if j == idx:
                continue
            t = w.get(mono)
            if t:
                w = dict(w)
                wc = dict(wc)
                for m, c in vec.items():
                    s = w.get(m, 0) - t * c
                    if s:
                        w[m] = s
                    else:
                        w.pop(m, None)
                for k, c in combo.items():
                    s = wc.get(k, 0) - t * c
                    if s:
                        wc[k] = s
                    else:
                        wc.pop(k, None)
            if w:
                nxt.append((w, wc))
        pivots.append((mono, vec, combo))
        active = nxt
    # back-substitute so each pivot coordinate appears in exactly one basis vector
    for i in range(len(pivots) - 1, -1, -1):
        mono_i, vec_i, combo_i = pivots[i]
        for j in range(i):
            mono_j, vec_j, combo_j = pivots[j]
            t = vec_j.get(mono_i)
            if t:
                for m, c in vec_i.items():
                    s = vec_j.get(m, 0) - t * c
                    if s:
                        vec_j[m] = s
                    else:
                        vec_j.pop(m, None)
                for k, c in combo_i.items():
                    s = combo_j.get(k, 0) - t * c
                    if s:
                        combo_j[k] = s
                    else:
                        combo_j.pop(k, None)
    residual = dict(target.terms)
    witness: dict[int, Fraction] = {}
    for mono, vec, combo in pivots:
        t = residual.get(mono)
        if not t:
            continue
        for m, c in vec.items():
            s = residual.get(m, 0) - t * c
            if s:
                residual[m] = s
            else:
                residual.pop(m, None)
        for k, c in combo.items():
            s = witness.get(k, 0) - t * c
            if s:
                witness[k] = s
            else:
                witness.pop(k, None)
    value = max((abs_value(c, v) for c in residual.values()), default=Fraction(0))
    multipliers = [Poly.zero(n) for _ in gens]
    for k, c in witness.items():
        gi, m = columns[k]
        multipliers[gi] = multipliers[gi] + Poly.monomial(m, c)
    height = max(
        (max(abs(c.numerator), c.denominator) for h in multipliers for c in h.coefficients()),
        default=0,
    )
    return OracleResult(value, tuple(multipliers), height, len(columns))


def brute_force_norm(
    f: QuotientElement,
    v: Place,
    deg_bound: int,
    height_bound: int,
    generators: Sequence[Poly] | None = None,
    budget: int = 600,
    start: Poly | None = None,
) -> Fraction:
    """Least representative norm found by :func:`brute_force_search`.

    Raises :class:`BudgetExceeded` rather than answering when the search space
    is larger than ``budget`` columns.
    """
    return brute_force_search(f, v, deg_bound, height_bound, generators, budget, start).value


# ---------------------------------------------------------------------------
# Adelicity of coefficient streams

CoeffEntry = Union[QuotientElement, Sequence[QuotientElement]]


@dataclass(frozen=True)
class AdelicityCertificate:
    """Per-place geometric bounds ``kappa_v * c_v**o`` and degree bounds ``o*alpha + beta``.

    Places not listed in ``kappa`` have ``kappa_v = c_v = 1``.
    """

    kappa: dict[Place, Fraction]
    c: dict[Place, Fraction]
    alpha: int | None
    beta: int | None
    witnessed_order: int
    bad_places: tuple[Place, ...] = field(default=())

    def bound(self, v: Place, o: int) -> Fraction:
        return self.kappa.get(v, Fraction(1)) * self.c.get(v, Fraction(1)) ** o


def _as_list(entry: CoeffEntry) -> list[QuotientElement]:
    if isinstance(entry, QuotientElement):
        return [entry]
    return list(entry)


def _fit_slope(points: dict[int, int], window: int) -> int:
    """Least integer slope ``g >= 0`` whose envelope from the first half covers the rest.

    ``points`` maps an order ``o`` to an integer size ``e_o``.  The envelope is
    ``max_{o < window/2} (e_o - g o)``; the fit requires every later point to lie
    on or below ``e = envelope + g o``.
    """
    half = max(1, (window + 1) // 2)
    early = {o: e for o, e in points.items() if o < half}
    late = {o: e for o, e in points.items() if o >= half}
    if not late:
        return 0
    if not early:
        # nothing observed in the first half: fall back to a slope through the origin
        o0 = min(late)
        early = {o0: late.pop(o0)}
        if not late:
            return 0
    g = 0
    while True:
        env = max(e - g * o for o, e in early.items())
        if all(e - g * o <= env for o, e in late.items()):
            return g
        g += 1


def check_adelic(
    coeffs: Sequence[CoeffEntry], fit_alpha: bool = True, min_window: int = 8
) -> AdelicityCertificate:
    """Fit an adelic certificate to coefficients indexed by total order.

    At each prime dividing some normal-form denominator, the exponent of the
    v-adic size is fitted by a slope as in :func:`_fit_slope`, giving ``c_v``,
    and ``kappa_v`` is the largest observed ``|P_o|_v / c_v**o``.  A stream is
    declared not adelic when a new prime becomes bad in the second half of a
    window of at least ``min_window`` orders, or when the slope fitted on the
    full window exceeds the slope fitted on its first half by more than one.
    """
    if not coeffs:
        raise DomainError("check_adelic needs a nonempty coefficient stream")
    entries = [_as_list(e) for e in coeffs]
    window = len(entries)
    first_bad: dict[int, int] = {}
    sizes: dict[int, dict[int, int]] = {}
    for o, elems in enumerate(entries):
        for el in elems:
            for c in el.rep.coefficients():
                for p in prime_divisors(c.denominator):
                    first_bad.setdefault(p, o)
    for p in first_bad:
        pts: dict[int, int] = {}
        for o, elems in enumerate(entries):
            nonzero = [el for el in elems if not el.is_zero()]
            if nonzero:
                pts[o] = max(
                    max(_vadic_size(c, p) for c in el.rep.coefficients()) for el in nonzero
                )
        sizes[p] = pts
    if window >= min_window:
        half = (window + 1) // 2
        late = sorted(p for p, o in first_bad.items() if o >= half)
        if late:
            o = first_bad[late[0]]
            raise NotAdelic(
                f"not adelic at order {window}: place p:{late[0]} first becomes bad at order {o}, "
                f"and {len(late)} new bad place(s) appear in the second half of the window"
            )
    kappa: dict[Place, Fraction] = {}
    cval: dict[Place, Fraction] = {}
    for p in sorted(sizes):
        pts = sizes[p]
        g = _fit_slope(pts, window)
        if window >= min_window:
            g_half = _fit_slope({o: e for o, e in pts.items() if o < (window + 1) // 2}, (window + 1) // 2)
            if g > g_half + 1:
                raise NotAdelic(
                    f"not adelic at order {window}: growth exponent at p:{p} rises from "
                    f"{g_half} to {g} when the window doubles"
                )
        k = max(e - g * o for o, e in pts.items())
        v = finite_place(p)
        cval[v] = Fraction(p) ** g
        kappa[v] = Fraction(p) ** k if k >= 0 else Fraction(1, p ** (-k))
    alpha = beta = None
    if fit_alpha:
        degs: dict[int, int] = {}
        for o, elems in enumerate(entries):
            ds = [el.rep.degree() for el in elems if not el.is_zero()]
            if ds:
                degs[o] = max(ds)
        if degs:
            alpha = _fit_slope(degs, window)
            beta = max(d - alpha * o for o, d in degs.items())
        else:
            alpha, beta = 0, 0
    bad = tuple(sorted(cval, key=lambda v: v.prime))
    return AdelicityCertificate(kappa, cval, alpha, beta, window, bad)


def certificate_holds(cert: AdelicityCertificate, coeffs: Sequence[CoeffEntry]) -> bool:
    """Recheck the certificate inequalities on every coefficient (norms of normal forms)."""
    for o, entry in enumerate(coeffs):
        for el in _as_list(entry):
            if el.is_zero():
                continue
            places = set(cert.c)
            for c in el.rep.coefficients():
                places.update(finite_place(p) for p in prime_divisors(c.denominator))
            for v in places:
                if el.rep.gauss_norm(v) > cert.bound(v, o):
                    return False
            if cert.alpha is not None and el.rep.degree() > o * cert.alpha + cert.beta:
                return False
    return True
