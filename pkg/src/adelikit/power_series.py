"""Truncated multivariate power series with coefficients in a quotient ring.

A :class:`TruncatedSeries` in ``nvars`` series variables ``u_1..u_nvars`` stores
its coefficients for all monomials of total degree ``< order``.  Coefficients
live in a :class:`~adelikit.polynomials.QuotientRing` and are always kept as
normal forms, so two series are equal exactly when their coefficient maps are.

Binary operations truncate at the smaller of the two orders:

>>> from adelikit.polynomials import QuotientRing
>>> Q = QuotientRing.rationals()
>>> u = TruncatedSeries.variable(Q, 0, 1, order=3)
>>> one = TruncatedSeries.constant(Q, 1, 1, order=3)
>>> ((one + u) * (one - u)).to_dict()
{(0,): Fraction(1, 1), (2,): Fraction(-1, 1)}

Composition ``B(A_1, .., A_sigma)`` is computed by direct substitution.  The
multivariate Faa di Bruno formula is implemented separately in
:class:`FaaDiBruno` and agrees coefficient by coefficient.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Mapping, Sequence, Union

from adelikit.exact_arith import DomainError
from adelikit.polynomials import Monomial, Poly, QuotientElement, QuotientRing

Scalar = Union[int, Fraction]


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, degree: int) -> tuple[Monomial, ...]:
    """All exponent vectors of the given total degree, in lexicographically decreasing order."""
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        m = [0] * nvars
        for i in combo:
            m[i] += 1
        out.append(tuple(m))
    return tuple(sorted(out, reverse=True))


def monomials_below(nvars: int, order: int) -> Iterator[Monomial]:
    """Monomials of total degree ``< order``, degree by degree."""
    for d in range(order):
        yield from monomials_of_degree(nvars, d)


def factorial_multi(m: Monomial) -> int:
    out = 1
    for e in m:
        out *= math.factorial(e)
    return out


def _add_mono(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def _sub_mono(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x - y for x, y in zip(a, b))


def _leq(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


class TruncatedSeries:
    """A power series in ``nvars`` variables known modulo total degree ``order``.

    ``exact`` marks series that are known to be polynomials (no unknown terms
    beyond the truncation), which is what composition needs when the inner
    series have a nonzero constant term.
    """

    __slots__ = ("ring", "nvars", "order", "coeffs", "exact")

    def __init__(
        self,
        ring: QuotientRing,
        nvars: int,
        order: int,
        coeffs: Mapping[Monomial, Poly] | None = None,
        exact: bool = False,
        reduce: bool = True,
    ) -> None:
        if nvars < 1:
            raise DomainError("a series needs at least one variable")
        if order < 0:
            raise DomainError("truncation order must be nonnegative")
        self.ring = ring
        self.nvars = nvars
        self.order = order
        self.exact = exact
        clean: dict[Monomial, Poly] = {}
        for m, c in (coeffs or {}).items():
            m = tuple(m)
            if len(m) != nvars:
                raise DomainError(f"exponent {m} does not have {nvars} entries")
            if sum(m) >= order:
                if exact and c.terms:
                    raise DomainError("an exact series must fit inside its truncation order")
                continue
            if c.nvars != ring.nvars:
                raise DomainError("coefficient does not belong to the coefficient ring")
            c = ring.reduce(c) if reduce else c
            if c.terms:
                clean[m] = c
        self.coeffs = clean

    # ----- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, ring: QuotientRing, nvars: int, order: int) -> "TruncatedSeries":
        return cls(ring, nvars, order)

    @classmethod
    def constant(cls, ring: QuotientRing, c: Scalar | Poly, nvars: int, order: int) -> "TruncatedSeries":
        cp = c if isinstance(c, Poly) else ring.const(c)
        return cls(ring, nvars, order, {(0,) * nvars: cp})

    @classmethod
    def variable(cls, ring: QuotientRing, i: int, nvars: int, order: int) -> "TruncatedSeries":
        m = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(ring, nvars, order, {m: ring.one})

    @classmethod
    def from_poly(cls, ring: QuotientRing, f: Poly, order: int | None = None) -> "TruncatedSeries":
        """A rational polynomial in the series variables, viewed as an exact series."""
        n = f.nvars
        if order is None:
            order = f.degree() + 1 if f.terms else 1
        exact = order > f.degree()
        return cls(
            ring,
            n,
            order,
            {m: ring.const(c) for m, c in f.terms.items()},
            exact=exact,
        )

    @classmethod
    def from_rationals(
        cls, ring: QuotientRing, nvars: int, order: int, coeffs: Mapping[Monomial, Scalar]
    ) -> "TruncatedSeries":
        return cls(ring, nvars, order, {m: ring.const(c) for m, c in coeffs.items()})

    # ----- access -------------------------------------------------------------

    def coefficient_rep(self, m: Monomial) -> Poly:
        m = tuple(m)
        if sum(m) >= self.order:
            raise DomainError(f"coefficient {m} lies beyond the truncation order {self.order}")
        return self.coeffs.get(m, self.ring.zero)

    def coefficient(self, m: Monomial) -> QuotientElement:
        return self.ring.element(self.coefficient_rep(m))

    def constant_rep(self) -> Poly:
        return self.coeffs.get((0,) * self.nvars, self.ring.zero)

    def to_dict(self) -> dict[Monomial, Poly | Fraction]:
        """Coefficient map; over Q the values are plain Fractions."""
        if self.ring.nvars == 0:
            return {m: c.constant_term() for m, c in sorted(self.coeffs.items())}
        return dict(sorted(self.coeffs.items()))

    def layer(self, degree: int) -> dict[Monomial, Poly]:
        return {m: c for m, c in self.coeffs.items() if sum(m) == degree}

    def is_zero(self) -> bool:
        return not self.coeffs

    def truncate(self, order: int) -> "TruncatedSeries":
        order = min(order, self.order)
        exact = self.exact and all(sum(m) < order for m in self.coeffs)
        return TruncatedSeries(
            self.ring,
            self.nvars,
            order,
            {m: c for m, c in self.coeffs.items() if sum(m) < order},
            exact=exact,
            reduce=False,
        )

    def with_order(self, order: int) -> "TruncatedSeries":
        """Raise or lower the order; raising is only meaningful for exact series."""
        if order > self.order and not self.exact:
            raise DomainError("cannot extend a truncated series beyond its known order")
        return TruncatedSeries(self.ring, self.nvars, order, self.coeffs, exact=self.exact, reduce=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.nvars == other.nvars
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def equal_mod(self, other: "TruncatedSeries", order: int | None = None) -> bool:
        """Equality of all coefficients below ``order`` (default: the common order)."""
        self._check(other)
        n = min(self.order, other.order) if order is None else order
        if n > min(self.order, other.order):
            raise DomainError("comparison order exceeds the known orders")
        keys = {m for m in self.coeffs if sum(m) < n} | {m for m in other.coeffs if sum(m) < n}
        return all(self.coeffs.get(m, self.ring.zero) == other.coeffs.get(m, self.ring.zero) for m in keys)

    def __repr__(self) -> str:
        parts = []
        for m, c in sorted(self.coeffs.items(), key=lambda mc: (sum(mc[0]), [-e for e in mc[0]])):
            cs = c.to_str(self.ring.gb.vars) if self.ring.nvars else str(c.constant_term())
            mono = "*".join(
                (f"u{i + 1}" if e == 1 else f"u{i + 1}^{e}") for i, e in enumerate(m) if e
            )
            parts.append(f"({cs})*{mono}" if mono else f"({cs})")
        body = " + ".join(parts) if parts else "0"
        return f"TruncatedSeries({body} + O(|u|^{self.order}))"

    # ----- arithmetic ---------------------------------------------------------

    def _check(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise DomainError("expected a TruncatedSeries")
        if other.ring != self.ring:
            raise DomainError("series have different coefficient rings")
        if other.nvars != self.nvars:
            raise DomainError("series have different numbers of variables")

    def _lift(self, other: object) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, Poly):
            s = TruncatedSeries.constant(self.ring, other, self.nvars, self.order)
            s.exact = True
            return s
        raise DomainError(f"cannot combine a series with {type(other).__name__}")

    def __add__(self, other: object) -> "TruncatedSeries":
        o = self._lift(other)
        n = min(self.order, o.order)
        out = {m: c for m, c in self.coeffs.items() if sum(m) < n}
        for m, c in o.coeffs.items():
            if sum(m) < n:
                out[m] = out[m] + c if m in out else c
        return TruncatedSeries(self.ring, self.nvars, n, out, exact=self.exact and o.exact, reduce=False)._prune()

    __radd__ = __add__

    def _prune(self) -> "TruncatedSeries":
        self.coeffs = {m: c for m, c in self.coeffs.items() if c.terms}
        return self

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(
            self.ring, self.nvars, self.order, {m: -c for m, c in self.coeffs.items()}, exact=self.exact, reduce=False
        )

    def __sub__(self, other: object) -> "TruncatedSeries":
        return self + (-self._lift(other))

    def __rsub__(self, other: object) -> "TruncatedSeries":
        return self._lift(other) - self

    def scale(self, c: Scalar | Poly) -> "TruncatedSeries":
        """Multiply every coefficient by a ring element or rational."""
        if isinstance(c, Poly):
            out = {m: self.ring.mul(v, c) for m, v in self.coeffs.items()}
        else:
            out = {m: v.scale(c) for m, v in self.coeffs.items()}
        return TruncatedSeries(self.ring, self.nvars, self.order, out, exact=self.exact, reduce=False)._prune()

    def __mul__(self, other: object) -> "TruncatedSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        o = self._lift(other)
        n = min(self.order, o.order)
        exact = self.exact and o.exact
        if exact:
            deg = max((sum(m) for m in self.coeffs), default=0) + max((sum(m) for m in o.coeffs), default=0)
            n = max(n, deg + 1)
        acc: dict[Monomial, Poly] = {}
        a_items = sorted(self.coeffs.items(), key=lambda mc: sum(mc[0]))
        b_items = sorted(o.coeffs.items(), key=lambda mc: sum(mc[0]))
        for m1, c1 in a_items:
            d1 = sum(m1)
            if d1 >= n:
                break
            for m2, c2 in b_items:
                if d1 + sum(m2) >= n:
                    break
                m = _add_mono(m1, m2)
                prod = c1 * c2
                acc[m] = acc[m] + prod if m in acc else prod
        return TruncatedSeries(self.ring, self.nvars, n, acc, exact=exact)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            return invert(self, self.order) ** (-k)
        result = TruncatedSeries.constant(self.ring, 1, self.nvars, self.order)
        result.exact = True
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def derivative(self, i: int) -> "TruncatedSeries":
        """Partial derivative in ``u_{i+1}`` (0-based index); the order drops by one."""
        if not 0 <= i < self.nvars:
            raise DomainError(f"derivative index {i} out of range")
        out = {}
        for m, c in self.coeffs.items():
            e = m[i]
            if e:
                out[m[:i] + (e - 1,) + m[i + 1 :]] = c.scale(e)
        return TruncatedSeries(
            self.ring, self.nvars, max(self.order - 1, 0), out, exact=self.exact, reduce=False
        )

    def map_coefficients(self, fn) -> "TruncatedSeries":
        return TruncatedSeries(self.ring, self.nvars, self.order, {m: fn(c) for m, c in self.coeffs.items()})


def _constant_series(ring: QuotientRing, c: Poly, nvars: int, order: int) -> TruncatedSeries:
    s = TruncatedSeries(ring, nvars, order, {(0,) * nvars: c}, reduce=False)
    s.exact = True
    return s


def _check_inner(A: Sequence[TruncatedSeries]) -> tuple[QuotientRing, int, int]:
    if not A:
        raise DomainError("composition needs at least one inner series")
    ring, nvars = A[0].ring, A[0].nvars
    for a in A:
        if a.ring != ring or a.nvars != nvars:
            raise DomainError("inner series must share ring and number of variables")
    return ring, nvars, min(a.order for a in A)


OuterSeries = Union[Poly, TruncatedSeries]


def _outer_is_polynomial(B: OuterSeries) -> bool:
    return isinstance(B, Poly) or B.exact


def _gate(B: OuterSeries, A: Sequence[TruncatedSeries]) -> None:
    arity = B.nvars
    if arity != len(A):
        raise DomainError(f"outer series has {arity} variables but {len(A)} inner series were given")
    if isinstance(B, TruncatedSeries) and B.ring != A[0].ring:
        raise DomainError("outer and inner series have different coefficient rings")
    if _outer_is_polynomial(B):
        return
    if all(not a.constant_rep().terms for a in A):
        return
    raise DomainError(
        "composition is not defined: condition (I) fails because the outer series is not a "
        "polynomial, and conditions (II)/(III) fail because the inner series do not vanish at 0"
    )


def _outer_terms(B: OuterSeries, ring: QuotientRing) -> list[tuple[Monomial, Poly]]:
    if isinstance(B, Poly):
        return [(m, ring.const(c)) for m, c in B.terms.items()]
    return list(B.coeffs.items())


def compose(B: OuterSeries, A: Sequence[TruncatedSeries], order: int | None = None) -> TruncatedSeries:
    """``B(A_1, .., A_sigma)`` truncated at ``order`` (default: the inner orders).

    ``B`` is either a rational polynomial in ``sigma`` variables or a series
    over the same ring as the ``A_i``.  Well-definedness requires ``B`` to be a
    polynomial or every ``A_i`` to vanish at the origin.
    """
    ring, nvars, inner_order = _check_inner(A)
    _gate(B, A)
    n = inner_order if order is None else min(order, inner_order)
    if isinstance(B, TruncatedSeries) and not B.exact:
        # with A(0) = 0 only monomials of degree < n contribute, and all of them are known
        if B.order < n:
            n = B.order
    A = [a.truncate(n) for a in A]
    zero_const = all(not a.constant_rep().terms for a in A)
    cache: dict[Monomial, TruncatedSeries] = {
        (0,) * len(A): _constant_series(ring, ring.one, nvars, n)
    }

    def power_product(lam: Monomial) -> TruncatedSeries:
        if lam in cache:
            return cache[lam]
        i = max(j for j, e in enumerate(lam) if e)
        prev = lam[:i] + (lam[i] - 1,) + lam[i + 1 :]
        val = power_product(prev) * A[i]
        cache[lam] = val
        return val

    acc: dict[Monomial, Poly] = {}
    for lam, b in sorted(_outer_terms(B, ring), key=lambda t: (sum(t[0]), t[0])):
        if zero_const and sum(lam) >= n:
            continue
        term = power_product(lam)
        for m, c in term.coeffs.items():
            prod = ring.mul(c, b) if ring.nvars else c * b
            acc[m] = acc[m] + prod if m in acc else prod
    return TruncatedSeries(ring, nvars, n, acc)


def evaluate_at(B: Poly, point: Sequence[Poly], ring: QuotientRing) -> Poly:
    """Evaluate a rational polynomial at a point with coordinates in the ring."""
    if B.nvars != len(point):
        raise DomainError("point has the wrong number of coordinates")
    if ring.nvars == 0 or not ring.gb.generators:
        return ring.reduce(B.substitute(list(point))) if B.nvars else ring.const(B.constant_term())
    return ring.reduce(B.substitute(list(point)))


# ---------------------------------------------------------------------------
# The closed Faa di Bruno formula


def chain_precedes(a: Monomial, b: Monomial) -> bool:
    """The strict order used for chains: smaller total degree, then lexicographic."""
    return (sum(a), a) < (sum(b), b)


class FaaDiBruno:
    """Taylor coefficients of ``B(A)`` from the multivariate Faa di Bruno formula.

    For a multi-index ``J`` the derivative ``d_J (B o A)(0)`` is the sum over
    ``1 <= |lam| <= |J|`` of ``(d_lam B)(A(0))`` times the sum over strict chains
    ``l_1 < .. < l_s`` of nonzero multi-indices with multiplicity vectors
    ``k_1..k_s`` (``sum k_a = lam``, ``sum |k_a| l_a = J``) of

        J! * prod_a [A_{l_a}(0)]^{k_a} / (k_a! * (l_a!)^{|k_a|})

    where ``A_l(0)`` is the vector of ``d_l A_i(0)``.  The chain sums are
    shared between multi-indices through a memo keyed by the position in the
    chain order and the remaining part of ``J``.
    """

    def __init__(self, B: OuterSeries, A: Sequence[TruncatedSeries]) -> None:
        self.ring, self.nvars, self.order = _check_inner(A)
        _gate(B, A)
        self.B = B
        self.A = list(A)
        self.sigma = len(A)
        self.point = [a.constant_rep() for a in A]
        self.chain = sorted(
            (m for d in range(1, self.order) for m in monomials_of_degree(self.nvars, d)),
            key=lambda m: (sum(m), m),
        )
        # derivative vectors d_l A_i(0) = l! * coefficient
        self.deriv = {
            l: [a.coefficient_rep(l).scale(factorial_multi(l)) for a in self.A] for l in self.chain
        }
        self._memo: dict[tuple[int, Monomial], dict[Monomial, Poly]] = {}
        self._outer_cache: dict[Monomial, Poly] = {}

    def _mul(self, a: Poly, b: Poly) -> Poly:
        return self.ring.mul(a, b)

    def outer_derivative(self, lam: Monomial) -> Poly:
        """``(d_lam B)(A(0))`` as a normal form."""
        if lam in self._outer_cache:
            return self._outer_cache[lam]
        if isinstance(self.B, Poly):
            d = self.B
            for i, e in enumerate(lam):
                for _ in range(e):
                    d = d.derivative(i)
            val = evaluate_at(d, self.point, self.ring)
        elif self.B.exact and any(p.terms for p in self.point):
            total = self.ring.zero
            for mu, c in self.B.coeffs.items():
                if not _leq(lam, mu):
                    continue
                falling = 1
                for m_i, l_i in zip(mu, lam):
                    falling *= math.factorial(m_i) // math.factorial(m_i - l_i)
                term = c.scale(falling)
                for i, e in enumerate(_sub_mono(mu, lam)):
                    for _ in range(e):
                        term = self._mul(term, self.point[i])
                total = total + term
            val = self.ring.reduce(total)
        else:
            if sum(lam) >= self.B.order:
                raise DomainError("outer series is not known to the needed order")
            val = self.B.coefficient_rep(lam).scale(factorial_multi(lam))
        self._outer_cache[lam] = val
        return val

    def _k_vectors(self, rest: Monomial, l: Monomial) -> Iterator[Monomial]:
        """Multiplicity vectors ``k`` with ``|k| >= 1`` and ``|k| * l <= rest``."""
        cap = min((r // e for r, e in zip(rest, l) if e), default=0)
        for total in range(1, cap + 1):
            yield from monomials_of_degree(self.sigma, total)

    def _chains(self, start: int, rest: Monomial) -> dict[Monomial, Poly]:
        """Sum of chain products over chains using positions ``>= start``, keyed by lambda."""
        key = (start, rest)
        if key in self._memo:
            return self._memo[key]
        zero = (0,) * self.sigma
        if not any(rest):
            out = {zero: self.ring.one}
            self._memo[key] = out
            return out
        out: dict[Monomial, Poly] = {}
        for pos in range(start, len(self.chain)):
            l = self.chain[pos]
            if sum(l) > sum(rest):
                break
            if not _leq(l, rest):
                continue
            dl = self.deriv[l]
            lf = factorial_multi(l)
            for k in self._k_vectors(rest, l):
                ksize = sum(k)
                used = tuple(e * ksize for e in l)
                if not _leq(used, rest):
                    continue
                prod = self.ring.one
                for i, ki in enumerate(k):
                    for _ in range(ki):
                        prod = self._mul(prod, dl[i])
                if not prod.terms:
                    continue
                prod = prod.scale(Fraction(1, factorial_multi(k) * lf**ksize))
                tail = self._chains(pos + 1, _sub_mono(rest, used))
                for lam, val in tail.items():
                    lam2 = _add_mono(lam, k)
                    contrib = self._mul(prod, val)
                    out[lam2] = out[lam2] + contrib if lam2 in out else contrib
        out = {lam: v for lam, v in out.items() if v.terms}
        self._memo[key] = out
        return out

    def derivative_at_zero(self, J: Monomial) -> Poly:
        """``d_J (B o A)(0)``."""
        J = tuple(J)
        if len(J) != self.nvars:
            raise DomainError("multi-index has the wrong length")
        if sum(J) >= self.order:
            raise DomainError(f"|J| = {sum(J)} exceeds what the inner series determine")
        if not any(J):
            return self.outer_derivative((0,) * self.sigma)
        jf = factorial_multi(J)
        total = self.ring.zero
        for lam, chain_sum in sorted(self._chains(0, J).items()):
            total = total + self._mul(self.outer_derivative(lam), chain_sum).scale(jf)
        return self.ring.reduce(total)

    def coefficient(self, J: Monomial) -> Poly:
        """The ``J``-th Taylor coefficient ``d_J (B o A)(0) / J!``."""
        return self.derivative_at_zero(J).scale(Fraction(1, factorial_multi(tuple(J))))

    def series(self, order: int | None = None) -> TruncatedSeries:
        n = self.order if order is None else min(order, self.order)
        return TruncatedSeries(
            self.ring, self.nvars, n, {J: self.coefficient(J) for J in monomials_below(self.nvars, n)}
        )


def faa_di_bruno_coefficient(B: OuterSeries, A: Sequence[TruncatedSeries], J: Monomial) -> QuotientElement:
    fdb = FaaDiBruno(B, A)
    return fdb.ring.element(fdb.coefficient(J))


# ---------------------------------------------------------------------------
# Inversion


def invert(f: TruncatedSeries, order: int | None = None) -> TruncatedSeries:
    """Multiplicative inverse via ``b_M = -(1/a_0) sum_{J+L=M, J != 0} a_J b_L``.

    The constant term must have a nonzero rational normal form.
    """
    n = f.order if order is None else min(order, f.order)
    ring = f.ring
    a0 = f.constant_rep()
    inv_a0 = ring.unit_inverse(a0)
    neg = inv_a0.scale(-1)
    nonconst = [(m, c) for m, c in f.coeffs.items() if any(m) and sum(m) < n]
    b: dict[Monomial, Poly] = {(0,) * f.nvars: inv_a0}
    for M in monomials_below(f.nvars, n):
        if not any(M):
            continue
        acc = ring.zero
        for J, aJ in nonconst:
            if _leq(J, M):
                bL = b.get(_sub_mono(M, J))
                if bL is not None:
                    acc = acc + aJ * bL
        if acc.terms:
            val = ring.reduce(acc * neg) if ring.nvars else acc * neg
            if val.terms:
                b[M] = val
    return TruncatedSeries(ring, f.nvars, n, b, reduce=False)


def series_vector_equal(xs: Iterable[TruncatedSeries], ys: Iterable[TruncatedSeries]) -> bool:
    return all(x.equal_mod(y) for x, y in zip(xs, ys, strict=True))
