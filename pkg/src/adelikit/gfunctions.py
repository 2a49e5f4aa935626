"""Connections with a logarithmic pole and the power series of their flat sections.

A :class:`LogConnection` is ``d/ds - Lambda(s)`` on ``Q(s)^m`` where every
entry of ``s * Lambda`` is regular at ``s = 0``.  Clearing denominators, the
flat-section equation ``s v' = (s Lambda) v`` becomes ``D s v' = P v`` with a
polynomial ``D``, ``D(0) != 0``, and a polynomial matrix ``P``; its coefficient
recursion has bounded length, which keeps long expansions cheap.

The remaining functions measure the resulting coefficient streams: per-place
growth slopes and radii, a truncated height statistic, and the evaluation of
polynomial relations at a rational point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from adelikit.exact_arith import (
    INF,
    AbsValue,
    DomainError,
    Place,
    abs_value,
    finite_place,
    log_abs,
    prime_divisors,
    to_rational,
    valuation,
)
from adelikit.linalg import Matrix, inverse, matvec
from adelikit.polynomials import Poly, QuotientRing
from adelikit.power_series import TruncatedSeries

UPoly = list[Fraction]


def _trim(a: UPoly) -> UPoly:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _umul(a: UPoly, b: UPoly) -> UPoly:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return _trim(out)


def _low_degree(a: UPoly) -> int:
    return next(i for i, x in enumerate(a) if x)


def _as_upoly(f: Poly | Sequence[object] | int | Fraction | str) -> UPoly:
    if isinstance(f, Poly):
        if f.nvars > 1:
            raise DomainError("connection entries are polynomials in the single variable s")
        if not f.terms:
            return []
        out = [Fraction(0)] * (f.degree() + 1)
        for m, c in f.terms.items():
            out[m[0] if m else 0] = c
        return out
    if isinstance(f, (int, Fraction, str)):
        return _trim([to_rational(f)])
    return _trim([to_rational(x) for x in f])  # type: ignore[arg-type]


def _series_div(num: UPoly, den: UPoly, order: int) -> UPoly:
    """Power series of ``num / den`` to ``order`` terms (needs ``den[0] != 0``)."""
    out = [Fraction(0)] * order
    inv0 = 1 / den[0]
    for n in range(order):
        acc = num[n] if n < len(num) else Fraction(0)
        for k in range(1, min(n, len(den) - 1) + 1):
            if den[k]:
                acc -= den[k] * out[n - k]
        out[n] = acc * inv0
    return out


@dataclass(frozen=True)
class LogConnection:
    """``d/ds - Lambda`` with ``Lambda[i][j] = num[i][j] / den[i][j]``.

    Entries are univariate polynomials given as coefficient lists (constant
    term first).  The pole of ``Lambda`` at ``0`` has order at most one.
    """

    entries: tuple[tuple[tuple[tuple[Fraction, ...], tuple[Fraction, ...]], ...], ...]
    _cleared: tuple = field(init=False, repr=False, compare=False)

    def __init__(self, entries: Sequence[Sequence[tuple[object, object]]]) -> None:
        m = len(entries)
        if m == 0 or any(len(row) != m for row in entries):
            raise DomainError("a connection matrix must be square and nonempty")
        rows = []
        for row in entries:
            out_row = []
            for num, den in row:
                n, d = _as_upoly(num), _as_upoly(den)  # type: ignore[arg-type]
                if not d:
                    raise DomainError("zero denominator in connection matrix")
                out_row.append((tuple(n), tuple(d)))
            rows.append(tuple(out_row))
        object.__setattr__(self, "entries", tuple(rows))
        object.__setattr__(self, "_cleared", self._clear())

    @classmethod
    def from_matrices(cls, residue: Sequence[Sequence[object]], regular: Sequence[Sequence[object]] | None = None) -> "LogConnection":
        """``Lambda = residue / s + regular`` with constant matrices."""
        m = len(residue)
        reg = regular if regular is not None else [[0] * m for _ in range(m)]
        entries = []
        for i in range(m):
            row = []
            for j in range(m):
                r = to_rational(residue[i][j])  # type: ignore[arg-type]
                c = to_rational(reg[i][j])  # type: ignore[arg-type]
                row.append(([r, c], [0, 1]))
            entries.append(row)
        return cls(entries)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def _clear(self):
        """Common denominator ``D`` and polynomial matrix ``P`` with ``s Lambda = P / D``."""
        m = len(self.entries)
        parts = []
        dens: list[tuple[Fraction, ...]] = []
        for row in self.entries:
            prow = []
            for num, den in row:
                num, den = list(num), list(den)
                k = _low_degree(den)
                d = den[k:]
                if not num:
                    prow.append(([], None))
                    continue
                j = _low_degree(num)
                shift = 1 + j - k
                if shift < 0:
                    raise DomainError(f"pole of order {k - j} at s=0; at most a simple pole is allowed")
                n = [Fraction(0)] * shift + num[j:]
                prow.append((n, tuple(d)))
                if tuple(d) not in dens:
                    dens.append(tuple(d))
            parts.append(prow)
        D: UPoly = [Fraction(1)]
        for d in dens:
            D = _umul(D, list(d))
        P = [[[] for _ in range(m)] for _ in range(m)]
        for i in range(m):
            for j in range(m):
                n, d = parts[i][j]
                if not n:
                    continue
                acc = n
                for other in dens:
                    if other != d:
                        acc = _umul(acc, list(other))
                P[i][j] = acc
        return D, P

    def pole_order(self) -> int:
        """Order of the pole of ``Lambda`` at 0 (0 or 1)."""
        return 0 if self.is_regular() else 1

    def is_regular(self) -> bool:
        """Whether ``Lambda`` itself has no pole at 0."""
        for row in self.entries:
            for num, den in row:
                if num and 1 + _low_degree(list(num)) - _low_degree(list(den)) < 1:
                    return False
        return True

    def cleared(self) -> tuple[UPoly, list[list[UPoly]]]:
        D, P = self._cleared
        return list(D), [[list(x) for x in row] for row in P]

    def residue(self) -> Matrix:
        """``N = (s Lambda)(0)``."""
        D, P = self._cleared
        return [[(x[0] if x else Fraction(0)) / D[0] for x in row] for row in P]

    def s_lambda_series(self, order: int) -> list[Matrix]:
        """Coefficient matrices ``L_k`` of ``s Lambda = sum_k L_k s^k`` for ``k < order``."""
        D, P = self._cleared
        m = self.dim
        series = [[_series_div(P[i][j], D, order) if P[i][j] else [Fraction(0)] * order for j in range(m)] for i in range(m)]
        return [[[series[i][j][k] for j in range(m)] for i in range(m)] for k in range(order)]

    def rescale(self, lam: object) -> "LogConnection":
        """The connection satisfied by ``v(lam * s)``: ``Lambda'(s) = lam * Lambda(lam * s)``."""
        lam = to_rational(lam)  # type: ignore[arg-type]
        if lam == 0:
            raise DomainError("rescaling factor must be nonzero")
        rows = []
        for row in self.entries:
            out = []
            for num, den in row:
                n = [c * lam ** (k + 1) for k, c in enumerate(num)]
                d = [c * lam**k for k, c in enumerate(den)]
                out.append((n, d))
            rows.append(out)
        return LogConnection(rows)


def residue(conn: LogConnection) -> Matrix:
    return conn.residue()


def hypergeometric_connection(a: object = Fraction(1, 2), b: object = Fraction(1, 2), c: object = 1) -> LogConnection:
    """Companion system of ``theta (theta + c - 1) - s (theta + a)(theta + b)``.

    In the basis ``(y, theta y)`` one has ``s Lambda = [[0, 1], [ab s, (a+b) s - (c-1)] / (1 - s)]``
    in the second row.
    """
    a, b, c = (to_rational(x) for x in (a, b, c))  # type: ignore[arg-type]
    one_minus_s = [Fraction(1), Fraction(-1)]
    s_times_den = [Fraction(0), Fraction(1), Fraction(-1)]
    return LogConnection(
        [
            [([0], [1]), ([1], [0, 1])],
            [([a * b], one_minus_s), ([-(c - 1), a + b], s_times_den)],
        ]
    )


# ---------------------------------------------------------------------------
# Flat sections


@dataclass(frozen=True)
class GSystem:
    """Coefficient lists ``coeffs[i][n]`` of power series ``G_1..G_m`` in ``s``."""

    coeffs: tuple[tuple[Fraction, ...], ...]
    connection: LogConnection | None = None
    initial: tuple[Fraction, ...] | None = None

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[Sequence[object]]) -> "GSystem":
        rows = tuple(tuple(to_rational(x) for x in row) for row in coeffs)  # type: ignore[arg-type]
        if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise DomainError("all components need the same positive number of coefficients")
        return cls(rows)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs[0])

    def components(self) -> list[TruncatedSeries]:
        Q = QuotientRing.rationals()
        return [
            TruncatedSeries.from_rationals(Q, 1, self.order, {(n,): c for n, c in enumerate(row) if c})
            for row in self.coeffs
        ]

    def values_at(self, xi: object, order: int | None = None) -> list[Fraction]:
        """The truncated sums ``sum_{n < order} c_n xi^n``."""
        xi = to_rational(xi)  # type: ignore[arg-type]
        N = self.order if order is None else min(order, self.order)
        out = []
        for row in self.coeffs:
            acc = Fraction(0)
            for c in reversed(row[:N]):
                acc = acc * xi + c
            out.append(acc)
        return out

    def rescale(self, lam: object) -> "GSystem":
        """``G(lam * s)``."""
        lam = to_rational(lam)  # type: ignore[arg-type]
        rows = tuple(tuple(c * lam**n for n, c in enumerate(row)) for row in self.coeffs)
        conn = self.connection.rescale(lam) if self.connection is not None else None
        return GSystem(rows, conn, self.initial)


def _pointwise(D: UPoly, n: int) -> Fraction:
    return D[n] if n < len(D) else Fraction(0)


def _cleared_defect(D: UPoly, P: list[list[UPoly]], v: list[list[Fraction]], order: int) -> list[list[Fraction]]:
    """Coefficients of ``D s v' - P v`` below ``order``."""
    m = len(v)
    out = [[Fraction(0)] * order for _ in range(m)]
    for i in range(m):
        for n in range(order):
            acc = Fraction(0)
            for k in range(min(n, len(D) - 1) + 1):
                if D[k] and n - k < len(v[i]):
                    acc += D[k] * (n - k) * v[i][n - k]
            for j in range(m):
                pij = P[i][j]
                for k in range(min(n, len(pij) - 1) + 1):
                    if pij[k] and n - k < len(v[j]):
                        acc -= pij[k] * v[j][n - k]
            out[i][n] = acc
    return out


def ode_residual(conn: LogConnection, G: GSystem) -> list[list[Fraction]]:
    """Coefficients of ``s G' - (s Lambda) G`` below the truncation order (all zero when flat)."""
    L = conn.s_lambda_series(G.order)
    m = conn.dim
    out = []
    for i in range(m):
        row = []
        for n in range(G.order):
            acc = n * G.coeffs[i][n]
            for k in range(n + 1):
                Lk = L[k]
                for j in range(m):
                    if Lk[i][j]:
                        acc -= Lk[i][j] * G.coeffs[j][n - k]
            row.append(acc)
        out.append(row)
    return out


def flat_section(
    conn: LogConnection,
    v0: Sequence[object],
    order: int,
    extension: Sequence[Sequence[object]] | None = None,
) -> GSystem:
    """The flat section through ``v0``, expanded to ``order`` coefficients.

    ``v0`` must lie in the kernel of the residue.  The computation starts from
    an extension ``v`` of ``v0`` (the constant one unless given) and adds the
    unique correction ``w`` with ``w(0) = 0`` that cancels ``s * (v' - Lambda v)``;
    the result does not depend on the extension chosen.
    """
    m = conn.dim
    v0 = [to_rational(x) for x in v0]  # type: ignore[arg-type]
    if len(v0) != m:
        raise DomainError(f"initial vector must have {m} entries")
    if order < 1:
        raise DomainError("order must be positive")
    N0 = conn.residue()
    if any(x != 0 for x in matvec(N0, v0)):
        raise DomainError("initial vector is not in the kernel of the residue")
    if extension is None:
        v = [[x] + [Fraction(0)] * (order - 1) for x in v0]
    else:
        if len(extension) != m:
            raise DomainError("extension must have one series per coordinate")
        v = []
        for i, row in enumerate(extension):
            r = [to_rational(x) for x in row][:order]  # type: ignore[arg-type]
            r += [Fraction(0)] * (order - len(r))
            if r[0] != v0[i]:
                raise DomainError("extension must start at the initial vector")
            v.append(r)
    D, P = conn.cleared()
    rhs = _cleared_defect(D, P, v, order)
    w = [[Fraction(0)] * order for _ in range(m)]
    for n in range(1, order):
        # (n D_0 - P_0) w_n = -rhs_n - sum_{k >= 1} (D_k (n-k) - P_k) w_{n-k}
        b = [-rhs[i][n] for i in range(m)]
        for k in range(1, n + 1):
            dk = _pointwise(D, k)
            for i in range(m):
                acc = Fraction(0)
                if dk and w[i][n - k]:
                    acc += dk * (n - k) * w[i][n - k]
                for j in range(m):
                    pk = _pointwise(P[i][j], k)
                    if pk and w[j][n - k]:
                        acc -= pk * w[j][n - k]
                b[i] -= acc
        a = [[(n * D[0] if i == j else 0) - _pointwise(P[i][j], 0) for j in range(m)] for i in range(m)]
        try:
            ainv = inverse(a)
        except DomainError:
            raise DomainError(f"resonance: {n} is an eigenvalue of the residue") from None
        wn = matvec(ainv, b)
        for i in range(m):
            w[i][n] = wn[i]
    coeffs = tuple(tuple(v[i][n] + w[i][n] for n in range(order)) for i in range(m))
    return GSystem(coeffs, conn, tuple(v0))


def transport_flat_section(conn: LogConnection, v: Sequence[Sequence[object]], order: int) -> GSystem:
    """``sum_j (-s)^j / j! * nabla^j v`` for a connection without pole at 0.

    Each term costs one order of precision, so the sum is exact below ``order``
    when ``v`` is given to ``order`` coefficients.
    """
    if not conn.is_regular():
        raise DomainError("the transport formula needs a connection that is regular at 0")
    m = conn.dim
    L = conn.s_lambda_series(order + 1)
    lam = [[[L[k + 1][i][j] for k in range(order)] for j in range(m)] for i in range(m)]
    cur = [[to_rational(x) for x in row][:order] for row in v]  # type: ignore[arg-type]
    cur = [r + [Fraction(0)] * (order - len(r)) for r in cur]
    total = [[Fraction(0)] * order for _ in range(m)]
    fact = 1
    for j in range(order):
        if j:
            fact *= j
        scale = Fraction((-1) ** j, fact)
        for i in range(m):
            for n in range(order - j):
                if cur[i][n]:
                    total[i][n + j] += scale * cur[i][n]
        nxt = [[Fraction(0)] * order for _ in range(m)]
        for i in range(m):
            for n in range(order - 1):
                acc = (n + 1) * cur[i][n + 1]
                for jj in range(m):
                    row = lam[i][jj]
                    for k in range(n + 1):
                        if row[k] and cur[jj][n - k]:
                            acc -= row[k] * cur[jj][n - k]
                nxt[i][n] = acc
        cur = nxt
    v0 = tuple(total[i][0] for i in range(m))
    return GSystem(tuple(tuple(r) for r in total), conn, v0)


# ---------------------------------------------------------------------------
# Radii, heights, relations


@dataclass(frozen=True)
class RadiusProfile:
    """Growth of ``max_i |c_{i,n}|_v`` over ``1 <= n <= window``.

    ``slope[v]`` is the largest ``(1/n) log max_i |c_{i,n}|_v`` over the upper
    half of the window; the radius estimate is ``exp(-slope)``.  The lower
    bound uses the same maximum over the whole window.
    """

    window: int
    places: tuple[Place, ...]
    slope: dict[Place, float]
    slope_full: dict[Place, float]

    def log_radius(self, v: Place) -> float:
        return -self.slope[v]

    def radius(self, v: Place) -> float:
        return math.exp(-self.slope[v])

    def radius_lower(self, v: Place) -> float:
        return math.exp(-self.slope_full[v])

    def radius_upper(self, v: Place) -> float:
        return self.radius(v)

    @property
    def flagged(self) -> tuple[Place, ...]:
        """Places whose radius estimate is below 1."""
        return tuple(v for v in self.places if self.slope[v] > 0)


def _log_size(values: Sequence[Fraction], v: Place) -> float | None:
    nonzero = [x for x in values if x]
    if not nonzero:
        return None
    if v.prime is None:
        return max(log_abs(x, v) for x in nonzero)
    # exact integer valuation; the float appears only at the end
    return -min(valuation(x, v.prime) for x in nonzero) * math.log(v.prime)


def auto_places(G: GSystem, window: int) -> list[Place]:
    primes: set[int] = set()
    for row in G.coeffs:
        for c in row[: window + 1]:
            primes.update(prime_divisors(c.denominator))
    return [finite_place(p) for p in sorted(primes)] + [INF]


def radius_profile(G: GSystem, places: Sequence[Place] | None = None, window: int = 64) -> RadiusProfile:
    if window < 32:
        raise DomainError("the radius window must be at least 32")
    return _profile(G, places, window)


def _profile(G: GSystem, places: Sequence[Place] | None, window: int) -> RadiusProfile:
    if window < 1:
        raise DomainError("the radius window must be positive")
    if G.order <= window:
        raise DomainError(f"need coefficients up to n = {window}; the system has order {G.order}")
    plist = list(places) if places is not None else auto_places(G, window)
    slope: dict[Place, float] = {}
    full: dict[Place, float] = {}
    for v in plist:
        best_tail = -math.inf
        best_all = -math.inf
        for n in range(1, window + 1):
            size = _log_size([row[n] for row in G.coeffs], v)
            if size is None:
                continue
            val = size / n
            best_all = max(best_all, val)
            if n >= (window + 1) // 2:
                best_tail = max(best_tail, val)
        # a tail that vanishes on the window reads as infinite radius
        slope[v] = best_tail
        full[v] = best_all
    return RadiusProfile(window, tuple(plist), slope, full)


def relevant_places(
    xi: object, G: GSystem, profile: RadiusProfile | None = None, window: int | None = None
) -> set[Place]:
    """Places with ``|xi|_v < 1`` at which the radius estimate exceeds ``|xi|_v``."""
    xi = to_rational(xi)  # type: ignore[arg-type]
    if xi == 0:
        raise DomainError("xi must be nonzero")
    cands = [finite_place(p) for p in prime_divisors(xi.numerator)]
    if abs(xi) < 1:
        cands.append(INF)
    if not cands:
        return set()
    if profile is None or any(v not in profile.slope for v in cands):
        w = window if window is not None else min(G.order - 1, 256)
        profile = _profile(G, cands, w)
    return {v for v in cands if profile.log_radius(v) > log_abs(xi, v)}


@dataclass(frozen=True)
class HeightEstimate:
    """The size statistic ``sigma_N`` at ``N, N/2, N/4`` and a divergence flag."""

    N: int
    sigma: float
    history: dict[int, float]
    diverging: bool


def _sigma(G: GSystem, N: int) -> float:
    total = 0.0
    big = max((abs(c) for row in G.coeffs for c in row[: N + 1]), default=Fraction(0))
    if big > 1:
        total += log_abs(big, INF)
    worst: dict[int, int] = {}
    for row in G.coeffs:
        for c in row[: N + 1]:
            if c:
                for p in prime_divisors(c.denominator):
                    worst[p] = max(worst.get(p, 0), -valuation(c, p))
    total += sum(k * math.log(p) for p, k in worst.items())
    return total / N


def truncated_height(G: GSystem, N: int) -> HeightEstimate:
    """``sigma_N = (1/N) sum_v log+ max_{i, n <= N} |c_{i,n}|_v``.

    The flag is raised when ``sigma`` grew by at least ``log(2) / 4`` over each of
    the last two doublings of ``N``, the behaviour of a statistic growing like
    ``log N`` rather than converging.
    """
    if N < 8:
        raise DomainError("N must be at least 8")
    if G.order <= N:
        raise DomainError(f"need coefficients up to n = {N}; the system has order {G.order}")
    hist = {k: _sigma(G, k) for k in (N // 4, N // 2, N)}
    step = math.log(2) / 4
    diverging = hist[N] - hist[N // 2] >= step and hist[N // 2] - hist[N // 4] >= step
    return HeightEstimate(N, hist[N], hist, diverging)


@dataclass(frozen=True)
class RelationValue:
    """``|P(G(xi))|_v`` on a truncation, with an estimate for the neglected tail."""

    residual: AbsValue
    order: int
    tail_estimate: float | None
    homogeneous: bool

    @property
    def caveat(self) -> str:
        if self.tail_estimate is None:
            return "unbounded tail"
        return f"truncation tail estimated at {self.tail_estimate:.3g}"


def weil_height(xi: object) -> float:
    """``log max(|a|, |b|)`` for ``xi = a/b`` in lowest terms."""
    xi = to_rational(xi)  # type: ignore[arg-type]
    m = max(abs(xi.numerator), abs(xi.denominator))
    return 0.0 if xi == 0 else math.log(m)


def evaluate_relation(
    P: Poly, G: GSystem, xi: object, v: Place, order: int | None = None, window: int | None = None
) -> RelationValue:
    """Evaluate ``P(G_1(xi), ..., G_m(xi))`` on the truncation and take ``|.|_v``."""
    if P.nvars != G.dim:
        raise DomainError(f"P must have {G.dim} variables")
    xi = to_rational(xi)  # type: ignore[arg-type]
    N = G.order if order is None else order
    if N > G.order:
        raise DomainError("order exceeds the computed coefficients")
    tail: float | None = None
    if xi == 0:
        tail = 0.0
    else:
        if v not in relevant_places(xi, G, window=window):
            raise DomainError(f"{v} is not relevant for xi = {xi}")
        if G.order > 1:
            w = window if window is not None else min(G.order - 1, 256)
            prof = _profile(G, [v], w)
            rate = prof.slope[v] + log_abs(xi, v)
            if rate < 0:
                tail = math.exp(N * rate)
    vals = G.values_at(xi, N)
    res = abs_value(P.evaluate(vals), v)
    degs = {sum(m) for m in P.terms}
    return RelationValue(res, N, tail, len(degs) <= 1)
