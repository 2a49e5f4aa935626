"""Sparse multivariate polynomials over Q, Groebner bases and quotient rings.

A :class:`Poly` is a mapping from exponent tuples to nonzero Fractions.  Monomial
orders always compare total degree first; ties are broken reverse
lexicographically (``degrevlex``, the default) or lexicographically
(``deglex``).

Reduced bases are normalized to be integer-primitive with a positive leading
coefficient rather than monic, so that the primes dividing a leading
coefficient are exactly the places where lead reduction may fail to be
norm-minimal.

>>> x, y = Poly.var(0, 2), Poly.var(1, 2)
>>> gb = groebner_basis([y - x**2])
>>> normal_form(x**3, gb).rep == x * y
True
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence, Union

from adelikit.exact_arith import DomainError, Place, abs_value, to_rational

Monomial = tuple[int, ...]
Scalar = Union[int, Fraction]


def _is_scalar(x: object) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


class Poly:
    """A polynomial in ``nvars`` variables with rational coefficients.

    Instances are treated as immutable values; every operation returns a new
    polynomial.  ``terms`` never stores zero coefficients.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Monomial, Scalar] | None = None) -> None:
        if nvars < 0:
            raise DomainError("arity must be nonnegative")
        self.nvars = nvars
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                mono = tuple(int(e) for e in mono)
                if len(mono) != nvars or any(e < 0 for e in mono):
                    raise DomainError(f"bad exponent vector {mono} for arity {nvars}")
                c = Fraction(c)
                if c:
                    clean[mono] = clean.get(mono, Fraction(0)) + c
                    if not clean[mono]:
                        del clean[mono]
        self.terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Monomial, Fraction]) -> "Poly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, c: Scalar, nvars: int) -> "Poly":
        c = Fraction(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def one(cls, nvars: int) -> "Poly":
        return cls.constant(1, nvars)

    @classmethod
    def var(cls, i: int, nvars: int) -> "Poly":
        if not 0 <= i < nvars:
            raise DomainError(f"variable index {i} out of range for arity {nvars}")
        mono = tuple(1 if j == i else 0 for j in range(nvars))
        return cls._raw(nvars, {mono: Fraction(1)})

    @classmethod
    def monomial(cls, mono: Monomial, coeff: Scalar = 1) -> "Poly":
        return cls(len(mono), {tuple(mono): coeff})

    # ----- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self.terms.items())

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(tuple(mono), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def coefficients(self) -> list[Fraction]:
        return list(self.terms.values())

    # ----- arithmetic -----------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if other.nvars != self.nvars:
            raise DomainError(f"arity mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other: object) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        if _is_scalar(other):
            return Poly.constant(other, self.nvars)  # type: ignore[arg-type]
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> "Poly":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in o.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: object) -> "Poly":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: object) -> "Poly":
        return (-self) + other

    def scale(self, c: Scalar) -> "Poly":
        c = Fraction(c)
        if not c:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {m: v * c for m, v in self.terms.items()})

    def mul_term(self, mono: Monomial, c: Fraction) -> "Poly":
        if not c:
            return Poly.zero(self.nvars)
        return Poly._raw(
            self.nvars,
            {tuple(a + b for a, b in zip(m, mono)): v * c for m, v in self.terms.items()},
        )

    def __mul__(self, other: object) -> "Poly":
        if _is_scalar(other):
            return self.scale(other)  # type: ignore[arg-type]
        if not isinstance(other, Poly):
            return NotImplemented
        self._check(other)
        if len(self.terms) > len(other.terms):
            a, b = other, self
        else:
            a, b = self, other
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in a.terms.items():
            for m2, c2 in b.terms.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly._raw(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, c: Scalar) -> "Poly":
        if not _is_scalar(c):
            return NotImplemented
        if not c:
            raise ZeroDivisionError("division of a polynomial by zero")
        return self.scale(1 / Fraction(c))

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise DomainError("negative powers are not polynomials")
        result = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if _is_scalar(other):
            return self == Poly.constant(other, self.nvars)  # type: ignore[arg-type]
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # ----- calculus and substitution -----------------------------------------

    def derivative(self, i: int) -> "Poly":
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = m[:i] + (e - 1,) + m[i + 1 :]
                out[mm] = c * e
        return Poly._raw(self.nvars, out)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != self.nvars:
            raise DomainError("point has the wrong number of coordinates")
        pt = [Fraction(x) for x in point]
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for x, e in zip(pt, m):
                if e:
                    t *= x**e
            total += t
        return total

    def substitute(self, values: Sequence["Poly"]) -> "Poly":
        """Compose with polynomials: replace variable ``i`` by ``values[i]``."""
        if len(values) != self.nvars:
            raise DomainError("substitution needs one polynomial per variable")
        if not values:
            return self
        n = values[0].nvars
        powers: list[dict[int, Poly]] = [{0: Poly.one(n), 1: v} for v in values]

        def power(i: int, e: int) -> Poly:
            cache = powers[i]
            if e not in cache:
                cache[e] = power(i, e - 1) * values[i]
            return cache[e]

        out = Poly.zero(n)
        for m, c in self.terms.items():
            t = Poly.constant(c, n)
            for i, e in enumerate(m):
                if e:
                    t = t * power(i, e)
            out = out + t
        return out

    def embed(self, nvars: int, positions: Sequence[int] | None = None) -> "Poly":
        """Re-express in a larger ring, sending variable ``i`` to ``positions[i]``."""
        pos = list(range(self.nvars)) if positions is None else list(positions)
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            mm = [0] * nvars
            for i, e in enumerate(m):
                mm[pos[i]] += e
            out[tuple(mm)] = c
        return Poly._raw(nvars, out)

    # ----- arithmetic content and norms ------------------------------------

    def content(self) -> Fraction:
        """Positive rational c with ``self / c`` integral and primitive."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, c.numerator)
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    def gauss_norm(self, v: Place) -> Fraction:
        return max((abs_value(c, v) for c in self.terms.values()), default=Fraction(0))

    def to_str(self, names: Sequence[str] | None = None, order: "MonomialOrder | None" = None) -> str:
        if not self.terms:
            return "0"
        names = list(names) if names else [f"x{i + 1}" for i in range(self.nvars)]
        order = order or DEGREVLEX
        parts = []
        for m in sorted(self.terms, key=order.key, reverse=True):
            c = self.terms[m]
            mono = "*".join(
                (names[i] if e == 1 else f"{names[i]}^{e}") for i, e in enumerate(m) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Poly({self.to_str()})"


def poly_from_string(text: str, names: Sequence[str]) -> Poly:
    """Parse a polynomial such as ``"x^2 - 3/4*y"`` over the given variables."""
    import sympy

    names = list(names)
    syms = [sympy.Symbol(n) for n in names]
    local = {n: s for n, s in zip(names, syms)}
    try:
        expr = sympy.sympify(str(text).replace("^", "**"), locals=local, rational=True)
        if not names:
            if not expr.is_Rational:
                raise DomainError(f"{text!r} is not a rational constant")
            return Poly.constant(Fraction(int(expr.p), int(expr.q)), 0)
        sp = sympy.Poly(expr, *syms, domain="QQ")
    except DomainError:
        raise
    except (sympy.SympifyError, sympy.PolynomialError, sympy.polys.polyerrors.CoercionFailed, TypeError, SyntaxError) as exc:
        raise DomainError(f"cannot parse {text!r} as a polynomial in {names}: {exc}") from None
    terms = {tuple(m): Fraction(int(c.p), int(c.q)) for m, c in sp.terms()}
    return Poly(len(names), terms)


# ---------------------------------------------------------------------------
# Monomial orders


@lru_cache(maxsize=None)
def _order_key(kind: str, priority: tuple[int, ...] | None, mono: Monomial) -> tuple:
    e = mono if priority is None else tuple(mono[i] for i in priority)
    d = sum(e)
    if kind == "degrevlex":
        return (d, tuple(-x for x in reversed(e)))
    return (d, e)


@dataclass(frozen=True)
class MonomialOrder:
    """A degree-first monomial order.

    ``priority`` lists variable indices from most to least significant; ``None``
    means the declared order of the ring's variables.
    """

    kind: str = "degrevlex"
    priority: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("degrevlex", "deglex"):
            raise DomainError(f"unknown monomial order {self.kind!r}")
        if self.priority is not None:
            object.__setattr__(self, "priority", tuple(self.priority))

    def key(self, mono: Monomial) -> tuple:
        return _order_key(self.kind, self.priority, mono)

    def leading_monomial(self, f: Poly) -> Monomial:
        if not f.terms:
            raise DomainError("the zero polynomial has no leading term")
        return max(f.terms, key=self.key)

    def leading_coefficient(self, f: Poly) -> Fraction:
        return f.terms[self.leading_monomial(f)]


DEGREVLEX = MonomialOrder("degrevlex")
DEGLEX = MonomialOrder("deglex")


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def _quotient(b: Monomial, a: Monomial) -> Monomial:
    return tuple(y - x for x, y in zip(a, b))


def make_primitive(f: Poly, order: MonomialOrder) -> Poly:
    """Scale to integer coefficients with content 1 and positive leading coefficient."""
    if not f.terms:
        return f
    c = f.content()
    if order.leading_coefficient(f) < 0:
        c = -c
    return f.scale(1 / c)


# ---------------------------------------------------------------------------
# Division and Buchberger


def _reduce(f: Poly, basis: Sequence[Poly], leads: Sequence[Monomial], order: MonomialOrder) -> Poly:
    """Full reduction of ``f`` by ``basis`` (whose leading monomials are ``leads``)."""
    p = dict(f.terms)
    rem: dict[Monomial, Fraction] = {}
    lcs = [g.terms[m] for g, m in zip(basis, leads)]
    key = order.key
    while p:
        m = max(p, key=key)
        c = p[m]
        for g, lm, lc in zip(basis, leads, lcs):
            if _divides(lm, m):
                q = _quotient(m, lm)
                factor = c / lc
                for gm, gc in g.terms.items():
                    t = tuple(a + b for a, b in zip(gm, q))
                    s = p.get(t, 0) - factor * gc
                    if s:
                        p[t] = s
                    else:
                        p.pop(t, None)
                break
        else:
            rem[m] = c
            del p[m]
    return Poly._raw(f.nvars, rem)


def s_polynomial(f: Poly, g: Poly, order: MonomialOrder) -> Poly:
    mf, mg = order.leading_monomial(f), order.leading_monomial(g)
    lcm = _lcm(mf, mg)
    return f.mul_term(_quotient(lcm, mf), 1 / f.terms[mf]) - g.mul_term(
        _quotient(lcm, mg), 1 / g.terms[mg]
    )


def _buchberger(gens: list[Poly], order: MonomialOrder) -> list[Poly]:
    basis: list[Poly] = []
    leads: list[Monomial] = []
    sugar: list[int] = []
    pairs: dict[tuple[int, int], int] = {}

    def add(h: Poly, s: int) -> None:
        h = make_primitive(h, order)
        k = len(basis)
        lm = order.leading_monomial(h)
        basis.append(h)
        leads.append(lm)
        sugar.append(s)
        for i in range(k):
            lcm = _lcm(leads[i], lm)
            d = sum(lcm)
            pairs[(i, k)] = max(sugar[i] + d - sum(leads[i]), s + d - sum(lm))

    for g in gens:
        if g.terms:
            add(g, g.degree())
    treated: set[tuple[int, int]] = set()
    while pairs:
        (i, j), s = min(pairs.items(), key=lambda kv: (kv[1], kv[0][1], kv[0][0]))
        del pairs[(i, j)]
        treated.add((i, j))
        li, lj = leads[i], leads[j]
        lcm = _lcm(li, lj)
        if all(a == 0 or b == 0 for a, b in zip(li, lj)):
            continue
        skip = False
        for k in range(len(basis)):
            if k in (i, j) or not _divides(leads[k], lcm):
                continue
            ik = (min(i, k), max(i, k))
            jk = (min(j, k), max(j, k))
            if ik not in pairs and jk not in pairs and ik in treated and jk in treated:
                skip = True
                break
        if skip:
            continue
        h = _reduce(s_polynomial(basis[i], basis[j], order), basis, leads, order)
        if h.terms:
            add(h, s)
    return basis


def _interreduce(basis: list[Poly], order: MonomialOrder) -> list[Poly]:
    leads = [order.leading_monomial(g) for g in basis]
    keep = []
    for i, (g, lm) in enumerate(zip(basis, leads)):
        dominated = any(
            _divides(leads[j], lm) and (leads[j] != lm or j < i) for j in range(len(basis)) if j != i
        )
        if not dominated:
            keep.append(g)
    keep.sort(key=lambda g: order.key(order.leading_monomial(g)))
    out = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1 :]
        lm = order.leading_monomial(g)
        tail = Poly._raw(g.nvars, {m: c for m, c in g.terms.items() if m != lm})
        red = _reduce(tail, others, [order.leading_monomial(o) for o in others], order)
        out.append(make_primitive(red + Poly.monomial(lm, g.terms[lm]), order))
    return out


@dataclass(frozen=True)
class GroebnerBasis:
    """A reduced Groebner basis of an ideal of Q[x_1..x_n].

    An empty ``generators`` tuple denotes the zero ideal, so the quotient ring is
    the polynomial ring itself.
    """

    nvars: int
    generators: tuple[Poly, ...]
    order: MonomialOrder = DEGREVLEX
    reduced: bool = True
    vars: tuple[str, ...] = ()
    leads: tuple[Monomial, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.vars:
            object.__setattr__(self, "vars", tuple(f"x{i + 1}" for i in range(self.nvars)))
        if len(self.vars) != self.nvars:
            raise DomainError("variable names do not match the arity")
        object.__setattr__(
            self, "leads", tuple(self.order.leading_monomial(g) for g in self.generators)
        )

    @classmethod
    def zero_ideal(cls, nvars: int, order: MonomialOrder = DEGREVLEX, names: Sequence[str] = ()) -> "GroebnerBasis":
        return cls(nvars, (), order, True, tuple(names))

    def is_unit_ideal(self) -> bool:
        return any(g.is_constant() for g in self.generators)

    def leading_coefficients(self) -> list[Fraction]:
        return [g.terms[m] for g, m in zip(self.generators, self.leads)]

    def reduce(self, f: Poly) -> Poly:
        if f.nvars != self.nvars:
            raise DomainError(f"arity mismatch: polynomial has {f.nvars}, ideal has {self.nvars}")
        if not self.generators or not f.terms:
            return f
        return _reduce(f, self.generators, self.leads, self.order)


def groebner_basis(
    generators: Iterable[Poly],
    order: MonomialOrder = DEGREVLEX,
    names: Sequence[str] = (),
) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``generators``."""
    gens = list(generators)
    if not gens:
        raise DomainError("groebner_basis needs at least one generator")
    n = gens[0].nvars
    if any(g.nvars != n for g in gens):
        raise DomainError("generators have inconsistent arity")
    nonzero = [g for g in gens if g.terms]
    if not nonzero:
        return GroebnerBasis.zero_ideal(n, order, names)
    basis = _interreduce(_buchberger(nonzero, order), order)
    return GroebnerBasis(n, tuple(basis), order, True, tuple(names))


def is_groebner(gb: GroebnerBasis) -> bool:
    """Buchberger's criterion: every S-polynomial reduces to zero."""
    for f, g in combinations(gb.generators, 2):
        if gb.reduce(s_polynomial(f, g, gb.order)).terms:
            return False
    return True


# ---------------------------------------------------------------------------
# Quotient rings


@dataclass(frozen=True)
class QuotientElement:
    """A coset ``f + I`` stored by its normal form."""

    ideal: GroebnerBasis
    rep: Poly

    def _other(self, other: object) -> "QuotientElement":
        if isinstance(other, QuotientElement):
            if other.ideal != self.ideal:
                raise DomainError("cosets of different ideals cannot be combined")
            return other
        if _is_scalar(other):
            return QuotientElement(self.ideal, self.ideal.reduce(Poly.constant(other, self.ideal.nvars)))  # type: ignore[arg-type]
        if isinstance(other, Poly):
            return normal_form(other, self.ideal)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> "QuotientElement":
        o = self._other(other)
        if o is NotImplemented:
            return NotImplemented
        return QuotientElement(self.ideal, self.rep + o.rep)

    __radd__ = __add__

    def __sub__(self, other: object) -> "QuotientElement":
        o = self._other(other)
        if o is NotImplemented:
            return NotImplemented
        return QuotientElement(self.ideal, self.rep - o.rep)

    def __rsub__(self, other: object) -> "QuotientElement":
        return (-self) + other

    def __neg__(self) -> "QuotientElement":
        return QuotientElement(self.ideal, -self.rep)

    def __mul__(self, other: object) -> "QuotientElement":
        o = self._other(other)
        if o is NotImplemented:
            return NotImplemented
        return QuotientElement(self.ideal, self.ideal.reduce(self.rep * o.rep))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.rep.terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, QuotientElement):
            return self.ideal == other.ideal and self.rep == other.rep
        if _is_scalar(other) or isinstance(other, Poly):
            o = self._other(other)
            return self.rep == o.rep
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.rep)

    def __repr__(self) -> str:
        return f"[{self.rep.to_str(self.ideal.vars, self.ideal.order)}]"


def normal_form(f: Poly, gb: GroebnerBasis) -> QuotientElement:
    """The unique fully lead-reduced representative of ``f + I``."""
    return QuotientElement(gb, gb.reduce(f))


def ideal_membership(f: Poly, gb: GroebnerBasis) -> bool:
    return not gb.reduce(f).terms


class QuotientRing:
    """The ring Q[x_1..x_n]/I, with elements kept as normal-form polynomials.

    Series and linear algebra over the ring work directly with the
    representative polynomials for speed; :meth:`element` wraps one as a
    :class:`QuotientElement`.
    """

    def __init__(self, gb: GroebnerBasis) -> None:
        if gb.is_unit_ideal():
            raise DomainError("the unit ideal has the zero ring as quotient")
        self.gb = gb
        self.nvars = gb.nvars
        self._zero = Poly.zero(self.nvars)
        self._one = Poly.one(self.nvars)

    @classmethod
    def rationals(cls) -> "QuotientRing":
        return cls(GroebnerBasis.zero_ideal(0))

    @classmethod
    def polynomial_ring(cls, nvars: int, names: Sequence[str] = ()) -> "QuotientRing":
        return cls(GroebnerBasis.zero_ideal(nvars, DEGREVLEX, names))

    @property
    def is_field_q(self) -> bool:
        return self.nvars == 0

    @property
    def zero(self) -> Poly:
        return self._zero

    @property
    def one(self) -> Poly:
        return self._one

    def const(self, c: Scalar) -> Poly:
        return Poly.constant(c, self.nvars)

    def reduce(self, f: Poly) -> Poly:
        return self.gb.reduce(f)

    def mul(self, a: Poly, b: Poly) -> Poly:
        if not a.terms or not b.terms:
            return self._zero
        if self.nvars == 0 or (not self.gb.generators):
            return a * b
        return self.gb.reduce(a * b)

    def element(self, f: Poly) -> QuotientElement:
        return normal_form(f, self.gb)

    def unit_inverse(self, a: Poly) -> Poly:
        """Inverse of a normal form that is a nonzero constant."""
        if not a.terms or not a.is_constant():
            raise DomainError(
                f"{a.to_str(self.gb.vars)} is not certified as a unit: only nonzero constant normal forms are"
            )
        return self.const(1 / a.constant_term())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QuotientRing) and other.gb == self.gb

    def __hash__(self) -> int:
        return hash((self.gb.nvars, self.gb.generators))

    def __repr__(self) -> str:
        gens = ", ".join(g.to_str(self.gb.vars) for g in self.gb.generators)
        return f"QuotientRing({', '.join(self.gb.vars)} / ({gens}))"
