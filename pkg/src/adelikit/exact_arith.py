"""Exact rationals, places of the rationals and their absolute values.

Rationals are :class:`fractions.Fraction`.  A place is either a finite prime
``p`` or the archimedean place ``INF``.  Absolute values are normalized so that
the product formula holds exactly::

    >>> from fractions import Fraction
    >>> abs_value(Fraction(12), finite_place(2))
    Fraction(1, 4)
    >>> abs_value(Fraction(-3, 8), INF)
    Fraction(3, 8)

Every absolute value here is itself an exact rational, so products over all
places can be compared with ``== 1`` rather than with a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union

from sympy import factorint, isprime

Rational = Fraction
AbsValue = Fraction
RationalLike = Union[int, Fraction, str]


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


class BudgetExceeded(RuntimeError):
    """Raised when a bounded search runs out of budget before finishing."""


@total_ordering
@dataclass(frozen=True)
class Place:
    """A place of Q: a prime number, or ``None`` for the archimedean place."""

    prime: int | None = None

    def __post_init__(self) -> None:
        if self.prime is not None:
            if not isinstance(self.prime, int) or isinstance(self.prime, bool):
                raise DomainError(f"place must be built from an int, got {self.prime!r}")
            if not isprime(self.prime):
                raise DomainError(f"{self.prime} is not prime")

    @property
    def is_finite(self) -> bool:
        return self.prime is not None

    def _key(self) -> tuple[int, int]:
        return (1, 0) if self.prime is None else (0, self.prime)

    def __lt__(self, other: "Place") -> bool:
        return self._key() < other._key()

    def __str__(self) -> str:
        return "inf" if self.prime is None else f"p:{self.prime}"

    def __repr__(self) -> str:
        return f"Place({self})"


INF = Place(None)


def finite_place(p: int) -> Place:
    return Place(int(p))


def to_rational(x: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise DomainError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise DomainError(f"cannot interpret {x!r} as an exact rational")


def parse_rational(text: str) -> Fraction:
    """Parse ``"a/b"`` or ``"a"``; floats and malformed strings are rejected."""
    t = text.strip()
    num, sep, den = t.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise DomainError(f"malformed rational {text!r}") from None
    if d == 0:
        raise DomainError(f"zero denominator in {text!r}")
    return Fraction(n, d)


def format_rational(q: Fraction) -> str:
    """Canonical ``"num/den"`` form, with the denominator always present."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_place(text: str) -> Place:
    if text == "inf":
        return INF
    if text.startswith("p:"):
        try:
            return finite_place(int(text[2:]))
        except ValueError:
            pass
    raise DomainError(f"malformed place {text!r}; expected 'p:<prime>' or 'inf'")


def format_place(v: Place) -> str:
    return str(v)


def _int_valuation(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def valuation(q: RationalLike, p: int | Place) -> int:
    """The p-adic valuation of a nonzero rational."""
    q = to_rational(q)
    if isinstance(p, Place):
        if p.prime is None:
            raise DomainError("valuation is only defined at finite places")
        p = p.prime
    if q == 0:
        raise DomainError("valuation of zero is +infinity")
    return _int_valuation(abs(q.numerator), p) - _int_valuation(q.denominator, p)


def abs_value(q: RationalLike, v: Place) -> AbsValue:
    """Normalized absolute value ``|q|_v`` as an exact rational."""
    q = to_rational(q)
    if v.prime is None:
        return abs(q)
    if q == 0:
        return Fraction(0)
    k = valuation(q, v.prime)
    return Fraction(1, v.prime**k) if k >= 0 else Fraction(v.prime ** (-k))


def log_abs(q: RationalLike, v: Place) -> float:
    """``log |q|_v`` computed without forming huge floats; ``-inf`` for zero."""
    q = to_rational(q)
    if q == 0:
        return -math.inf
    if v.prime is None:
        return math.log(abs(q.numerator)) - math.log(q.denominator)
    return -valuation(q, v.prime) * math.log(v.prime)


def prime_divisors(n: int) -> list[int]:
    n = abs(int(n))
    if n <= 1:
        return []
    return sorted(factorint(n))


def bad_places(q: RationalLike) -> frozenset[Place]:
    """Finite places where ``|q|_v != 1``.  Zero has no bad-place set."""
    q = to_rational(q)
    if q == 0:
        raise DomainError("zero has |0|_v = 0 at every place")
    primes = set(prime_divisors(q.numerator)) | set(prime_divisors(q.denominator))
    return frozenset(finite_place(p) for p in primes)


def product_formula(q: RationalLike) -> Fraction:
    """``prod_v |q|_v`` over the archimedean place and all bad places."""
    q = to_rational(q)
    out = abs_value(q, INF)
    for v in bad_places(q):
        out *= abs_value(q, v)
    return out


def primes_of(values: Iterable[RationalLike]) -> set[int]:
    """Primes dividing a numerator or denominator of any nonzero value."""
    out: set[int] = set()
    for x in values:
        x = to_rational(x)
        if x != 0:
            out.update(prime_divisors(x.numerator))
            out.update(prime_divisors(x.denominator))
    return out


def denominator_primes(values: Iterable[RationalLike]) -> set[int]:
    out: set[int] = set()
    for x in values:
        out.update(prime_divisors(to_rational(x).denominator))
    return out


def primes_up_to(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if isprime(p)]
