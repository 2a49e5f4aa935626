"""Exact linear algebra over Q and over quotient rings Q[x]/I.

Matrices over Q are lists of rows of Fractions.  Subspaces of Q^n are
represented by the rows of their reduced row echelon form, which is a
canonical basis: two subspaces are equal exactly when these bases are equal.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from typing import Sequence

from adelikit.exact_arith import DomainError
from adelikit.polynomials import Poly, QuotientRing

Matrix = list[list[Fraction]]
Vector = list[Fraction]


def to_matrix(rows: Sequence[Sequence[object]]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]  # type: ignore[arg-type]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> Matrix:
    return [[Fraction(0)] * c for _ in range(r)]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a: Matrix, v: Vector) -> Vector:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def matpow(a: Matrix, k: int) -> Matrix:
    out = identity(len(a))
    for _ in range(k):
        out = matmul(out, a)
    return out


def is_zero_matrix(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def rref(rows: Sequence[Sequence[Fraction]], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form (nonzero rows only) and its pivot columns."""
    m = [list(map(Fraction, r)) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[0]) if a else 0


def nullspace(a: Matrix, ncols: int | None = None) -> Matrix:
    """Basis (as rows) of ``{x : a x = 0}``."""
    n = ncols if ncols is not None else (len(a[0]) if a else 0)
    red, piv = rref(a, n) if a else ([], [])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        basis.append(x)
    return basis


def solve(a: Matrix, b: Vector) -> Vector | None:
    """One solution of ``a x = b`` or ``None``."""
    n = len(a[0]) if a else 0
    aug = [row + [bi] for row, bi in zip(a, b)]
    red, piv = rref(aug, n + 1)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + e for row, e in zip(a, identity(n))]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise DomainError("matrix is singular")
    return [row[n:] for row in red]


# ---------------------------------------------------------------------------
# Subspaces of Q^n


class Subspace:
    """A subspace of Q^n stored by its canonical RREF basis."""

    __slots__ = ("dim_ambient", "basis")

    def __init__(self, n: int, vectors: Sequence[Sequence[Fraction]] = ()) -> None:
        self.dim_ambient = n
        vecs = [list(map(Fraction, v)) for v in vectors if any(x != 0 for x in v)]
        self.basis: Matrix = rref(vecs, n)[0] if vecs else []

    @classmethod
    def whole(cls, n: int) -> "Subspace":
        return cls(n, identity(n))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subspace)
            and other.dim_ambient == self.dim_ambient
            and other.basis == self.basis
        )

    def __hash__(self) -> int:
        return hash((self.dim_ambient, tuple(tuple(r) for r in self.basis)))

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(self.dim_ambient, self.basis + other.basis)

    def contains(self, v: Sequence[Fraction]) -> bool:
        return Subspace(self.dim_ambient, self.basis + [list(v)]).dim == self.dim

    def issubset(self, other: "Subspace") -> bool:
        return (self + other).dim == other.dim

    def intersect(self, other: "Subspace") -> "Subspace":
        n = self.dim_ambient
        if not self.basis or not other.basis:
            return Subspace(n)
        # solve sum a_i s_i - sum b_j t_j = 0
        cols = self.basis + [[-x for x in t] for t in other.basis]
        ker = nullspace(transpose(cols), len(cols))
        vecs = []
        for coeffs in ker:
            v = [Fraction(0)] * n
            for c, s in zip(coeffs[: self.dim], self.basis):
                if c:
                    v = [a + c * b for a, b in zip(v, s)]
            vecs.append(v)
        return Subspace(n, vecs)

    def image(self, a: Matrix) -> "Subspace":
        return Subspace(len(a), [matvec(a, v) for v in self.basis])

    def preimage(self, a: Matrix) -> "Subspace":
        """``{x : a x in self}``."""
        n = len(a[0])
        # x maps into self iff a x is killed by the annihilator of self
        ann = nullspace(self.basis, self.dim_ambient) if self.basis else identity(self.dim_ambient)
        if not ann:
            return Subspace.whole(n)
        return Subspace(n, nullspace(matmul(ann, a), n))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, basis={[[str(x) for x in r] for r in self.basis]})"


def kernel(a: Matrix) -> Subspace:
    n = len(a[0]) if a else 0
    return Subspace(n, nullspace(a, n))


def column_space(a: Matrix) -> Subspace:
    return Subspace(len(a), transpose(a))


# ---------------------------------------------------------------------------
# Matrices over a quotient ring


def ring_det(m: list[list[Poly]], ring: QuotientRing) -> Poly:
    """Determinant by the Leibniz expansion; fine for the small sizes used here."""
    n = len(m)
    if n == 0:
        return ring.one
    total = ring.zero
    for perm in permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = ring.one
        for i, j in enumerate(perm):
            term = ring.mul(term, m[i][j])
            if not term.terms:
                break
        if term.terms:
            total = total + (term if sign > 0 else -term)
    return ring.reduce(total)


def ring_adjugate(m: list[list[Poly]], ring: QuotientRing) -> list[list[Poly]]:
    n = len(m)
    if n == 1:
        return [[ring.one]]
    adj = [[ring.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(m) if k != i]
            c = ring_det(minor, ring)
            adj[j][i] = c if (i + j) % 2 == 0 else -c
    return adj


def standard_monomials(ring: QuotientRing, degree: int) -> list[tuple[int, ...]]:
    """Monomials of degree ``<= degree`` divisible by no leading monomial of the ideal."""
    from adelikit.power_series import monomials_of_degree

    leads = ring.gb.leads
    out = []
    for d in range(degree + 1):
        for m in monomials_of_degree(ring.nvars, d) if ring.nvars else [()]:
            if not any(all(a <= b for a, b in zip(lm, m)) for lm in leads):
                out.append(m)
        if not ring.nvars:
            break
    return out


def ring_inverse(a: Poly, ring: QuotientRing, max_degree: int = 6) -> Poly | None:
    """Find ``h`` with ``h * a = 1`` in the ring, searching ``deg h <= max_degree``.

    Returns ``None`` when no inverse of bounded degree exists.
    """
    a = ring.reduce(a)
    if not a.terms:
        return None
    if a.is_constant():
        return ring.const(1 / a.constant_term())
    for d in range(max_degree + 1):
        monos = standard_monomials(ring, d)
        images = [ring.reduce(Poly.monomial(m).scale(1) * a) if ring.nvars else a for m in monos]
        support = sorted({t for img in images for t in img.terms} | {(0,) * ring.nvars})
        mat = [[img.coefficient(t) for img in images] for t in support]
        rhs = [Fraction(1) if not any(t) else Fraction(0) for t in support]
        x = solve(mat, rhs)
        if x is not None:
            h = Poly(ring.nvars, {m: c for m, c in zip(monos, x) if c})
            return ring.reduce(h)
    return None


def ring_matrix_inverse(
    m: list[list[Poly]], ring: QuotientRing, max_degree: int = 6
) -> tuple[list[list[Poly]], Poly]:
    """Inverse of a square matrix whose determinant is a unit; also returns the determinant."""
    det = ring_det(m, ring)
    inv_det = ring_inverse(det, ring, max_degree)
    if inv_det is None:
        raise DomainError(
            f"determinant {det.to_str(ring.gb.vars)} is not a unit of the coefficient ring "
            f"(no inverse of degree <= {max_degree})"
        )
    adj = ring_adjugate(m, ring)
    return [[ring.mul(x, inv_det) for x in row] for row in adj], det
