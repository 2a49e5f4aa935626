"""Nilpotent operators, their weight filtrations, and Steenbrink bookkeeping.

The weight filtration of a nilpotent ``N`` centred at ``w`` is the unique
increasing filtration with ``N W_r ⊆ W_{r-2}`` such that ``N^j`` maps
``Gr_{w+j}`` isomorphically onto ``Gr_{w-j}``.  It is computed from kernels
and images::

    W_{w+j} = sum_{i >= max(0, j)} ker N^{i+1} ∩ im N^{i-j}

and, for nilpotency order at most 3, also from closed formulas in ``ker`` and
``im`` that serve as a cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from adelikit.exact_arith import DomainError
from adelikit.linalg import (
    Matrix,
    Subspace,
    column_space,
    is_zero_matrix,
    kernel,
    matmul,
    matpow,
    rank,
    to_matrix,
)


@dataclass(frozen=True)
class NilpotentOperator:
    matrix: Matrix
    w: int = 2

    def __init__(self, matrix: Sequence[Sequence[object]], w: int = 2) -> None:
        m = to_matrix(matrix)
        n = len(m)
        if n == 0 or any(len(row) != n for row in m):
            raise DomainError("N must be a nonempty square matrix")
        if w < 0:
            raise DomainError("the weight center must be nonnegative")
        if not is_zero_matrix(matpow(m, n)):
            raise DomainError("N is not nilpotent")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return len(self.matrix)

    def power(self, k: int) -> Matrix:
        return matpow(self.matrix, k)

    def ker(self, k: int) -> Subspace:
        return kernel(self.power(k)) if k else Subspace(self.n)

    def im(self, k: int) -> Subspace:
        return column_space(self.power(k))


def nilpotency_order(N: NilpotentOperator) -> int:
    """Least ``k`` with ``N^k = 0``; warns when ``w = 2`` and ``k > 3``."""
    k = 1
    p = N.matrix
    while not is_zero_matrix(p):
        p = matmul(p, N.matrix)
        k += 1
    if N.w == 2 and k > 3:
        warnings.warn(f"nilpotency order {k} exceeds 3, impossible for the H^2 of a surface", stacklevel=2)
    return k


@dataclass(frozen=True)
class WeightFiltration:
    """``W_r`` for ``0 <= r <= 2w``; ``W_r`` is 0 below and everything above this range."""

    w: int
    n: int
    spaces: tuple[Subspace, ...]

    def __getitem__(self, r: int) -> Subspace:
        if r < 0:
            return Subspace(self.n)
        if r >= len(self.spaces):
            return Subspace.whole(self.n)
        return self.spaces[r]

    @property
    def graded_dims(self) -> tuple[int, ...]:
        return tuple(self[r].dim - self[r - 1].dim for r in range(2 * self.w + 1))

    def transport(self, g: Matrix) -> "WeightFiltration":
        """The filtration ``g W_r``."""
        return WeightFiltration(self.w, self.n, tuple(s.image(g) for s in self.spaces))


def weight_filtration(N: NilpotentOperator) -> WeightFiltration:
    k = nilpotency_order(N)
    if k > N.w + 1:
        raise DomainError(f"nilpotency order {k} does not fit in the weight window [0, {2 * N.w}]")
    n, w = N.n, N.w
    kers = [N.ker(i) for i in range(k + 1)]
    ims = [N.im(i) for i in range(2 * k + 1)]
    spaces = []
    for r in range(2 * w + 1):
        j = r - w
        acc = Subspace(n)
        # ker N^{i+1} is everything once i >= k - 1, so the sum stops at max(k - 1, j)
        for i in range(max(0, j), max(k, j + 1)):
            ker = kers[i + 1] if i + 1 <= k else kers[k]
            acc = acc + ker.intersect(ims[i - j] if i - j < len(ims) else Subspace(n))
        spaces.append(acc)
    return WeightFiltration(w, n, tuple(spaces))


def closed_form_filtration(N: NilpotentOperator) -> WeightFiltration:
    """The explicit formulas in ``ker`` and ``im`` for nilpotency order ``k <= 3``.

    Relative to the center ``w``:

    * ``k = 1``: ``W_{w-1} = 0``, ``W_w`` everything;
    * ``k = 2``: ``W_{w-2} = 0``, ``W_{w-1} = im N``, ``W_w = ker N``, ``W_{w+1}`` everything;
    * ``k = 3``: ``W_{w-2} = im N^2``, ``W_{w-1} = N(ker N^2) + im N^2``,
      ``W_w = ker N^2 ∩ N^{-1}(im N^2) + im N^2``, ``W_{w+1} = ker N^2``.
    """
    k = nilpotency_order(N)
    n, w = N.n, N.w
    if k > 3:
        raise DomainError("closed forms are available for nilpotency order at most 3")
    if k > w + 1:
        raise DomainError("nilpotency order does not fit in the weight window")
    zero, full = Subspace(n), Subspace.whole(n)
    rel: dict[int, Subspace]
    if k == 1:
        rel = {-1: zero, 0: full}
    elif k == 2:
        rel = {-2: zero, -1: N.im(1), 0: N.ker(1), 1: full}
    else:
        im2, ker2 = N.im(2), N.ker(2)
        rel = {
            -3: zero,
            -2: im2,
            -1: ker2.image(N.matrix) + im2,
            0: ker2.intersect(im2.preimage(N.matrix)) + im2,
            1: ker2,
            2: full,
        }
    lo, hi = min(rel), max(rel)
    spaces = []
    for r in range(2 * w + 1):
        j = r - w
        spaces.append(zero if j < lo else full if j > hi else rel[j])
    return WeightFiltration(w, n, tuple(spaces))


def check_filtration(N: NilpotentOperator, W: WeightFiltration) -> list[str]:
    """Problems with the defining properties; an empty list means none."""
    problems = []
    for r in range(2 * W.w + 1):
        if W[r - 1].dim and not W[r - 1].issubset(W[r]):
            problems.append(f"W_{r - 1} is not contained in W_{r}")
        if not W[r].image(N.matrix).issubset(W[r - 2]):
            problems.append(f"N W_{r} is not contained in W_{r - 2}")
    for j in range(1, W.w + 1):
        up = W.graded_dims[W.w + j]
        down = W.graded_dims[W.w - j]
        # rank of N^j : Gr_{w+j} -> Gr_{w-j}
        img = W[W.w + j].image(N.power(j)) + W[W.w - j - 1]
        r = img.dim - W[W.w - j - 1].dim
        if not (up == down == r):
            problems.append(f"N^{j} is not an isomorphism Gr_{W.w + j} -> Gr_{W.w - j} ({up}, {down}, rank {r})")
    return problems


# ---------------------------------------------------------------------------
# Steenbrink E1 terms for semistable surface degenerations


@dataclass(frozen=True)
class StrataData:
    """Betti numbers of the strata of a normal crossings surface.

    ``components`` lists ``(h0, h1, h2)`` per component surface, ``double_curves``
    lists ``(h0, h1)`` per double curve, ``triple_points`` counts the triple points.
    """

    components: tuple[tuple[int, int, int], ...]
    double_curves: tuple[tuple[int, int], ...] = ()
    triple_points: int = 0

    def __post_init__(self) -> None:
        for c in self.components:
            if len(c) != 3:
                raise DomainError("a component needs (h0, h1, h2)")
        for c in self.double_curves:
            if len(c) != 2:
                raise DomainError("a double curve needs (h0, h1)")
        vals = [x for c in self.components for x in c] + [x for c in self.double_curves for x in c]
        vals.append(self.triple_points)
        if any(not isinstance(x, int) or isinstance(x, bool) or x < 0 for x in vals):
            raise DomainError("Betti numbers must be nonnegative integers")
        if any(c[0] < 1 for c in self.components + self.double_curves):  # type: ignore[operator]
            raise DomainError("every listed stratum has h0 >= 1")

    @classmethod
    def from_json(cls, data: Mapping[str, object]) -> "StrataData":
        comps = tuple((int(c["h0"]), int(c["h1"]), int(c["h2"])) for c in data.get("components", []))  # type: ignore[index,union-attr]
        curves = tuple((int(c["h0"]), int(c["h1"])) for c in data.get("double_curves", []))  # type: ignore[index,union-attr]
        return cls(comps, curves, int(data.get("triple_points", 0)))  # type: ignore[arg-type]

    def betti(self, stratum: int, degree: int) -> int:
        """``h^degree`` of the disjoint union of codimension-``(stratum-1)`` strata, by Poincare duality."""
        if stratum == 1:
            full = [(h0, h1, h2, h1, h0) for h0, h1, h2 in self.components]
        elif stratum == 2:
            full = [(h0, h1, h0) for h0, h1 in self.double_curves]
        elif stratum == 3:
            full = [(1,)] * self.triple_points
        else:
            return 0
        return sum(row[degree] for row in full if 0 <= degree < len(row))


def e1_terms(strata: StrataData, q: int, r: int) -> list[tuple[int, int, int, int]]:
    """Summands of ``E_1^{-r, q+r}``: tuples ``(stratum, degree, twist, dimension)``.

    ``E_1^{-r,q+r} = sum_{k >= max(0,-r)} H^{q-r-2k}(Y^[2k+r+1])(-r-k)``.
    """
    out = []
    k = max(0, -r)
    while 2 * k + r + 1 <= 3:
        deg = q - r - 2 * k
        if deg >= 0:
            out.append((2 * k + r + 1, deg, -r - k, strata.betti(2 * k + r + 1, deg)))
        k += 1
    return out


H2_POSITIONS = ((2, 0), (1, 1), (0, 2), (-1, 3), (-2, 4))


@dataclass(frozen=True)
class SteenbrinkE1:
    """Dimensions of the five ``E_1`` terms of total degree 2."""

    dims: dict[tuple[int, int], int]
    tags: dict[tuple[int, int], str]
    e2: dict[tuple[int, int], int] | None = field(default=None)

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self.dims[p] for p in H2_POSITIONS)


def _e1_dim(strata: StrataData, p: int, q: int) -> int:
    r = -p
    return sum(t[3] for t in e1_terms(strata, p + q, r))


def steenbrink_e1(strata: StrataData, d1: Mapping[tuple[int, int], Sequence[Sequence[object]]] | None = None) -> SteenbrinkE1:
    """``E_1`` dimensions contributing to ``H^2``, and ``E_2`` when ``d_1`` maps are given.

    ``d1[(p, q)]`` is the matrix of ``d_1 : E_1^{p,q} -> E_1^{p+1,q}`` (rows index
    the target).  Missing maps count as zero.
    """
    dims = {}
    tags = {}
    for p, q in H2_POSITIONS:
        terms = e1_terms(strata, p + q, -p)
        dims[(p, q)] = sum(t[3] for t in terms)
        tags[(p, q)] = " + ".join(f"H^{deg}(Y[{s}])({tw})" for s, deg, tw, _ in terms)
    e2 = None
    if d1 is not None:
        ranks = {}
        for (p, q), mat in d1.items():
            m = to_matrix(mat)
            src, dst = _e1_dim(strata, p, q), _e1_dim(strata, p + 1, q)
            if (m and len(m[0]) != src) or len(m) != dst:
                raise DomainError(f"d1 at ({p},{q}) must be a {dst} x {src} matrix")
            ranks[(p, q)] = rank(m) if m and m[0] else 0
            nxt = d1.get((p + 1, q))
            if nxt is not None and m and to_matrix(nxt) and not is_zero_matrix(matmul(to_matrix(nxt), m)):
                raise DomainError(f"d1 o d1 is not zero at ({p},{q})")
        e2 = {}
        for p, q in H2_POSITIONS:
            e2[(p, q)] = dims[(p, q)] - ranks.get((p, q), 0) - ranks.get((p - 1, q), 0)
    return SteenbrinkE1(dims, tags, e2)


def jump_threshold(k: int, dim_im_N: int | None = None, family: str = "generic") -> int:
    """Additive Picard-rank jump that the height bounds require.

    ``k = 3`` gives 2; ``k = 2`` gives ``dim im N + 1``; for K3 surfaces ``5 - k``,
    where ``k = 2`` additionally needs ``dim im N <= 2``.
    """
    if k not in (2, 3):
        raise DomainError("nilpotency order must be 2 or 3")
    if family not in ("generic", "K3"):
        raise DomainError("family must be 'generic' or 'K3'")
    if family == "K3":
        if k == 2 and dim_im_N is not None and dim_im_N > 2:
            raise DomainError("a K3 degeneration with k = 2 has dim im N <= 2")
        return 5 - k
    if k == 3:
        return 2
    if dim_im_N is None or dim_im_N < 1:
        raise DomainError("k = 2 needs dim im N >= 1")
    return dim_im_N + 1


def jordan_nilpotent(blocks: Sequence[int]) -> Matrix:
    """Block-diagonal nilpotent matrix with Jordan blocks of the given sizes (``N e_{i+1} = e_i``)."""
    n = sum(blocks)
    m = [[Fraction(0)] * n for _ in range(n)]
    start = 0
    for b in blocks:
        for i in range(b - 1):
            m[start + i][start + i + 1] = Fraction(1)
        start += b
    return m


def conjugate(N: Matrix, g: Matrix, g_inv: Matrix) -> Matrix:
    return matmul(matmul(g, N), g_inv)

