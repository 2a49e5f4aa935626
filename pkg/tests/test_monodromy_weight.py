import random
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adelikit.exact_arith import DomainError
from adelikit.linalg import Subspace, column_space, identity
from adelikit.monodromy_weight import (
    NilpotentOperator,
    StrataData,
    check_filtration,
    closed_form_filtration,
    conjugate,
    jordan_nilpotent,
    jump_threshold,
    nilpotency_order,
    steenbrink_e1,
    weight_filtration,
)

from conftest import random_invertible, random_nilpotent, random_strata


def span(n, *vectors):
    return column_space([[v[i] for v in vectors] for i in range(n)]) if vectors else Subspace(n)


def e(n, i):
    return [1 if j == i else 0 for j in range(n)]


def test_nilpotency_order_examples():
    assert nilpotency_order(NilpotentOperator([[0, 0], [0, 0]])) == 1
    assert nilpotency_order(NilpotentOperator(jordan_nilpotent([2]))) == 2
    assert nilpotency_order(NilpotentOperator(jordan_nilpotent([3]))) == 3
    with pytest.warns(UserWarning):
        nilpotency_order(NilpotentOperator(jordan_nilpotent([4])))
    with pytest.raises(DomainError):
        NilpotentOperator([[1, 0], [0, 0]])


def test_weight_filtration_examples():
    W = weight_filtration(NilpotentOperator([[0, 1], [0, 0]]))
    assert W[0].dim == 0
    assert W[1] == span(2, e(2, 0)) and W[2] == span(2, e(2, 0))
    assert W[3].dim == 2 and W[4].dim == 2
    W = weight_filtration(NilpotentOperator(jordan_nilpotent([3])))
    assert W[0] == W[1] == span(3, e(3, 0))
    assert W[2] == W[3] == span(3, e(3, 0), e(3, 1))
    assert W[4].dim == 3
    assert W.graded_dims == (1, 0, 1, 0, 1)
    W = weight_filtration(NilpotentOperator([[0, 0], [0, 0]]))
    assert W[1].dim == 0 and W[2].dim == 2


def test_weight_filtration_order_too_large():
    with pytest.raises(DomainError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            weight_filtration(NilpotentOperator(jordan_nilpotent([4])))
    W = weight_filtration(NilpotentOperator(jordan_nilpotent([4]), w=3))
    assert W.graded_dims == (1, 0, 1, 0, 1, 0, 1)


def test_filtration_properties_on_random_operators():
    rng = random.Random(10)
    for _ in range(30):
        N, blocks, _ = random_nilpotent(rng)
        op = NilpotentOperator(N)
        W = weight_filtration(op)
        assert check_filtration(op, W) == []
        closed = closed_form_filtration(op)
        assert all(W[r] == closed[r] for r in range(5))


def test_higher_weight_window():
    rng = random.Random(12)
    for _ in range(10):
        N, blocks, _ = random_nilpotent(rng, n_max=8, max_block=5)
        op = NilpotentOperator(N, w=4)
        assert check_filtration(op, weight_filtration(op)) == []


def test_graded_dims_from_jordan_type():
    # a block of size b contributes one dimension in weights w-b+1, w-b+3, .., w+b-1
    rng = random.Random(13)
    for _ in range(20):
        N, blocks, _ = random_nilpotent(rng)
        expect = [0] * 5
        for b in blocks:
            for t in range(b):
                expect[2 - b + 1 + 2 * t] += 1
        assert weight_filtration(NilpotentOperator(N)).graded_dims == tuple(expect)


@given(st.integers(0, 10**6))
def test_transport_under_conjugation(seed):
    rng = random.Random(seed)
    N, _, _ = random_nilpotent(rng, n_max=6)
    g, g_inv = random_invertible(rng, len(N))
    W = weight_filtration(NilpotentOperator(N))
    Wc = weight_filtration(NilpotentOperator(conjugate(N, g, g_inv)))
    moved = W.transport(g)
    assert all(moved[r] == Wc[r] for r in range(5))


def test_steenbrink_examples():
    tetra = StrataData(((1, 0, 1),) * 4, ((1, 0),) * 6, 4)
    assert steenbrink_e1(tetra).as_tuple() == (4, 0, 8, 0, 4)
    smooth = StrataData(((1, 0, 22),))
    assert steenbrink_e1(smooth).as_tuple() == (0, 0, 22, 0, 0)
    chain = StrataData(((1, 0, 10), (1, 0, 10), (1, 0, 10)), ((1, 2), (1, 2)), 0)
    out = steenbrink_e1(chain)
    assert out.dims[(1, 1)] == out.dims[(-1, 3)] == 4
    assert out.dims[(2, 0)] == out.dims[(-2, 4)] == 0


def test_steenbrink_from_json_and_validation():
    data = {"components": [{"h0": 1, "h1": 0, "h2": 1}] * 4, "double_curves": [{"h0": 1, "h1": 0}] * 6, "triple_points": 4}
    assert steenbrink_e1(StrataData.from_json(data)).as_tuple() == (4, 0, 8, 0, 4)
    with pytest.raises(DomainError):
        StrataData(((1, -1, 0),))


def test_steenbrink_e2_from_d1():
    # with every d1 map zero the E2 page equals E1
    strata = StrataData(((1, 0, 1), (1, 0, 1)), ((1, 0),), 0)
    out = steenbrink_e1(strata, d1={})
    assert out.e2 == out.dims
    with pytest.raises(DomainError):
        steenbrink_e1(strata, d1={(0, 2): [[1, 2, 3]]})


def test_e1_symmetry_random():
    rng = random.Random(14)
    for _ in range(50):
        t = steenbrink_e1(random_strata(rng)).as_tuple()
        assert t[0] == t[4] and t[1] == t[3]


def test_jump_threshold_examples():
    assert jump_threshold(3) == 2
    assert jump_threshold(2, 2) == 3
    assert jump_threshold(2, family="K3") == 3
    assert jump_threshold(3, family="K3") == 2
    with pytest.raises(DomainError):
        jump_threshold(4)
    with pytest.raises(DomainError):
        jump_threshold(2, 3, family="K3")
    with pytest.raises(DomainError):
        jump_threshold(2)
