import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tateops.errors import SolveError
from tateops.fplin import Fp, _rref_f2_packed, is_prime


F2 = Fp(2)
F3 = Fp(3)


def test_prime_check():
    assert is_prime(2) and is_prime(3) and is_prime(7)
    assert not is_prime(1) and not is_prime(9)
    with pytest.raises(ValueError):
        Fp(4)


def test_rref_rank_one():
    d = F2.rref_decompose([[1, 1], [1, 1]])
    assert d.rank == 1
    assert d.pivots == (0,)
    assert d.r[:1].tolist() == [[1, 1]]
    assert np.array_equal(F2.matmul(d.t, [[1, 1], [1, 1]]), d.r)


def test_rref_identity():
    d = F2.rref_decompose(np.eye(3, dtype=int))
    assert d.rank == 3
    assert d.pivots == (0, 1, 2)


def test_rref_mod3_scaling():
    d = F3.rref_decompose([[2, 1], [0, 2]])
    # pivots normalized to 1
    assert d.r.tolist() == [[1, 0], [0, 1]]
    assert np.array_equal(F3.matmul(d.t, [[2, 1], [0, 2]]), d.r)


def test_solve_linear_with_kernel():
    a = [[1, 1], [1, 1]]
    x, k = F2.solve_linear(a, [[1], [1]])
    assert np.array_equal(F2.matmul(a, x), np.array([[1], [1]]))
    assert k.shape[0] == 1
    assert np.array_equal(F2.matmul(a, k.T), np.zeros((2, 1), int))


def test_solve_linear_no_solution():
    x, k = F2.solve_linear([[1, 1], [1, 1]], [[1], [0]], required=False)
    assert x is None
    assert k.shape[0] == 1
    with pytest.raises(SolveError):
        F2.solve_linear([[1, 1], [1, 1]], [[1], [0]])


def test_solve_xa_vector():
    x = F2.solve_xa([[1, 1], [0, 1]], [1, 0])
    assert np.array_equal(F2.matmul(x, [[1, 1], [0, 1]]), np.array([1, 0]))


def test_kronecker_all_ones():
    ones = np.ones((2, 2), int)
    assert np.array_equal(F2.kronecker(ones, ones), np.ones((4, 4), int))


def test_kronecker_mixed_product():
    a = F2.asmat(np.arange(4).reshape(2, 2))
    b = F2.asmat(np.arange(4, 8).reshape(2, 2))
    c = F2.asmat(np.arange(3, 7).reshape(2, 2))
    d = F2.asmat(np.arange(5, 9).reshape(2, 2))
    lhs = F2.matmul(F2.kronecker(a, b), F2.kronecker(c, d))
    rhs = F2.kronecker(F2.matmul(a, c), F2.matmul(b, d))
    assert np.array_equal(lhs, rhs)


def test_inv():
    a = [[1, 1], [0, 1]]
    ainv = F2.inv(a)
    assert np.array_equal(F2.matmul(ainv, a), np.eye(2, dtype=int))
    with pytest.raises(SolveError):
        F2.inv([[1, 1], [1, 1]])


def test_packed_matches_generic():
    rng = np.random.default_rng(7)
    a = rng.integers(0, 2, size=(60, 90))
    slow = F2._rref_generic(F2.asmat(a))
    fast = _rref_f2_packed(F2.asmat(a))
    assert slow.pivots == fast.pivots
    assert np.array_equal(slow.r, fast.r)
    assert np.array_equal(slow.t, fast.t)


@st.composite
def f2_matrix(draw):
    m = draw(st.integers(1, 8))
    n = draw(st.integers(1, 8))
    data = draw(st.lists(st.integers(0, 1), min_size=m * n, max_size=m * n))
    return np.array(data, dtype=np.int64).reshape(m, n)


@settings(max_examples=60, deadline=None)
@given(f2_matrix())
def test_rref_properties(a):
    d = F2.rref_decompose(a)
    assert np.array_equal(F2.matmul(d.t, a), d.r)
    assert d.rank == F2.rank(a.T)
    # t is invertible
    assert F2.rank(d.t) == a.shape[0]


@settings(max_examples=60, deadline=None)
@given(f2_matrix())
def test_solve_roundtrip(a):
    b = F2.matmul(np.ones((1, a.shape[0]), int), a)
    x = F2.solve_xa(a, b)
    assert np.array_equal(F2.matmul(x, a), b)
