"""Ring structure tests against known cohomology rings."""

import numpy as np
import pytest

from tateops.errors import WindowError
from tateops.fplin import Fp
from tateops.ring import TateRing, get_ring

F2 = Fp(2)


@pytest.fixture(scope="module")
def c2():
    return get_ring("C2", 4, -6)


@pytest.fixture(scope="module")
def c4():
    return get_ring("C4", 4, -6)


@pytest.fixture(scope="module")
def v4():
    return get_ring("V4", 4, -6)


@pytest.fixture(scope="module")
def d8():
    return get_ring("D8", 4, -6)


@pytest.fixture(scope="module")
def q8():
    return get_ring("Q8", 4, -6)


class TestC2:
    def test_all_degrees_one_dimensional(self, c2):
        for m in range(-6, 5):
            assert c2.rank(m) == 1

    def test_full_multiplication_table(self, c2):
        # the ring is F2[s, s^-1]: every product of basis classes is the
        # basis class, in every degree combination the window supports
        for i in range(-5, 5):
            for j in range(-5, 5):
                if not -6 <= i + j <= 4:
                    continue
                prod = c2.cup(c2.basis(i)[0], c2.basis(j)[0])
                assert prod.vec.tolist() == [1], (i, j)

    def test_unit(self, c2):
        for m in range(-5, 4):
            a = c2.basis(m)[0]
            assert c2.cup(c2.one, a) == a
            assert c2.cup(a, c2.one) == a

    def test_pairings_perfect(self, c2):
        for m in range(-5, 4):
            assert c2.pairing_matrix(m).tolist() == [[1]]


class TestC4:
    def test_ranks(self, c4):
        for m in range(-6, 5):
            assert c4.rank(m) == 1

    def test_exterior_times_polynomial(self, c4):
        u, s = c4.named["u"], c4.named["s"]
        assert c4.cup(u, u).is_zero()
        assert c4.cup(u, s).vec.tolist() == [1]
        assert c4.cup(s, s).vec.tolist() == [1]

    def test_negative_module_structure(self, c4):
        u, s = c4.named["u"], c4.named["s"]
        # odd negative degrees carry u s^-k, so multiplying by u kills them
        # and multiplying even degrees by u does not
        for m in (-1, -3, -5):
            assert c4.cup(c4.basis(m)[0], u).is_zero()
        for m in (-2, -4, -6):
            prod = c4.cup(c4.basis(m)[0], u)
            assert prod.vec.tolist() == [1]
        for m in range(-6, 3):
            assert c4.cup(c4.basis(m)[0], s).vec.tolist() == [1]

    def test_pairings_perfect(self, c4):
        for m in range(-5, 4):
            assert c4.pairing_matrix(m).tolist() == [[1]]


class TestV4:
    def test_polynomial_basis_positions(self, v4):
        # monomial x^a y^b sits at the tensor generator with first factor
        # degree a; check the whole multiplication through degree four
        x, y = v4.named["x"], v4.named["y"]
        for a in range(5):
            for b in range(5 - a):
                mono = v4.cup(x ** a, y ** b)
                expect = np.zeros(a + b + 1, dtype=np.int64)
                expect[v4.cres.pos.gen_index[a + b].index((a, 0, 0))] = 1
                assert mono.vec.tolist() == expect.tolist(), (a, b)

    def test_negative_products_vanish(self, v4):
        for i in range(3):
            for j in range(3 - i):
                for k in range(3):
                    for l in range(3 - k):
                        p = v4.cup(v4.phi(i, j), v4.phi(k, l))
                        assert p.is_zero(), (i, j, k, l)

    def test_module_structure(self, v4):
        x, y = v4.named["x"], v4.named["y"]
        for i in range(3):
            for j in range(3):
                ph = v4.phi(i, j)
                px = v4.cup(x, ph)
                py = v4.cup(y, ph)
                assert px == (v4.phi(i - 1, j) if i else v4.zero(-i - j))
                assert py == (v4.phi(i, j - 1) if j else v4.zero(-i - j))

    def test_pairing_matrices_identity(self, v4):
        for m in range(-4, 4):
            pm = v4.pairing_matrix(m)
            assert np.array_equal(pm, np.eye(len(pm), dtype=np.int64)), m

    def test_dimensions(self, v4):
        for n in range(6):
            assert v4.rank(-1 - n) == n + 1


class TestD8:
    def test_labels(self, d8):
        a, b, c = d8.named["a"], d8.named["b"], d8.named["c"]
        assert d8.cup(a, b).is_zero()
        assert not d8.cup(a, a).is_zero()
        assert not d8.cup(b, b).is_zero()
        span = np.stack([d8.cup(a, a).vec, d8.cup(b, b).vec, c.vec])
        assert F2.rank(span) == 3

    def test_positive_monomials_span(self, d8):
        a, b, c = d8.named["a"], d8.named["b"], d8.named["c"]
        m3 = np.stack([(a ** 3).vec, (b ** 3).vec,
                       d8.cup(a, c).vec, d8.cup(b, c).vec])
        assert F2.rank(m3) == d8.rank(3) == 4
        m4 = np.stack([(a ** 4).vec, (b ** 4).vec, d8.cup(a ** 2, c).vec,
                       d8.cup(b ** 2, c).vec, d8.cup(c, c).vec])
        assert F2.rank(m4) == d8.rank(4) == 5

    def test_negative_products_vanish(self, d8):
        neg = d8.basis(-1) + d8.basis(-2) + d8.basis(-3)
        for u in neg:
            for v in neg:
                if u.degree + v.degree >= -6:
                    assert d8.cup(u, v).is_zero()

    def test_pairings_perfect(self, d8):
        for m in range(-4, 4):
            pm = d8.pairing_matrix(m)
            assert F2.rank(pm) == len(pm)

    def test_negative_ranks(self, d8):
        for j in range(6):
            assert d8.rank(-1 - j) == j + 1

    def test_dual_module_structure(self, d8):
        # c phi_{ac} = phi_a and a phi_{ac} = phi_c in the dual basis of
        # the monomial basis {a^i c^j, b^i c^j}
        a, b, c = d8.named["a"], d8.named["b"], d8.named["c"]
        mono3 = [a ** 3, d8.cup(a, c), b ** 3, d8.cup(b, c)]
        mono1 = [a, b]
        mono2 = [a ** 2, b ** 2, c]

        def dual(monos, idx):
            deg = monos[0].degree
            pm = np.stack([[d8.pairing(y, z) for z in d8.basis(-1 - deg)]
                           for y in monos])
            rhs = np.zeros(len(monos), dtype=np.int64)
            rhs[idx] = 1
            return d8.cls(-1 - deg, F2.solve_xa(pm.T, rhs))

        phi_ac = dual(mono3, 1)
        phi_a = dual(mono1, 0)
        phi_c = dual(mono2, 2)
        assert d8.cup(c, phi_ac) == phi_a
        assert d8.cup(a, phi_ac) == phi_c
        assert d8.cup(b, phi_ac).is_zero()


class TestQ8:
    def test_ring_relations(self, q8):
        x, y = q8.named["x"], q8.named["y"]
        rel = q8.cup(x, x) + q8.cup(x, y) + q8.cup(y, y)
        assert rel.is_zero()
        assert (x ** 3).is_zero()
        assert (y ** 3).is_zero()
        assert F2.rank(np.stack([q8.cup(x, x).vec, q8.cup(x, y).vec])) == 2

    def test_periodicity_class(self, q8):
        s = q8.named["s"]
        assert s.degree == 4 and q8.rank(4) == 1
        # multiplication by s is an isomorphism in every degree
        for m in range(-6, 1):
            mat = np.stack([q8.cup(s, v).vec for v in q8.basis(m)])
            assert F2.rank(mat) == q8.rank(m), m

    def test_ranks_period_four(self, q8):
        pattern = {0: 1, 1: 2, 2: 2, 3: 1}
        for m in range(-6, 5):
            assert q8.rank(m) == pattern[m % 4], m

    def test_pairings_perfect(self, q8):
        for m in range(-4, 4):
            pm = q8.pairing_matrix(m)
            assert F2.rank(pm) == len(pm)


class TestWindowSafety:
    def test_out_of_range_product_raises(self, c2):
        deep = c2.basis(-5)[0]
        with pytest.raises(WindowError):
            c2.cup(deep, deep)

    def test_odd_prime_rejected(self):
        with pytest.raises(Exception):
            TateRing("C3", 2, -2, field=Fp(3))

    def test_window_independence(self):
        # the same products computed in a larger window agree
        small = get_ring("V4", 3, -5)
        big = get_ring("V4", 5, -8)
        x_s, y_s = small.named["x"], small.named["y"]
        x_b, y_b = big.named["x"], big.named["y"]
        assert small.cup(x_s, y_s).vec.tolist() == big.cup(x_b, y_b).vec.tolist()
        assert small.cup(x_s, small.phi(1, 1)).vec.tolist() == \
            big.cup(x_b, big.phi(1, 1)).vec.tolist()
        assert small.pairing_matrix(-3).tolist() == big.pairing_matrix(-3).tolist()
