"""Finite-complex representations of negative classes and the lift calculus."""

import numpy as np
import pytest

from tateops.chainops import ChainOps
from tateops.errors import ClassError, ModuleError, SolveError, WindowError
from tateops.groups import FreeKG
from tateops.kcalc import (
    KCalc,
    KComplex,
    dual_tail_complex,
    extension_of_character,
    h_minus_one_coefficient,
    interpretqi_complex,
    norm_complex,
    splice,
)
from tateops.ring import get_ring


@pytest.fixture(scope="module")
def c2k():
    return KCalc(get_ring("C2", 6, -8))


@pytest.fixture(scope="module")
def c4k():
    return KCalc(get_ring("C4", 6, -8))


@pytest.fixture(scope="module")
def v4k():
    return KCalc(get_ring("V4", 5, -6))


@pytest.fixture(scope="module")
def q8k():
    return KCalc(get_ring("Q8", 6, -6))


def random_auto(group, field, rank, rng):
    """A random invertible equivariant self-map of a rank-r free module."""
    free = FreeKG(group, field, rank)
    while True:
        gen = rng.integers(0, field.p, (rank, rank * group.n))
        full = free.extend_from_generators(gen, free)
        if field.rank(full) == rank * group.n:
            return full


def conjugate(comp, rng):
    # transport the complex along random basis changes of every middle;
    # the represented class must not move
    f = comp.field
    gn = comp.group.n
    mats = [random_auto(comp.group, f, r, rng) for r in comp.ranks]
    invs = [f.inv(m) for m in mats]
    a_full = f.matmul(np.repeat(comp.a, gn).reshape(1, -1), invs[0])[0]
    a_new = a_full[np.arange(comp.ranks[0]) * gn]
    mids = [f.matmul(f.matmul(mats[t], comp.mids[t]), invs[t + 1])
            for t in range(len(comp.mids))]
    b_new = f.matmul(mats[-1], comp.bcol())[np.arange(comp.ranks[-1]) * gn, 0]
    return KComplex(comp.group, f, a_new, mids, comp.ranks, b_new)


class TestNormComplex:
    @pytest.mark.parametrize("fix", ["c2k", "c4k", "v4k", "q8k"])
    def test_represents_the_degree_minus_one_generator(self, fix, request):
        k = request.getfixturevalue(fix)
        comp = norm_complex(k.group, k.field)
        comp.validate()
        assert k.psi(comp) == k.ring.tau

    def test_zero_top_map_gives_zero(self, c2k):
        comp = norm_complex(c2k.group, c2k.field)
        comp.a = np.zeros(1, dtype=np.int64)
        comp.validate()
        assert c2k.psi(comp).is_zero()


class TestRoundTrip:
    def test_phi_of_tau_is_the_norm_complex(self, c2k):
        comp = c2k.phi(c2k.ring.tau)
        assert comp.length == 1
        assert comp.ranks == [1]
        assert comp.a.tolist() == [1]
        assert comp.b.tolist() == [1]

    @pytest.mark.parametrize("fix", ["c2k", "c4k", "v4k", "q8k"])
    def test_psi_inverts_phi(self, fix, request):
        k = request.getfixturevalue(fix)
        ring = k.ring
        rng = np.random.default_rng(11)
        for degree in range(-1, -6, -1):
            for _ in range(3):
                vec = rng.integers(0, 2, ring.rank(degree))
                x = ring.cls(degree, vec)
                comp = k.phi(x)
                comp.validate()
                assert k.psi(comp) == x, degree

    def test_phi_of_zero_represents_zero(self, v4k):
        comp = v4k.phi(v4k.ring.zero(-3))
        assert not comp.a.any()
        assert v4k.psi(comp).is_zero()

    def test_phi_rejects_nonnegative_degrees(self, c2k):
        with pytest.raises(ClassError):
            c2k.phi(c2k.ring.cls(0, [1]))
        with pytest.raises(ClassError):
            c2k.phi(c2k.ring.named["s"])


class TestSplice:
    def test_two_norm_complexes_give_the_squared_generator(self, c2k):
        nc = norm_complex(c2k.group, c2k.field)
        comp = splice(nc, nc)
        comp.validate()
        tau = c2k.ring.tau
        assert c2k.psi(comp) == tau * tau
        assert c2k.psi(comp) == c2k.ring.cls(-2, [1])

    @pytest.mark.parametrize("fix", ["c2k", "v4k", "q8k"])
    def test_matches_cup_product(self, fix, request):
        k = request.getfixturevalue(fix)
        ring = k.ring
        rng = np.random.default_rng(23)
        for d1 in (-1, -2, -3):
            for d2 in (-1, -2):
                x1 = ring.cls(d1, rng.integers(0, 2, ring.rank(d1)))
                x2 = ring.cls(d2, rng.integers(0, 2, ring.rank(d2)))
                comp = splice(k.phi(x1), k.phi(x2))
                comp.validate()
                assert k.psi(comp) == x1 * x2, (d1, d2)

    def test_associative_on_classes(self, v4k):
        ring = v4k.ring
        rng = np.random.default_rng(5)
        parts = [v4k.phi(ring.cls(-2, rng.integers(0, 2, ring.rank(-2))))
                 for _ in range(2)]
        parts.append(v4k.phi(ring.tau))
        left = splice(splice(parts[0], parts[1]), parts[2])
        right = splice(parts[0], splice(parts[1], parts[2]))
        assert v4k.psi(left) == v4k.psi(right)

    def test_group_mismatch(self, c2k, v4k):
        with pytest.raises(ModuleError):
            splice(norm_complex(c2k.group, c2k.field),
                   norm_complex(v4k.group, v4k.field))


class TestInterpretQi:
    def test_c2_first_operation_squares_the_generator(self, c2k):
        comp = interpretqi_complex(c2k.group, c2k.field, 1)
        comp.validate()
        assert c2k.psi(comp) == c2k.ring.cls(-2, [1])

    def test_v4_first_operation_vanishes(self, v4k):
        comp = interpretqi_complex(v4k.group, v4k.field, 1)
        assert v4k.psi(comp).is_zero()

    def test_v4_second_operation_hits_the_corner_dual(self, v4k):
        comp = interpretqi_complex(v4k.group, v4k.field, 2)
        assert v4k.psi(comp) == v4k.ring.phi(1, 1)

    @pytest.mark.parametrize("fix", ["c2k", "c4k", "v4k", "q8k"])
    def test_index_zero_represents_zero(self, fix, request):
        # the sum over the group of the last map is |G| = 0 mod 2, matching
        # the vanishing bound on the degree -1 generator at s = 0
        k = request.getfixturevalue(fix)
        comp = interpretqi_complex(k.group, k.field, 0)
        comp.validate()
        assert k.psi(comp).is_zero()

    @pytest.mark.parametrize("fix", ["c2k", "c4k", "v4k"])
    def test_matches_chain_engine(self, fix, request):
        k = request.getfixturevalue(fix)
        ops = ChainOps(k.ring)
        tau = k.ring.tau
        for i in range(5):
            comp = interpretqi_complex(k.group, k.field, i)
            assert k.psi(comp) == ops.q_c(tau, i), i

    def test_negative_index_rejected(self, c2k):
        with pytest.raises(ClassError):
            interpretqi_complex(c2k.group, c2k.field, -1)


class TestHMinusOne:
    @pytest.mark.parametrize("fix", ["c2k", "v4k", "q8k"])
    def test_all_augmentations_sum_to_zero(self, fix, request):
        k = request.getfixturevalue(fix)
        alpha = np.ones(k.group.n, dtype=np.int64)
        assert h_minus_one_coefficient(k.group, k.field, alpha) == 0

    def test_identity_indicator_gives_one(self, c2k):
        alpha = np.zeros(2, dtype=np.int64)
        alpha[0] = 1
        assert h_minus_one_coefficient(c2k.group, c2k.field, alpha) == 1
        comp = KComplex(c2k.group, c2k.field, np.ones(2, dtype=np.int64),
                        [], [2], alpha)
        comp.validate()
        assert c2k.psi(comp) == c2k.ring.tau

    def test_matches_psi_of_the_length_one_complex(self, v4k):
        rng = np.random.default_rng(7)
        gn = v4k.group.n
        for _ in range(4):
            alpha = rng.integers(0, 2, gn)
            coeff = h_minus_one_coefficient(v4k.group, v4k.field, alpha)
            comp = KComplex(v4k.group, v4k.field,
                            np.ones(gn, dtype=np.int64), [], [gn], alpha)
            want = v4k.ring.tau if coeff else v4k.ring.zero(-1)
            assert v4k.psi(comp) == want

    def test_wrong_length_rejected(self, c2k):
        with pytest.raises(ModuleError):
            h_minus_one_coefficient(c2k.group, c2k.field, [1, 0, 1])


class TestDualTail:
    @pytest.mark.parametrize("fix", ["c2k", "v4k", "q8k"])
    def test_recovers_ring_coordinates(self, fix, request):
        k = request.getfixturevalue(fix)
        ring = k.ring
        rng = np.random.default_rng(31)
        for j in range(4):
            lam = rng.integers(0, 2, ring.rank(j))
            comp = dual_tail_complex(ring, j, lam)
            comp.validate()
            assert k.psi(comp) == ring.cls(-1 - j, lam), j

    def test_far_out_tail_rejected(self, c2k):
        with pytest.raises(WindowError):
            dual_tail_complex(c2k.ring, 40, [1])


class TestCanonicalMorphism:
    def check_morphism(self, k, comp, target, thetas):
        f = k.field
        gn = k.group.n
        n = comp.length
        assert len(thetas) == n
        assert np.array_equal(f.matmul(thetas[0], k.pos.eps), comp.bcol())
        for j in range(1, n):
            lhs = f.matmul(comp.mids[n - 1 - j], thetas[j - 1])
            rhs = f.matmul(thetas[j], k.pos.D(j))
            assert np.array_equal(lhs, rhs), j
        top = np.repeat(comp.a, gn).reshape(1, -1)
        pushed = f.matmul(top, thetas[-1])[0]
        assert np.array_equal(pushed, np.repeat(target.a, gn))

    def test_components_commute_with_the_differentials(self, v4k):
        rng = np.random.default_rng(13)
        vec = rng.integers(0, 2, v4k.ring.rank(-3))
        comp = v4k.phi(v4k.ring.cls(-3, vec))
        target, thetas = v4k.canonical_morphism(comp)
        self.check_morphism(v4k, comp, target, thetas)

    def test_components_commute_on_the_swap_complex(self, c4k):
        comp = interpretqi_complex(c4k.group, c4k.field, 2)
        target, thetas = c4k.canonical_morphism(comp)
        self.check_morphism(c4k, comp, target, thetas)
        assert c4k.psi(target) == c4k.psi(comp)

    @pytest.mark.parametrize("fix,seed", [("c2k", 3), ("v4k", 17), ("q8k", 29)])
    def test_conjugated_complex_keeps_its_class(self, fix, seed, request):
        k = request.getfixturevalue(fix)
        ring = k.ring
        rng = np.random.default_rng(seed)
        for degree in (-2, -3):
            vec = rng.integers(0, 2, ring.rank(degree))
            comp = k.phi(ring.cls(degree, vec))
            moved = conjugate(comp, rng)
            moved.validate()
            assert k.psi(moved) == k.psi(comp), degree
            target, thetas = k.canonical_morphism(moved)
            self.check_morphism(k, moved, target, thetas)


class TestComposeWithExtension:
    def test_c2_character_of_the_polynomial_generator(self, c2k):
        chi = c2k.character_of_degree_one(c2k.ring.named["s"])
        assert chi.tolist() == [0, 1]

    def test_c2_shortening_multiplies_by_the_generator(self, c2k):
        ring = c2k.ring
        chi = c2k.character_of_degree_one(ring.named["s"])
        ext = extension_of_character(c2k.group, c2k.field, chi)
        comp = c2k.phi(ring.cls(-2, [1]))
        shorter = c2k.compose_with_extension(comp, ext)
        shorter.validate()
        assert shorter.length == 1
        assert c2k.psi(shorter) == ring.tau

    def test_v4_shortening_matches_the_cup_product(self, v4k):
        ring = v4k.ring
        f10 = ring.phi(1, 0)
        comp = v4k.phi(f10)
        for name in ("x", "y"):
            cls1 = ring.named[name]
            chi = v4k.character_of_degree_one(cls1)
            assert chi[0] == 0
            assert int(chi.sum()) == 2
            ext = extension_of_character(v4k.group, v4k.field, chi)
            shorter = v4k.compose_with_extension(comp, ext)
            shorter.validate()
            assert v4k.psi(shorter) == f10 * cls1, name

    def test_v4_general_products(self, v4k):
        ring = v4k.ring
        rng = np.random.default_rng(41)
        chi_x = v4k.character_of_degree_one(ring.named["x"])
        ext = extension_of_character(v4k.group, v4k.field, chi_x)
        for degree in (-2, -3, -4):
            vec = rng.integers(0, 2, ring.rank(degree))
            x = ring.cls(degree, vec)
            shorter = v4k.compose_with_extension(v4k.phi(x), ext)
            assert v4k.psi(shorter) == x * ring.named["x"], degree

    def test_needs_at_least_two_middles(self, c2k):
        ext = extension_of_character(c2k.group, c2k.field, [0, 1])
        with pytest.raises(ModuleError):
            c2k.compose_with_extension(norm_complex(c2k.group, c2k.field), ext)

    def test_character_must_be_a_homomorphism(self, v4k):
        with pytest.raises(ModuleError):
            extension_of_character(v4k.group, v4k.field,
                                   np.ones(v4k.group.n, dtype=np.int64))

    def test_character_needs_degree_one(self, c2k):
        with pytest.raises(ClassError):
            c2k.character_of_degree_one(c2k.ring.tau)


class TestValidation:
    def test_shape_mismatch(self, c2k):
        comp = norm_complex(c2k.group, c2k.field)
        comp.b = np.ones(2, dtype=np.int64)
        with pytest.raises(ModuleError):
            comp.validate()

    def test_non_equivariant_middle(self, c2k):
        bad = np.zeros((2, 2), dtype=np.int64)
        bad[0, 0] = 1
        comp = KComplex(c2k.group, c2k.field, [1], [bad], [1, 1], [1])
        with pytest.raises(ModuleError):
            comp.validate()

    def test_nonzero_composite(self, c2k):
        comp = KComplex(c2k.group, c2k.field, [1],
                        [np.eye(2, dtype=np.int64)], [1, 1], [1])
        with pytest.raises(ModuleError):
            comp.validate()

    def test_lift_failure_signals_non_complex(self, c2k):
        comp = KComplex(c2k.group, c2k.field, [1],
                        [np.eye(2, dtype=np.int64)], [1, 1], [1])
        with pytest.raises(SolveError):
            c2k.psi(comp)

    def test_window_guard(self, c2k):
        lam = np.ones(c2k.ring.rank(7), dtype=np.int64)
        comp = dual_tail_complex(c2k.ring, 7, lam)
        with pytest.raises(WindowError):
            c2k.psi(comp)
