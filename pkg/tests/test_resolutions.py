import numpy as np
import pytest

from tateops.errors import ResolutionError, WindowError
from tateops.fplin import Fp
from tateops.groups import ModuleMap, group_catalog
from tateops.resolutions import (
    CompleteResolution,
    ResolutionAsLiftTarget,
    complete_resolution,
    lift_comparison,
    minimal_resolution,
    omega,
    tensor_resolution,
)

F2 = Fp(2)


def test_c2_resolution_is_periodic():
    g = group_catalog("C2")
    res = minimal_resolution(g, F2, 6)
    assert res.ranks == [1] * 7
    for j in range(1, 7):
        assert res.D(j).tolist() == [[1, 1], [1, 1]]


def test_c4_resolution_alternates():
    g = group_catalog("C4")
    res = minimal_resolution(g, F2, 4)
    assert res.ranks == [1] * 5
    # odd differentials have rank 3 (kill the augmentation ideal generator),
    # even ones are the norm of rank 1
    assert F2.rank(res.D(1)) == 3
    assert F2.rank(res.D(2)) == 1
    assert F2.rank(res.D(3)) == 3
    assert res.D(2).tolist() == np.ones((4, 4), dtype=int).tolist()


def test_v4_ranks_grow_linearly():
    g = group_catalog("V4")
    res = minimal_resolution(g, F2, 5)
    assert res.ranks == [1, 2, 3, 4, 5, 6]


def test_d8_ranks_grow_linearly():
    g = group_catalog("D8")
    res = minimal_resolution(g, F2, 4)
    assert res.ranks == [1, 2, 3, 4, 5]


def test_q8_ranks_periodic_with_trivial_fourth_syzygy():
    g = group_catalog("Q8")
    res = minimal_resolution(g, F2, 5)
    assert res.ranks == [1, 2, 2, 1, 1, 2]
    cres = complete_resolution(g, F2, 5, -1, positive_part=minimal_resolution(g, F2, 7))
    om = omega(cres, 4)
    assert om.module.dim == 1
    for gi in range(8):
        assert om.module.action(gi).tolist() == [[1]]


def test_differentials_compose_to_zero_and_land_in_radical():
    g = group_catalog("D8")
    res = minimal_resolution(g, F2, 4)
    for j in range(2, 5):
        assert not np.any(F2.matmul(res.D(j), res.D(j - 1)))
    for j in range(1, 5):
        induced = res.Dgen(j).reshape(res.rank(j), res.rank(j - 1), g.n).sum(axis=2) % 2
        assert not np.any(induced)


def test_positive_homotopy_identities():
    g = group_catalog("V4")
    res = minimal_resolution(g, F2, 6)
    for m in range(1, 5):
        lhs = (F2.matmul(res.h(m), res.D(m + 1)) + F2.matmul(res.D(m), res.h(m - 1))) % 2
        assert np.array_equal(lhs, np.eye(4 * res.rank(m), dtype=np.int64))
    # degree 0: h0 D1 is a projection complementary to pi0
    lhs = (F2.matmul(res.h(0), res.D(1)) + res.pi0) % 2
    assert np.array_equal(lhs, np.eye(4, dtype=np.int64))
    assert res.sigma.sum() % 2 == 1


def test_complete_resolution_window_and_duality():
    g = group_catalog("V4")
    cres = complete_resolution(g, F2, 3, -4)
    assert cres.lo == -6 and cres.hi == 5
    assert cres.rank(-3) == cres.rank(2)
    assert np.array_equal(cres.D(-2), cres.pos.D(2).T)
    assert cres.D(0).tolist() == np.ones((4, 4), dtype=int).tolist()
    with pytest.raises(WindowError):
        cres.D(7)
    for m in range(cres.lo + 2, cres.hi + 1):
        assert not np.any(F2.matmul(cres.D(m), cres.D(m - 1)))
    # differentials are equivariant in both regions (dual action is the
    # same translation permutation on the dual basis)
    for m in (2, 0, -2):
        ModuleMap(cres.P(m), cres.P(m - 1), cres.D(m))


def test_complete_resolution_exact_at_junction():
    g = group_catalog("Q8")
    cres = complete_resolution(g, F2, 2, -2)
    d0 = cres.D(0)
    assert F2.rank(d0) == 1
    assert F2.rank(cres.D(1)) + 1 == cres.dim(0)
    assert F2.rank(cres.D(-1)) + 1 == cres.dim(-1)


def test_complete_homotopy_identities_across_junction():
    g = group_catalog("V4")
    cres = complete_resolution(g, F2, 3, -4)
    for m in range(cres.lo + 2, cres.hi):
        lhs = (F2.matmul(cres.h(m), cres.D(m + 1))
               + F2.matmul(cres.D(m), cres.h(m - 1))) % 2
        assert np.array_equal(lhs, np.eye(cres.dim(m), dtype=np.int64)), m


def test_residual_projections():
    g = group_catalog("C4")
    cres = complete_resolution(g, F2, 3, -3)
    eye0 = np.eye(cres.dim(0), dtype=np.int64)
    assert np.array_equal((F2.matmul(cres.h(0), cres.D(1)) + cres.pi0) % 2, eye0)
    # pi0 is x -> eps(x) sigma
    assert np.array_equal(cres.pi0, F2.matmul(cres.eps, cres.sigma.reshape(1, -1)))
    pn = cres.pi_nu
    nu = np.ones(cres.dim(-1), dtype=np.int64)
    assert F2.rank(pn) == 1
    assert np.array_equal(F2.matmul(nu.reshape(1, -1), pn)[0], nu)
    assert not np.any(F2.matmul(pn, cres.D(-1)))
    assert np.array_equal(F2.matmul(pn, pn), pn)


def test_tensor_resolution_matches_v4():
    c2 = group_catalog("C2")
    r1 = minimal_resolution(c2, F2, 6)
    r2 = minimal_resolution(c2, F2, 6)
    v4 = c2.direct_product(c2)
    tres = tensor_resolution(v4, r1, r2, 5)
    assert tres.ranks == [1, 2, 3, 4, 5, 6]
    assert tres.gen_index[2] == [(0, 0, 0), (1, 0, 0), (2, 0, 0)]
    for j in range(2, 6):
        assert not np.any(F2.matmul(tres.D(j), tres.D(j - 1)))
    # comparison with the generic minimal resolution is an isomorphism
    mres = minimal_resolution(v4, F2, 4)
    comps = lift_comparison(mres, ResolutionAsLiftTarget(tres), 4)
    for j, c in enumerate(comps):
        assert c.shape == (4 * mres.rank(j), 4 * tres.rank(j))
        assert F2.rank(c) == 4 * mres.rank(j)


def test_omega_dimensions_v4():
    g = group_catalog("V4")
    cres = complete_resolution(g, F2, 4, -4)
    for j in range(0, 5):
        assert omega(cres, j).module.dim == 2 * j + 1
    assert omega(cres, -1).module.dim == 3


def test_window_errors():
    g = group_catalog("C2")
    with pytest.raises(ResolutionError):
        complete_resolution(g, Fp(3), 2, -2)
    cres = complete_resolution(g, F2, 2, -2)
    with pytest.raises(WindowError):
        cres.h(cres.hi)
    with pytest.raises(WindowError):
        cres.rank(cres.lo - 1)


def test_export_json(tmp_path):
    import json

    g = group_catalog("C2")
    cres = complete_resolution(g, F2, 1, -1)
    path = tmp_path / "win.json"
    cres.export_json(path)
    data = json.loads(path.read_text())
    assert data["p"] == 2 and data["order"] == 2
    assert data["ranks"]["0"] == 1
    assert data["differentials"]["1"] == [[1, 1], [1, 1]]
