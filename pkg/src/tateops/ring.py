"""Tate cohomology rings of small p-groups, with products from a diagonal.

Classes in degree m are equivariant functionals on P_m of a complete
resolution; by minimality these are exactly the generator-value vectors, a
coboundary of an equivariant functional vanishes on generators, and products
can be read off directly: (a.b)(x) = (a (x) b)(Delta(x)) where Delta is a
chain map P -> P (x) P lifting the identity of k.

Delta is built blockwise on a window: a layered seed at degree 0 whose
defect is pushed to the window edge, a transfer solve at the junction, homotopy
lifts upward, and a dualized lift downward.  Each block carries a validity
flag; products read only validated blocks and raise WindowError otherwise, so
a too-small window fails loudly instead of silently returning garbage.
"""

from __future__ import annotations

import numpy as np

from .blocks import PositiveAsWindow, TensorWindow
from .errors import ClassError, ResolutionError, WindowError
from .fplin import Fp
from .groups import FreeKG, GroupTable, group_catalog
from .resolutions import (
    CompleteResolution,
    PositiveResolution,
    complete_resolution,
    minimal_resolution,
    tensor_resolution,
)


class TateClass:
    """A cohomology class, stored as its generator-value vector."""

    def __init__(self, ring: "TateRing", degree: int, vec):
        self.ring = ring
        self.degree = degree
        self.vec = np.asarray(vec, dtype=np.int64) % ring.field.p
        if self.vec.shape != (ring.rank(degree),):
            raise ClassError(f"expected {ring.rank(degree)} coordinates in degree {degree}")

    def is_zero(self) -> bool:
        return not np.any(self.vec)

    def full(self) -> np.ndarray:
        """Functional values on all of P_degree (constant on translates)."""
        return np.repeat(self.vec, self.ring.group.n)

    def __add__(self, other: "TateClass") -> "TateClass":
        if other.degree != self.degree:
            raise ClassError("cannot add classes of different degrees")
        return TateClass(self.ring, self.degree, self.vec + other.vec)

    def __mul__(self, other: "TateClass") -> "TateClass":
        return self.ring.cup(self, other)

    def __pow__(self, k: int) -> "TateClass":
        if k < 0:
            raise ClassError("negative powers are not defined; use a named negative class")
        out = self.ring.one
        for _ in range(k):
            out = self.ring.cup(out, self)
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, TateClass) and other.degree == self.degree
                and np.array_equal(other.vec, self.vec))

    def __hash__(self):
        return hash((self.degree, self.vec.tobytes()))

    def __repr__(self):
        return f"TateClass(deg={self.degree}, vec={self.vec.tolist()})"


class Diagonal:
    """Blockwise chain map Delta: P -> P (x) P lifting the identity of k.

    maps[m] holds the generator rows of Delta at source degree m, blockwise;
    valid[m] is the set of blocks whose defining squares were verified, the
    only ones read() will serve.  Positive-only mode (lo == 0) skips the
    junction and negative descent and uses the two-sided positive homotopy.
    """

    def __init__(self, win: TensorWindow, mbot: int, mtop: int, kappa: int = 0,
                 cap: int | None = None):
        self.win = win
        self.res = win.res
        self.field = win.field
        self.mbot = mbot
        self.mtop = mtop
        self.cap = cap
        # with a cap, the junction solve must still cover every kept block of
        # degree -1, and those reach one step past the cap on one side
        self.kappa = kappa if cap is None else min(kappa, cap + 1)
        self.maps: dict[int, dict] = {}
        self.valid: dict[int, set] = {}
        self.demoted: list = []
        # chain-square components that failed numeric verification, as
        # (degree, block) pairs; consumers enforce a safety zone against this
        self.failures: list = []
        self.positive_only = win.lo >= 0
        if self.positive_only:
            self._seed_positive()
        else:
            self._seed_layered()
            self._junction()
            self._descend()
        self._ascend()

    # -- seeds ------------------------------------------------------------

    def _seed_positive(self) -> None:
        d0 = self.res.dim(0)
        w = np.zeros(d0 * d0, dtype=np.int64)
        w[0] = 1  # e (x) e has augmentation 1
        self.maps[0] = {(0, 0): w.reshape(1, -1)}
        self.valid[0] = {(0, 0)}

    def _seed_layered(self) -> None:
        f = self.field
        grp = self.win.group
        d0 = self.res.dim(0)
        w0 = np.zeros(d0 * d0, dtype=np.int64)
        w0[0] = 1
        layers = {0: w0.reshape(1, -1)}
        for ell in range(1, self.kappa + 1):
            prev = layers[ell - 1]
            # defect of the boundary at block (ell-1, -ell): the part moved
            # there by 1 (x) D from the layer above must be made invariant by
            # the D (x) 1 image of the new layer.
            st_prev = (ell - 1, -(ell - 1))
            moved = self.win._rf2(prev, st_prev, self.res.D(-(ell - 1)))
            ds = self.res.dim(ell)
            dt = self.res.dim(-ell)
            dprev = self.res.dim(ell - 1)
            # unknown w_ell in block (ell, -ell); constraint rows per generator
            dmat = self.res.D(ell)  # P_ell -> P_{ell-1}
            cons = []
            rhs = []
            for g in grp.generators():
                tg = np.kron(self.res.P(ell - 1).action(g), self.res.P(-ell).action(g)) \
                    - np.eye(dprev * dt, dtype=np.int64)
                lift = np.kron(dmat, np.eye(dt, dtype=np.int64))
                cons.append(f.matmul(lift, tg % f.p))
                rhs.append(f.matmul(moved, tg % f.p)[0])
            cmat = np.concatenate(cons, axis=1)
            rvec = np.concatenate(rhs)
            sol = f.solve_xa(cmat, rvec % f.p, required=False)
            if sol is None:
                raise ResolutionError("diagonal seed layer has no solution")
            layers[ell] = sol.reshape(1, -1)
        bm: dict = {}
        for ell, w in layers.items():
            bm[(ell, -ell)] = w
            if ell:
                ds = self.res.dim(ell)
                dt = self.res.dim(-ell)
                sw = w.reshape(ds, dt).T.reshape(1, -1)
                bm[(-ell, ell)] = sw
        self.maps[0] = {st: m % self.field.p for st, m in bm.items()}
        self.valid[0] = {(s, -s) for s in range(-self.kappa + 1, self.kappa)}

    # -- junction and descent ---------------------------------------------

    def _transfer_solve(self, st, target: np.ndarray) -> np.ndarray:
        """v with sum_g v.(g,g) = target on one block; target is invariant."""
        f = self.field
        grp = self.win.group
        ps, pt = self.res.P(st[0]), self.res.P(st[1])
        d = self.res.dim(st[0]) * self.res.dim(st[1])
        nmat = np.zeros((d, d), dtype=np.int64)
        for g in range(grp.n):
            nmat += np.kron(ps.action(g), pt.action(g))
        sol = f.solve_xa(nmat % f.p, target % f.p, required=False)
        if sol is None:
            raise ResolutionError("junction transfer equation has no solution")
        return sol

    def _in_cap(self, st) -> bool:
        return self.cap is None or max(st) <= self.cap

    def _junction(self) -> None:
        f = self.field
        full0 = self.win.materialize(self.maps[0], self.res.P(0))
        r = self.win.apply_dw(full0, 0)
        bm: dict = {}
        vset = set()
        for st in self.win.blocks(-1):
            u = st[0]
            if not self._in_cap(st):
                continue
            if not (-self.kappa <= u <= self.kappa - 1):
                self.failures.append((-1, st))
                continue
            vset.add(st)
            blk = r.get(st)
            if blk is None or not np.any(blk):
                continue
            row = blk[0]
            if np.any((blk - row[None, :]) % f.p):
                vset.discard(st)
                self.demoted.append((-1, st))
                self.failures.append((-1, st))
                continue
            bm[st] = self._transfer_solve(st, row).reshape(1, -1)
        self.maps[-1] = bm
        self.valid[-1] = vset
        # verify the junction square on trusted blocks
        full1 = self.win.materialize(bm, self.res.P(-1))
        lhs = self.win.left_mul(self.res.D(0), full1)
        for st in list(vset):
            a = lhs.get(st)
            b = r.get(st)
            za = a is None or not np.any(a)
            zb = b is None or not np.any(b)
            if za != zb or (not za and not np.array_equal(a % f.p, b % f.p)):
                vset.discard(st)
                self.demoted.append((-1, st))
                self.failures.append((-1, st))

    def _descend(self) -> None:
        for m in range(-2, self.mbot - 1, -1):
            above = self.maps[m + 1]
            full = self.win.materialize(above, self.res.P(m + 1))
            img = self.win.apply_dw(full, m + 1)
            vset = set()
            for st in self.win.blocks(m):
                s, t = st
                ok = True
                for up in ((s + 1, t), (s, t + 1)):
                    if up[0] > self.win.hi or up[1] > self.win.hi:
                        ok = False
                    elif up not in self.valid[m + 1]:
                        ok = False
                if ok:
                    vset.add(st)
            self.maps[m] = self._descend_step(m, img, vset)
            self.valid[m] = vset

    def _descend_step(self, m: int, img: dict, vset: set) -> dict:
        """One dualized lift: solve Z @ D~_j = C on tensor generators.

        The level above composed with the boundary, transposed, gives C with
        rows indexed by W_m and columns by P_{m+1}, whose coordinates match
        the positive module in degree j-1.  Z rows are solved at the free
        generators (i1, g, i2) of each block and extended by translation;
        the map at degree m is Z transposed, read off at generators of P_m.
        """
        f = self.field
        grp = self.win.group
        n = grp.n
        pos = self.res.pos
        j = -1 - m
        dj = pos.D(j)
        hj = pos.h(j - 1)
        pj = pos.P(j)
        rank_m = self.res.rank(m)
        bm: dict = {}
        for st, blk in img.items():
            if not np.any(blk) or not self._in_cap(st):
                continue
            s, t = st
            ds, dt = self.res.dim(s), self.res.dim(t)
            rs, rt = self.res.rank(s), self.res.rank(t)
            # C rows at block generators (i1, g, i2): every first coordinate,
            # second coordinate at its generator slots
            cmat = blk.T.reshape(ds, dt, blk.shape[0])
            crows = cmat[:, np.arange(rt) * n, :].reshape(ds * rt, blk.shape[0]) % f.p
            zg = f.matmul(crows, hj)
            boundary = self.cap is not None and max(st) > self.cap - 1
            if not boundary and not np.array_equal(f.matmul(zg, dj), crows):
                self.failures.append((m, st))
                if st in vset:
                    vset.discard(st)
                    self.demoted.append((m, st))
            zarr = zg.reshape(ds, rt, dj.shape[0])
            zfull = np.zeros((ds, dt, dj.shape[0]), dtype=np.int64)
            for k in range(n):
                moved = f.matmul(zarr.reshape(-1, dj.shape[0]), pj.action(k))
                moved = moved.reshape(ds, rt, dj.shape[0])
                # coordinate (i1, g) translated by k lands at (i1, g.k)
                rowidx = (np.arange(rs)[:, None] * n + grp.mul[:n, k][None, :]).ravel()
                colidx = np.arange(rt) * n + k
                zfull[rowidx[:, None], colidx[None, :], :] = moved
            zmat = zfull.reshape(ds * dt, dj.shape[0])
            bm[st] = zmat[:, np.arange(rank_m) * n].T % f.p
        return bm

    # -- ascent ------------------------------------------------------------

    def _ascend(self) -> None:
        f = self.field
        for m in range(1, self.mtop + 1):
            below = self.maps[m - 1]
            fullb = self.win.materialize(below, self.res.P(m - 1))
            dgen = self.res.Dgen(m)
            b = self.win.left_mul(dgen, fullb)
            if self.positive_only:
                x = self.win.apply_k_pp(b)
                vset = set(self.win.blocks(m)) if m <= self.win.hi - 1 else set()
            else:
                x = self.win.apply_hw(b)
                vset = set()
                for st in self.win.blocks(m):
                    prev = (st[0] - 1, st[1])
                    if prev in self.valid[m - 1] and \
                            self.win.lo + 1 <= prev[0] <= self.win.hi - 1:
                        vset.add(st)
            if self.cap is not None:
                x = {st: blk for st, blk in x.items() if self._in_cap(st)}
            # verify the chain square blockwise one degree down; a failed
            # component demotes the blocks it gathers from
            back = self.win.apply_dw(x, m)
            for stl in self.win.blocks(m - 1):
                if self.cap is not None and max(stl) > self.cap - 1:
                    continue
                a = back.get(stl)
                c = b.get(stl)
                za = a is None or not np.any(a)
                zc = c is None or not np.any(c)
                if za != zc or (not za and not np.array_equal(a % f.p, c % f.p)):
                    self.failures.append((m, stl))
                    for up in ((stl[0] + 1, stl[1]), (stl[0], stl[1] + 1)):
                        if up in vset:
                            vset.discard(up)
                            self.demoted.append((m, up))
            self.maps[m] = x
            self.valid[m] = vset

    # -- reads -------------------------------------------------------------

    def read(self, m: int, st) -> np.ndarray:
        if m not in self.maps:
            raise WindowError(f"diagonal not built at degree {m}")
        if st not in self.valid[m]:
            raise WindowError(f"diagonal block {st} at degree {m} is outside the "
                              "validated range; enlarge the window")
        blk = self.maps[m].get(st)
        if blk is None:
            return np.zeros((self.res.rank(m), self.win.block_dim(st)), dtype=np.int64)
        return blk


def positive_for(name: str, field: Fp, length: int):
    """Build the positive resolution a ring for ``name`` would use.

    Product groups (and V4, which is C2 x C2 with its catalog labels) get the
    tensor of the factors' minimal resolutions so that generator bases agree
    between a ring and any engine that works over the positive part alone.
    Returns ``(group, resolution)`` with the group table the resolution is
    actually defined over.
    """
    if name.upper() == "V4":
        factors = ["C2", "C2"]
    else:
        factors = [fa for fa in name.split("x") if fa]
    catalog = group_catalog(name)
    if len(factors) > 1:
        rs = [minimal_resolution(group_catalog(fa), field, length) for fa in factors]
        res = rs[0]
        grp = res.group
        for nxt in rs[1:]:
            grp = grp.direct_product(nxt.group)
            res = tensor_resolution(grp, res, nxt, length)
        if grp.n != catalog.n or not np.array_equal(grp.mul, catalog.mul):
            raise ResolutionError("tensor product group does not match catalog table")
        return grp, res
    return catalog, minimal_resolution(catalog, field, length)


class TateRing:
    """The Tate cohomology ring of one group at one prime over a window."""

    def __init__(self, name: str, npos: int, nneg: int, field: Fp | None = None,
                 kappa: int | None = None, cap: int | None = None,
                 with_labels: bool = True):
        self.name = name
        self.field = field or Fp(2)
        if self.field.p != 2:
            raise ResolutionError("chain-level products are implemented over F2 only; "
                                  "use the symbolic engine at odd primes")
        self.npos = npos
        self.nneg = nneg
        need = max(npos + 2, -(nneg - 2) - 1, 1)
        self.group, pos = positive_for(name, self.field, need)
        self.cres = complete_resolution(self.group, self.field, npos, nneg,
                                        positive_part=pos)
        self.win = TensorWindow(self.cres)
        if kappa is None:
            kappa = max(1, min(self.cres.hi, -self.cres.lo))
        self.kappa = kappa
        self.diag = Diagonal(self.win, mbot=nneg, mtop=npos, kappa=kappa, cap=cap)
        self.one = TateClass(self, 0, [1])
        self.named: dict[str, TateClass] = {"1": self.one}
        if with_labels:
            self._label_setup()

    # -- basic class plumbing ---------------------------------------------

    def rank(self, m: int) -> int:
        return self.cres.rank(m)

    def cls(self, degree: int, vec) -> TateClass:
        return TateClass(self, degree, vec)

    def basis(self, m: int) -> list[TateClass]:
        return [TateClass(self, m, row) for row in np.eye(self.rank(m), dtype=np.int64)]

    def zero(self, m: int) -> TateClass:
        return TateClass(self, m, np.zeros(self.rank(m), dtype=np.int64))

    @property
    def tau(self) -> TateClass:
        """The canonical generator of the one-dimensional degree -1 group."""
        return TateClass(self, -1, [1])

    # -- products and pairings --------------------------------------------

    def cup(self, a: TateClass, b: TateClass) -> TateClass:
        if a.ring is not self or b.ring is not self:
            raise ClassError("classes belong to a different ring")
        m = a.degree + b.degree
        blk = self.diag.read(m, (a.degree, b.degree))
        vec = self.win.read_kron({(a.degree, b.degree): blk}, (a.degree, b.degree),
                                 a.full(), b.full())
        return TateClass(self, m, vec)

    def pairing(self, a: TateClass, b: TateClass) -> int:
        if a.degree + b.degree != -1:
            raise ClassError("pairing needs degrees summing to -1")
        return int(self.cup(a, b).vec[0])

    def pairing_matrix(self, m: int) -> np.ndarray:
        rows = []
        for a in self.basis(m):
            rows.append([self.pairing(a, b) for b in self.basis(-1 - m)])
        return np.asarray(rows, dtype=np.int64)

    def dual_class(self, m: int, vec_index: int) -> TateClass:
        """The class in degree -1-m pairing to the indicator of one basis vector."""
        pm = self.pairing_matrix(m)
        rhs = np.zeros(self.rank(m), dtype=np.int64)
        rhs[vec_index] = 1
        sol = self.field.solve_xa(pm.T, rhs)
        return TateClass(self, -1 - m, sol)

    # -- labels ------------------------------------------------------------

    def _label_setup(self) -> None:
        name = self.name.upper()
        if name == "C2":
            self.named["s"] = self.cls(1, [1])
        elif name in ("C4", "C8"):
            self.named["u"] = self.cls(1, [1])
            self.named["s"] = self.cls(2, [1])
        elif name in ("V4", "C2XC2"):
            # generator (a, i1, i2) of tensor degree 1 with a = 1 is the
            # first factor's direction
            gi = self.cres.pos.gen_index[1]
            x = np.zeros(2, dtype=np.int64)
            y = np.zeros(2, dtype=np.int64)
            x[gi.index((1, 0, 0))] = 1
            y[gi.index((0, 0, 0))] = 1
            self.named["x"] = self.cls(1, x)
            self.named["y"] = self.cls(1, y)
        elif name == "Q8":
            self.named["x"] = self.cls(1, [1, 0])
            self.named["y"] = self.cls(1, [0, 1])
            self.named["s"] = self.cls(4, [1])
        elif name == "D8":
            self._label_d8()

    def _label_d8(self) -> None:
        ones = [self.cls(1, v) for v in ([1, 0], [0, 1], [1, 1])]
        pair = None
        for i in range(3):
            for j in range(i + 1, 3):
                if self.cup(ones[i], ones[j]).is_zero():
                    pair = (ones[i], ones[j])
        if pair is None:
            raise ClassError("no vanishing product in degree one; wrong group?")
        a, b = sorted(pair, key=lambda c: c.vec.tolist())
        self.named["a"] = a
        self.named["b"] = b
        a2 = self.cup(a, a)
        b2 = self.cup(b, b)
        span = np.stack([a2.vec, b2.vec])
        c = None
        for k in range(self.rank(2)):
            cand = np.zeros(self.rank(2), dtype=np.int64)
            cand[k] = 1
            if self.field.solve_xa(span, cand, required=False) is None:
                c = self.cls(2, cand)
                break
        if c is None:
            raise ClassError("degree-two generator not found")
        self.named["c"] = c

    def monomial(self, powers: dict[str, int]) -> TateClass:
        out = self.one
        for label, k in powers.items():
            out = self.cup(out, self.named[label] ** k)
        return out

    def phi(self, i: int, j: int) -> TateClass:
        """Dual generator classes of a rank-two elementary abelian group."""
        gi = self.cres.pos.gen_index
        if gi is None:
            raise ClassError("phi labels need a tensor resolution")
        deg = -1 - i - j
        idx = gi[i + j].index((i, 0, 0))
        vec = np.zeros(self.rank(deg), dtype=np.int64)
        vec[idx] = 1
        return self.cls(deg, vec)


_RING_CACHE: dict = {}


def get_ring(name: str, npos: int, nneg: int, p: int = 2, kappa: int | None = None,
             cap: int | None = None, with_labels: bool = True) -> TateRing:
    key = (name, npos, nneg, p, kappa, cap, with_labels)
    if key not in _RING_CACHE:
        _RING_CACHE[key] = TateRing(name, npos, nneg, field=Fp(p), kappa=kappa,
                                    cap=cap, with_labels=with_labels)
    return _RING_CACHE[key]
