"""Minimal and complete projective resolutions of the trivial module k.

Positive resolutions are built by iterated minimal covers, so every P_j is
free with a canonical generator set and all differentials land in the
radical.  A complete resolution dualizes the positive part: P_{-1-j} is the
dual of P_j, the junction map D_0 is the composite of augmentation and its
dual, and exactness holds in every degree.

Contracting homotopies are gauge-fixed so that, at every interior degree m,
h_m D_{m+1} and D_m h_{m-1} are complementary projections summing to the
identity.  The homotopies are linear but not equivariant; equivariant maps
are produced from them by evaluating on free generators and extending by
translation.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ResolutionError, WindowError
from .fplin import Fp
from .groups import FreeKG, GroupTable, KGModule, Submodule, trivial_module


def _minimal_cover(module: KGModule):
    """Return (rank, cover matrix FreeKG(rank) -> module), radical-minimal."""
    f = module.field
    grp = module.group
    d = module.dim
    if d == 0:
        return 0, np.zeros((0, 0), dtype=np.int64)
    eye = np.eye(d, dtype=np.int64)
    rad_rows = np.concatenate([(module.action(g) - eye) % f.p for g in grp.generators()], axis=0)
    dec = f.rref_decompose(rad_rows)
    nonpivots = [c for c in range(d) if c not in dec.pivots]
    gens = eye[nonpivots]
    free = FreeKG(grp, f, len(nonpivots))
    cover = free.extend_from_generators(gens, module)
    if f.rank(cover) != d:
        raise ResolutionError("minimal cover failed to surject")
    return len(nonpivots), cover


class PositiveResolution:
    """A minimal projective resolution P_len -> ... -> P_0 -> k."""

    def __init__(self, group: GroupTable, field: Fp, length: int, ranks, diffs, gen_index=None):
        self.group = group
        self.field = field
        self.length = length
        self.ranks = list(ranks)
        self._D = dict(diffs)  # j -> full matrix P_j -> P_{j-1}, j >= 1
        self._mods: dict[int, FreeKG] = {}
        self.gen_index = gen_index  # per degree: tensor generator labels, or None
        self.eps = np.ones((group.n * self.ranks[0], 1), dtype=np.int64)
        self._h: dict[int, np.ndarray] = {}
        self._rrefs: dict[int, object] = {}
        self.pi0 = None
        self.sigma = None
        self._build_homotopies()

    def rank(self, j: int) -> int:
        if not 0 <= j <= self.length:
            raise WindowError(f"degree {j} outside positive resolution of length {self.length}")
        return self.ranks[j]

    def P(self, j: int) -> FreeKG:
        if j not in self._mods:
            self._mods[j] = FreeKG(self.group, self.field, self.rank(j))
        return self._mods[j]

    def D(self, j: int) -> np.ndarray:
        if not 1 <= j <= self.length:
            raise WindowError(f"no differential at degree {j}")
        return self._D[j]

    def Dgen(self, j: int) -> np.ndarray:
        return self.D(j)[np.arange(self.rank(j)) * self.group.n]

    def _rref(self, j):
        if j not in self._rrefs:
            self._rrefs[j] = self.field.rref_decompose(self.D(j))
        return self._rrefs[j]

    def _build_homotopies(self) -> None:
        f = self.field
        n = self.group.n
        for m in range(self.length):
            dec = self._rref(m + 1)
            base = dec.t[: dec.rank].copy()
            if m + 2 <= self.length:
                dec2 = self._rref(m + 2)
                if dec2.rank:
                    base = (base - f.matmul(base[:, list(dec2.pivots)], dec2.r[: dec2.rank])) % f.p
            h = np.zeros((n * self.rank(m), n * self.rank(m + 1)), dtype=np.int64)
            h[list(dec.pivots)] = base
            self._h[m] = h
        dec1 = self._rref(1)
        proj = np.zeros((n * self.rank(0), n * self.rank(0)), dtype=np.int64)
        proj[list(dec1.pivots)] = dec1.r[: dec1.rank]
        self.pi0 = (np.eye(n * self.rank(0), dtype=np.int64) - proj) % f.p
        self.sigma = self.pi0[0].copy()
        if int(self.sigma.sum() % f.p) != 1:
            raise ResolutionError("augmentation section is not normalized")

    def h(self, m: int) -> np.ndarray:
        if not 0 <= m <= self.length - 1:
            raise WindowError(f"no homotopy at degree {m}")
        return self._h[m]


def minimal_resolution(group: GroupTable, field: Fp, length: int) -> PositiveResolution:
    triv = trivial_module(group, field)
    ranks = []
    diffs = {}
    r0, cover = _minimal_cover(triv)
    ranks.append(r0)
    current = Submodule(FreeKG(group, field, r0), field.left_null(cover))
    for j in range(1, length + 1):
        rj, cov = _minimal_cover(current.module)
        ranks.append(rj)
        diffs[j] = field.matmul(cov, current.basis)
        current = Submodule(FreeKG(group, field, rj), field.left_null(cov))
    return PositiveResolution(group, field, length, ranks, diffs)


def tensor_resolution(prod: GroupTable, res1: PositiveResolution, res2: PositiveResolution,
                      length: int) -> PositiveResolution:
    """Tensor of two minimal resolutions over the direct product group.

    Generators in degree j are triples (a, i1, i2) with a + b = j, listed in
    increasing a, then lexicographic (i1, i2); gen_index records them.
    The product's element (g, h) sits at index g*|G2| + h, matching
    GroupTable.direct_product.
    """
    f = res1.field
    n1, n2 = res1.group.n, res2.group.n
    if prod.n != n1 * n2:
        raise ResolutionError("product table does not match factor orders")
    if length > min(res1.length, res2.length):
        raise ResolutionError("factor resolutions too short for requested length")
    gen_index: list[list[tuple[int, int, int]]] = []
    ranks = []
    for j in range(length + 1):
        idx = [(a, i1, i2)
               for a in range(j + 1)
               for i1 in range(res1.rank(a))
               for i2 in range(res2.rank(j - a))]
        gen_index.append(idx)
        ranks.append(len(idx))

    def flat(j: int, a: int, i1: int, i2: int, g: int, h: int) -> int:
        r = gen_index[j].index((a, i1, i2))
        return r * (n1 * n2) + g * n2 + h

    diffs = {}
    sign = (-1) % f.p
    for j in range(1, length + 1):
        rows = np.zeros((ranks[j], n1 * n2 * ranks[j - 1]), dtype=np.int64)
        for r, (a, i1, i2) in enumerate(gen_index[j]):
            b = j - a
            if a >= 1:
                dgen = res1.Dgen(a)[i1].reshape(res1.rank(a - 1), n1)
                for i1p in range(res1.rank(a - 1)):
                    for g in np.nonzero(dgen[i1p])[0]:
                        rows[r, flat(j - 1, a - 1, i1p, i2, int(g), 0)] += dgen[i1p, g]
            if b >= 1:
                dgen = res2.Dgen(b)[i2].reshape(res2.rank(b - 1), n2)
                s = pow(sign, a, f.p)
                for i2p in range(res2.rank(b - 1)):
                    for h in np.nonzero(dgen[i2p])[0]:
                        rows[r, flat(j - 1, a, i1, i2p, 0, int(h))] += s * dgen[i2p, h]
        rows %= f.p
        free_j = FreeKG(prod, f, ranks[j])
        diffs[j] = free_j.extend_from_generators(rows, FreeKG(prod, f, ranks[j - 1]))
        induced = rows.reshape(ranks[j], ranks[j - 1], n1 * n2).sum(axis=2) % f.p
        if np.any(induced):
            raise ResolutionError("tensor differential is not radical; factors not minimal?")
    return PositiveResolution(prod, f, length, ranks, diffs, gen_index=gen_index)


class CompleteResolution:
    """A window P_lo .. P_hi of a complete projective resolution of k.

    P_m for m <= -1 is the dual of the positive P_{-1-m} (free on the dual
    basis, same translation indexing), D_m = D_{-m}^T there, and
    D_0 = eps o eta is the all-ones junction map of rank one.
    """

    def __init__(self, pos: PositiveResolution, lo: int, hi: int):
        if lo > -2 or hi < 1:
            raise ResolutionError("window must contain degrees -2 and 1")
        if hi > pos.length or (-1 - lo) > pos.length:
            raise ResolutionError("positive part too short for requested window")
        self.pos = pos
        self.group = pos.group
        self.field = pos.field
        self.lo = lo
        self.hi = hi
        n = self.group.n
        self.eps = pos.eps
        self.eta_row = np.ones((1, n * pos.rank(0)), dtype=np.int64)
        self._mods: dict[int, FreeKG] = {}
        self._h: dict[int, np.ndarray] = {}
        self._rrefs: dict[int, object] = {}
        self.pi0 = None
        self.sigma = None
        self.pi_nu = None
        self._build_homotopies()

    def rank(self, m: int) -> int:
        if not self.lo <= m <= self.hi:
            raise WindowError(f"degree {m} outside window [{self.lo}, {self.hi}]")
        return self.pos.rank(m) if m >= 0 else self.pos.rank(-1 - m)

    def dim(self, m: int) -> int:
        return self.group.n * self.rank(m)

    def P(self, m: int) -> FreeKG:
        if m not in self._mods:
            self._mods[m] = FreeKG(self.group, self.field, self.rank(m))
        return self._mods[m]

    def D(self, m: int) -> np.ndarray:
        """Full matrix of P_m -> P_{m-1}; defined for lo+1 <= m <= hi."""
        if not self.lo + 1 <= m <= self.hi:
            raise WindowError(f"no differential at degree {m}")
        if m >= 1:
            return self.pos.D(m)
        if m == 0:
            return self.field.matmul(self.eps, self.eta_row)
        return self.pos.D(-m).T.copy()

    def Dgen(self, m: int) -> np.ndarray:
        return self.D(m)[np.arange(self.rank(m)) * self.group.n]

    def _rref(self, m):
        if m not in self._rrefs:
            self._rrefs[m] = self.field.rref_decompose(self.D(m))
        return self._rrefs[m]

    def _build_homotopies(self) -> None:
        f = self.field
        for m in range(self.lo, self.hi):
            dec = self._rref(m + 1)
            base = dec.t[: dec.rank].copy()
            if m + 2 <= self.hi:
                dec2 = self._rref(m + 2)
                if dec2.rank:
                    base = (base - f.matmul(base[:, list(dec2.pivots)], dec2.r[: dec2.rank])) % f.p
            h = np.zeros((self.dim(m), self.dim(m + 1)), dtype=np.int64)
            if dec.rank:
                h[list(dec.pivots)] = base
            self._h[m] = h
        # residual projections for the one-sided solvers
        dec1 = self._rref(1)
        proj = np.zeros((self.dim(0), self.dim(0)), dtype=np.int64)
        proj[list(dec1.pivots)] = dec1.r[: dec1.rank]
        self.pi0 = (np.eye(self.dim(0), dtype=np.int64) - proj) % f.p
        self.sigma = self.pi0[0].copy()
        self.pi_nu = (np.eye(self.dim(-1), dtype=np.int64)
                      - self.field.matmul(self.D(-1), self._h[-2])) % f.p

    def h(self, m: int) -> np.ndarray:
        """Contracting homotopy P_m -> P_{m+1} of the complete resolution."""
        if not self.lo <= m <= self.hi - 1:
            raise WindowError(f"no homotopy at degree {m}")
        return self._h[m]

    def export_json(self, path) -> None:
        data = {
            "p": self.field.p,
            "order": self.group.n,
            "lo": self.lo,
            "hi": self.hi,
            "ranks": {str(m): self.rank(m) for m in range(self.lo, self.hi + 1)},
            "differentials": {str(m): self.D(m).tolist() for m in range(self.lo + 1, self.hi + 1)},
        }
        with open(path, "w") as fh:
            json.dump(data, fh, sort_keys=True, separators=(",", ":"))


def complete_resolution(group: GroupTable, field: Fp, npos: int, nneg: int,
                        positive_part: PositiveResolution | None = None,
                        margin: int = 2) -> CompleteResolution:
    """Window [nneg - margin, npos + margin] of a complete resolution of k."""
    if group.n % field.p != 0:
        raise ResolutionError("complete resolutions need p dividing the group order")
    if npos < 0 or nneg > -1:
        raise ResolutionError("window must contain degrees -1 and 0")
    lo = nneg - margin
    hi = npos + margin
    need = max(hi, -1 - lo)
    if positive_part is None:
        positive_part = minimal_resolution(group, field, need)
    elif positive_part.length < need:
        raise ResolutionError("supplied positive part is too short")
    return CompleteResolution(positive_part, lo, hi)


def omega(cres: CompleteResolution, n: int) -> Submodule:
    """The syzygy Omega^n k = im(D_n) inside P_{n-1}, for n of either sign."""
    return Submodule(cres.P(n - 1), cres.D(n))


def lift_comparison(src_res: PositiveResolution, dst, n: int) -> list[np.ndarray]:
    """Chain maps c_j: src P_j -> dst P_j lifting the identity of k, 0 <= j <= n.

    dst duck-types a positive resolution over the same group as src_res:
    deg_module(j) (a KGModule), D(j), h(j), and sigma with augmentation 1.
    Equivariance comes from defining each c_j on free generators only.
    """
    f = src_res.field
    c0 = src_res.P(0).extend_from_generators(
        np.tile(dst.sigma, (src_res.rank(0), 1)), dst.deg_module(0))
    out = [c0]
    for j in range(1, n + 1):
        rhs_gen = f.matmul(src_res.Dgen(j), out[j - 1])
        xg = f.matmul(rhs_gen, dst.h(j - 1))
        if not np.array_equal(f.matmul(xg, dst.D(j)), rhs_gen):
            raise ResolutionError("comparison lift failed; target not a resolution?")
        out.append(src_res.P(j).extend_from_generators(xg, dst.deg_module(j)))
    return out


class ResolutionAsLiftTarget:
    """Adapter presenting a PositiveResolution as a lift_comparison target."""

    def __init__(self, res: PositiveResolution):
        self.res = res
        self.sigma = res.sigma

    def deg_module(self, j: int) -> KGModule:
        return self.res.P(j)

    def D(self, j: int) -> np.ndarray:
        return self.res.D(j)

    def h(self, j: int) -> np.ndarray:
        return self.res.h(j)
