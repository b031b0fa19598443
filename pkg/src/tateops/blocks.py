"""Blockwise calculus on the total complex W = P (x) P of a resolution window.

A "blockmap" is a dict {(s, t): ndarray} holding the components of a linear
map into the total degree nu = s + t part of W; the array for block (s, t)
has shape (rows, dim_s * dim_t), rows flattened row-major over the pair
(first factor coordinate, second factor coordinate).  Missing keys mean zero
blocks.  All entries are reduced mod p.

The differential of W is D (x) 1 + 1 (x) D; at p = 2 no Koszul signs occur,
which is the only case these routines are used for.  The one-sided homotopy
h (x) 1 built from a contracting homotopy of the resolution is a contracting
homotopy of W wherever the one-factor identities hold, because the cross
terms h (x) D cancel in pairs mod 2.
"""

from __future__ import annotations

import numpy as np

from .errors import WindowError
from .groups import FreeKG


class TensorWindow:
    """Block bookkeeping for W = P (x) P over a degree window of P.

    res duck-types a resolution window: attributes lo, hi and methods
    dim(m), P(m), D(m) (lo+1..hi), h(m) (lo..hi-1); complete resolutions
    also carry pi0, sigma, pi_nu for the quadrant-restricted solvers.
    """

    def __init__(self, res):
        self.res = res
        self.field = res.field
        self.group = res.group
        self.lo = res.lo
        self.hi = res.hi

    def blocks(self, nu: int):
        lo, hi = self.lo, self.hi
        return [(s, nu - s) for s in range(max(lo, nu - hi), min(hi, nu - lo) + 1)]

    def block_dim(self, st) -> int:
        return self.res.dim(st[0]) * self.res.dim(st[1])

    def total_dim(self, nu: int) -> int:
        return sum(self.block_dim(st) for st in self.blocks(nu))

    # -- elementary factor operations ------------------------------------

    def _rf1(self, m: np.ndarray, st, a: np.ndarray) -> np.ndarray:
        """Right-multiply the first tensor factor by a."""
        ds, dt = self.res.dim(st[0]), self.res.dim(st[1])
        nr = m.shape[0]
        cube = m.reshape(nr, ds, dt).transpose(0, 2, 1).reshape(nr * dt, ds)
        out = self.field.matmul(cube, a)
        return out.reshape(nr, dt, a.shape[1]).transpose(0, 2, 1).reshape(nr, -1)

    def _rf2(self, m: np.ndarray, st, a: np.ndarray) -> np.ndarray:
        """Right-multiply the second tensor factor by a."""
        ds, dt = self.res.dim(st[0]), self.res.dim(st[1])
        nr = m.shape[0]
        out = self.field.matmul(m.reshape(nr * ds, dt), a)
        return out.reshape(nr, -1)

    @staticmethod
    def _acc(out: dict, key, val: np.ndarray, p: int) -> None:
        if key in out:
            out[key] = (out[key] + val) % p
        else:
            out[key] = val % p

    # -- structural operators --------------------------------------------

    def apply_dw(self, bm: dict, nu: int) -> dict:
        """Compose with the W differential W_nu -> W_{nu-1}."""
        out: dict = {}
        p = self.field.p
        for st, m in bm.items():
            s, t = st
            if s - 1 >= self.lo:
                self._acc(out, (s - 1, t), self._rf1(m, st, self.res.D(s)), p)
            if t - 1 >= self.lo:
                self._acc(out, (s, t - 1), self._rf2(m, st, self.res.D(t)), p)
        return out

    def apply_hw(self, bm: dict, *, smin=None, smax=None) -> dict:
        """Compose with h (x) 1, skipping first degrees outside [smin, smax]."""
        out: dict = {}
        p = self.field.p
        lo = self.lo if smin is None else max(self.lo, smin)
        hi = self.hi - 1 if smax is None else min(self.hi - 1, smax)
        for st, m in bm.items():
            s, t = st
            if lo <= s <= hi:
                self._acc(out, (s + 1, t), self._rf1(m, st, self.res.h(s)), p)
        return out

    def apply_t(self, bm: dict) -> dict:
        """Compose with the twist swapping the tensor factors."""
        out: dict = {}
        for (s, t), m in bm.items():
            ds, dt = self.res.dim(s), self.res.dim(t)
            nr = m.shape[0]
            sw = m.reshape(nr, ds, dt).transpose(0, 2, 1).reshape(nr, -1)
            self._acc(out, (t, s), sw, self.field.p)
        return out

    def one_plus_t(self, bm: dict) -> dict:
        return self.add(bm, self.apply_t(bm))

    def add(self, a: dict, b: dict) -> dict:
        out = {st: m.copy() for st, m in a.items()}
        for st, m in b.items():
            self._acc(out, st, m, self.field.p)
        return out

    def left_mul(self, mat: np.ndarray, bm: dict) -> dict:
        return {st: self.field.matmul(mat, m) for st, m in bm.items()}

    def materialize(self, bm: dict, src: FreeKG) -> dict:
        """Extend generator rows to the full free module by translation."""
        n = self.group.n
        out: dict = {}
        for (s, t), m in bm.items():
            ds, dt = self.res.dim(s), self.res.dim(t)
            nr = m.shape[0]
            cube = m.reshape(nr, ds, dt)
            full = np.empty((nr, n, ds, dt), dtype=np.int64)
            ps = self.res.P(s)
            pt = self.res.P(t)
            for g in range(n):
                ginv = self.group.inv[g]
                full[:, g] = cube[:, ps.perm(ginv)][:, :, pt.perm(ginv)]
            out[(s, t)] = full.reshape(nr * n, ds * dt)
        return out

    def equal(self, a: dict, b: dict) -> bool:
        keys = set(a) | set(b)
        for st in keys:
            ma = a.get(st)
            mb = b.get(st)
            if ma is None:
                if np.any(mb):
                    return False
            elif mb is None:
                if np.any(ma):
                    return False
            elif not np.array_equal(ma % self.field.p, mb % self.field.p):
                return False
        return True

    # -- quadrant-restricted solvers -------------------------------------
    # The signs of (s, t) split W into quadrants; the one-sided operators
    # below stay inside a quadrant and satisfy dK + Kd = 1 - (rank-one
    # residual) there, the residual sitting at first or second degree 0/-1.

    def split_quadrants(self, bm: dict):
        pp, pm, mp, mm = {}, {}, {}, {}
        for st, m in bm.items():
            s, t = st
            if s >= 0 and t >= 0:
                pp[st] = m
            elif s >= 0:
                pm[st] = m
            elif t >= 0:
                mp[st] = m
            else:
                mm[st] = m
        return pp, pm, mp, mm

    def apply_k_pp(self, bm: dict) -> dict:
        """Two-sided homotopy of the positive quadrant: h (x) 1 + pi0 (x) h."""
        out: dict = {}
        p = self.field.p
        for st, m in bm.items():
            s, t = st
            if 0 <= s <= self.hi - 1:
                self._acc(out, (s + 1, t), self._rf1(m, st, self.res.h(s)), p)
            if s == 0 and 0 <= t <= self.hi - 1:
                fixed = self._rf1(m, st, self.res.pi0)
                self._acc(out, (0, t + 1), self._rf2(fixed, st, self.res.h(t)), p)
        return out

    def apply_k_pm(self, bm: dict) -> dict:
        """Homotopy of the (+,-) quadrant: h (x) 1 + pi0 (x) h."""
        out: dict = {}
        p = self.field.p
        for st, m in bm.items():
            s, t = st
            if 0 <= s <= self.hi - 1:
                self._acc(out, (s + 1, t), self._rf1(m, st, self.res.h(s)), p)
            if s == 0 and t <= -2:
                fixed = self._rf1(m, st, self.res.pi0)
                self._acc(out, (0, t + 1), self._rf2(fixed, st, self.res.h(t)), p)
        return out

    def apply_k_mp(self, bm: dict) -> dict:
        """Homotopy of the (-,+) quadrant: h (x) 1 + pi_nu (x) h."""
        out: dict = {}
        p = self.field.p
        for st, m in bm.items():
            s, t = st
            if self.lo <= s <= -2:
                self._acc(out, (s + 1, t), self._rf1(m, st, self.res.h(s)), p)
            if s == -1 and 0 <= t <= self.hi - 1:
                fixed = self._rf1(m, st, self.res.pi_nu)
                self._acc(out, (-1, t + 1), self._rf2(fixed, st, self.res.h(t)), p)
        return out

    def apply_k_mm(self, bm: dict) -> dict:
        """Homotopy of the (-,-) quadrant: h (x) 1 + pi_nu (x) h."""
        out: dict = {}
        p = self.field.p
        for st, m in bm.items():
            s, t = st
            if self.lo <= s <= -2:
                self._acc(out, (s + 1, t), self._rf1(m, st, self.res.h(s)), p)
            if s == -1 and t <= -2:
                fixed = self._rf1(m, st, self.res.pi_nu)
                self._acc(out, (-1, t + 1), self._rf2(fixed, st, self.res.h(t)), p)
        return out

    def junction_leaks(self, pm: dict, mp: dict) -> dict:
        """Images of the mixed quadrants under the junction differentials."""
        out: dict = {}
        p = self.field.p
        for st, m in pm.items():
            if st[0] == 0:
                self._acc(out, (-1, st[1]), self._rf1(m, st, self.res.D(0)), p)
        for st, m in mp.items():
            if st[1] == 0:
                self._acc(out, (st[0], -1), self._rf2(m, st, self.res.D(0)), p)
        return out

    def read_kron(self, bm: dict, st, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Evaluate the functional left (x) right on one block's columns."""
        if st not in bm:
            nr = 0
            for m in bm.values():
                nr = m.shape[0]
                break
            return np.zeros(nr, dtype=np.int64)
        vec = np.kron(left.astype(np.int64), right.astype(np.int64)).reshape(-1, 1)
        return self.field.matmul(bm[st], vec)[:, 0]


class PositiveAsWindow:
    """Adapter viewing a PositiveResolution as a degree window [0, length]."""

    def __init__(self, pos):
        self.pos = pos
        self.field = pos.field
        self.group = pos.group
        self.lo = 0
        self.hi = pos.length
        self.pi0 = pos.pi0
        self.sigma = pos.sigma

    def dim(self, m: int) -> int:
        return self.group.n * self.pos.rank(m)

    def P(self, m: int):
        return self.pos.P(m)

    def D(self, m: int) -> np.ndarray:
        return self.pos.D(m)

    def Dgen(self, m: int) -> np.ndarray:
        return self.pos.Dgen(m)

    def h(self, m: int) -> np.ndarray:
        return self.pos.h(m)

    def rank(self, m: int) -> int:
        return self.pos.rank(m)
