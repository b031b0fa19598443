"""Exact linear algebra over prime fields F_p.

Matrices are numpy int64 arrays with entries in [0, p).  Vectors are rows,
and a map f: M -> N of right modules is a dim(M) x dim(N) matrix F acting
by f(v) = v @ F; composition f-then-g is F @ G.

Row reduction is deterministic: leftmost pivot column first, topmost
available row as pivot, full reduction above and below.  Over F_2 large
reductions switch to a bit-packed elimination that performs the exact same
row operations, so results are identical on both paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolveError

# Above this many entries an F_2 reduction runs bit-packed.
_PACK_THRESHOLD = 1 << 14


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Rref:
    """Reduced row echelon decomposition: r = t @ a with t invertible.

    Rows of ``r[:rank]`` are the canonical basis of the row space of ``a``;
    rows of ``t[rank:]`` are a basis of the left null space.
    """

    r: np.ndarray
    pivots: tuple[int, ...]
    rank: int
    t: np.ndarray


def _pack_rows(a: np.ndarray) -> np.ndarray:
    """Pack a 0/1 matrix into rows of uint64 words, bit k of word w = column 64w+k."""
    m, n = a.shape
    bits = np.packbits(a.astype(np.uint8), axis=1, bitorder="little")
    pad = (-bits.shape[1]) % 8
    if pad:
        bits = np.concatenate([bits, np.zeros((m, pad), np.uint8)], axis=1)
    return np.ascontiguousarray(bits).view(np.uint64)


def _unpack_rows(w: np.ndarray, ncols: int) -> np.ndarray:
    bits = np.unpackbits(np.ascontiguousarray(w).view(np.uint8), axis=1, bitorder="little")
    return bits[:, :ncols].astype(np.int64)


def _rref_f2_packed(a: np.ndarray) -> Rref:
    m, n = a.shape
    aug = np.concatenate([a, np.eye(m, dtype=np.int64)], axis=1)
    P = _pack_rows(aug)
    pivots: list[int] = []
    r = 0
    for c in range(n):
        w, bit = divmod(c, 64)
        bitmask = np.uint64(1) << np.uint64(bit)
        col = P[r:, w] & bitmask
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            P[[r, pr]] = P[[pr, r]]
        others = np.nonzero(P[:, w] & bitmask)[0]
        others = others[others != r]
        if others.size:
            P[others] ^= P[r]
        pivots.append(c)
        r += 1
        if r == m:
            break
    full = _unpack_rows(P, n + m)
    return Rref(r=full[:, :n], pivots=tuple(pivots), rank=r, t=full[:, n:])


class Fp:
    """Arithmetic context for one prime p."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"modulus must be prime, got {p}")
        self.p = p

    def asmat(self, a) -> np.ndarray:
        return np.asarray(a, dtype=np.int64) % self.p

    def matmul(self, a, b) -> np.ndarray:
        """Exact product mod p via float64 BLAS.

        Exact while inner_dim * (p-1)^2 < 2**53, which holds for every
        matrix this package builds.
        """
        a = self.asmat(a)
        b = self.asmat(b)
        inner = a.shape[-1]
        if inner == 0:
            return np.zeros(a.shape[:-1] + b.shape[1:], dtype=np.int64)
        if inner * (self.p - 1) ** 2 >= 2**53:
            raise SolveError("product too large for exact float64 accumulation")
        c = np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
        return c % self.p

    def kronecker(self, a, b) -> np.ndarray:
        return np.kron(self.asmat(a), self.asmat(b)) % self.p

    def rref_decompose(self, a) -> Rref:
        a = self.asmat(a)
        if a.ndim != 2:
            raise ValueError("rref_decompose expects a matrix")
        if self.p == 2 and a.size >= _PACK_THRESHOLD:
            return _rref_f2_packed(a)
        return self._rref_generic(a)

    def _rref_generic(self, a: np.ndarray) -> Rref:
        p = self.p
        m, n = a.shape
        R = a.copy()
        T = np.eye(m, dtype=np.int64)
        pivots: list[int] = []
        r = 0
        for c in range(n):
            nz = np.nonzero(R[r:, c])[0]
            if nz.size == 0:
                continue
            pr = r + int(nz[0])
            if pr != r:
                R[[r, pr]] = R[[pr, r]]
                T[[r, pr]] = T[[pr, r]]
            inv = pow(int(R[r, c]), p - 2, p)
            if inv != 1:
                R[r] = R[r] * inv % p
                T[r] = T[r] * inv % p
            col = R[:, c].copy()
            col[r] = 0
            rows = np.nonzero(col)[0]
            if rows.size:
                R[rows] = (R[rows] - np.outer(col[rows], R[r])) % p
                T[rows] = (T[rows] - np.outer(col[rows], T[r])) % p
            pivots.append(c)
            r += 1
            if r == m:
                break
        return Rref(r=R, pivots=tuple(pivots), rank=r, t=T)

    def rank(self, a) -> int:
        return self.rref_decompose(a).rank

    def left_null(self, a) -> np.ndarray:
        """Rows u with u @ a = 0; a basis of the left null space."""
        d = self.rref_decompose(a)
        return d.t[d.rank:]

    def right_null(self, a) -> np.ndarray:
        """Rows v with a @ v.T = 0; a basis of the right null space."""
        return self.left_null(self.asmat(a).T)

    def solve_xa(self, a, b, *, required: bool = True) -> np.ndarray | None:
        """Solve X @ a = b rowwise; b may be a vector or a matrix of rows."""
        a = self.asmat(a)
        b = self.asmat(b)
        vec = b.ndim == 1
        if vec:
            b = b[None, :]
        d = self.rref_decompose(a)
        coords = b[:, list(d.pivots)] if d.rank else np.zeros((b.shape[0], 0), np.int64)
        if d.rank and np.any(self.matmul(coords, d.r[: d.rank]) != b):
            if required:
                raise SolveError("row-space system has no solution")
            return None
        if not d.rank and np.any(b):
            if required:
                raise SolveError("row-space system has no solution")
            return None
        x = self.matmul(coords, d.t[: d.rank]) if d.rank else np.zeros((b.shape[0], a.shape[0]), np.int64)
        return x[0] if vec else x

    def solve_linear(self, a, b, *, required: bool = True):
        """Solve a @ X = b; returns (X, K) with rows of K spanning {v: a @ v.T = 0}."""
        a = self.asmat(a)
        b = self.asmat(b)
        xt = self.solve_xa(a.T, b.T, required=required)
        kernel = self.right_null(a)
        return (None if xt is None else xt.T), kernel

    def inv(self, a) -> np.ndarray:
        a = self.asmat(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("inv expects a square matrix")
        x = self.solve_xa(a, np.eye(a.shape[0], dtype=np.int64), required=False)
        if x is None:
            raise SolveError("matrix is singular")
        return x
