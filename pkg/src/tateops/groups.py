"""Finite groups as multiplication tables and right kG-modules over F_p.

A group element is an index 0..n-1 with identity 0.  A right kG-module of
dimension d is a stack of action matrices act[g], acting on row vectors by
v -> v @ act[g].  Free modules use the basis (r, g) at index r*n + g, so
right translation permutes coordinates within each generator block.
"""

from __future__ import annotations

import numpy as np

from .errors import GroupTableError, ModuleError, SolveError
from .fplin import Fp


class GroupTable:
    """A finite group given by its multiplication table."""

    def __init__(self, mul, names=None, check: bool = True):
        self.mul = np.asarray(mul, dtype=np.int64)
        n = self.mul.shape[0]
        self.names = list(names) if names is not None else [f"g{i}" for i in range(n)]
        if check:
            self._validate()
        self.inv = np.argmin(self.mul, axis=1)  # mul[g, inv[g]] == 0

    @property
    def n(self) -> int:
        return self.mul.shape[0]

    def _validate(self) -> None:
        m = self.mul
        n = m.shape[0]
        if m.ndim != 2 or m.shape != (n, n):
            raise GroupTableError("multiplication table must be square")
        if len(self.names) != n:
            raise GroupTableError("one name per element required")
        if m.min() < 0 or m.max() >= n:
            raise GroupTableError("table entries out of range")
        if not (np.array_equal(m[0], np.arange(n)) and np.array_equal(m[:, 0], np.arange(n))):
            raise GroupTableError("element 0 must be the identity")
        ar = np.arange(n)
        for axis in (0, 1):
            if not np.all(np.sort(m, axis=axis) == (ar[:, None] if axis == 0 else ar[None, :])):
                raise GroupTableError("rows and columns must be permutations")
        if not np.array_equal(m[m], m[:, m]):
            raise GroupTableError("multiplication is not associative")
        if not np.all(np.any(m == 0, axis=1)):
            raise GroupTableError("some element has no inverse")

    def _closure(self, seed) -> set[int]:
        frontier = set(seed) | {0}
        while True:
            new = {int(self.mul[a, b]) for a in frontier for b in frontier} - frontier
            if not new:
                return frontier
            frontier |= new

    def generators(self) -> list[int]:
        """Small generating set, deterministic in element order."""
        gens: list[int] = []
        closed = {0}
        for g in range(1, self.n):
            if g in closed:
                continue
            gens.append(g)
            closed = self._closure(gens)
            if len(closed) == self.n:
                break
        # drop elements made redundant by later picks
        for g in list(gens):
            rest = [h for h in gens if h != g]
            if rest and len(self._closure(rest)) == self.n:
                gens = rest
        return gens

    def direct_product(self, other: "GroupTable") -> "GroupTable":
        n1, n2 = self.n, other.n
        a = np.repeat(np.arange(n1), n2)
        b = np.tile(np.arange(n2), n1)
        mul = self.mul[np.ix_(a, a)] * n2 + other.mul[np.ix_(b, b)]
        names = [f"({self.names[i]}|{other.names[j]})" for i in range(n1) for j in range(n2)]
        return GroupTable(mul, names, check=False)

    def to_file(self, path) -> None:
        lines = [f"order {self.n}"]
        lines += [" ".join(str(int(x)) for x in row) for row in self.mul]
        lines.append("names: " + " ".join(self.names))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path) -> "GroupTable":
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        if not lines or not lines[0].startswith("order "):
            raise GroupTableError("table file must start with 'order n'")
        try:
            n = int(lines[0].split()[1])
        except (IndexError, ValueError) as exc:
            raise GroupTableError("bad order line") from exc
        if len(lines) < 1 + n:
            raise GroupTableError("table file truncated")
        try:
            mul = [[int(x) for x in lines[1 + i].split()] for i in range(n)]
        except ValueError as exc:
            raise GroupTableError("non-integer table entry") from exc
        names = None
        for ln in lines[1 + n:]:
            if ln.startswith("names:"):
                names = ln[len("names:"):].split()
        return cls(mul, names)


def _cyclic(n: int) -> GroupTable:
    mul = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    names = ["e"] + [f"g{i}" if i > 1 else "g" for i in range(1, n)]
    return GroupTable(mul, names, check=False)


def _quaternion8() -> GroupTable:
    # elements 2*sym + sign with syms 1,i,j,k: 0:1 1:-1 2:i 3:-i 4:j 5:-j 6:k 7:-k
    symtab = {}
    for a in range(4):
        symtab[(0, a)] = (0, a)
        symtab[(a, 0)] = (0, a)
    for a in (1, 2, 3):
        symtab[(a, a)] = (1, 0)
    cyc = {(1, 2): (0, 3), (2, 3): (0, 1), (3, 1): (0, 2)}
    for (a, b), (s, c) in list(cyc.items()):
        symtab[(a, b)] = (s, c)
        symtab[(b, a)] = (1 - s, c)
    mul = np.zeros((8, 8), dtype=np.int64)
    for x in range(8):
        for y in range(8):
            sa, a = x % 2, x // 2
            sb, b = y % 2, y // 2
            s, c = symtab[(a, b)]
            mul[x, y] = 2 * c + (sa + sb + s) % 2
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    return GroupTable(mul, names)


def _dihedral8() -> GroupTable:
    # r^a s^b at index b*4 + a; s r^c = r^{-c} s
    mul = np.zeros((8, 8), dtype=np.int64)
    for a in range(4):
        for b in range(2):
            for c in range(4):
                for d in range(2):
                    aa = (a + (c if b == 0 else -c)) % 4
                    bb = (b + d) % 2
                    mul[b * 4 + a, d * 4 + c] = bb * 4 + aa
    names = ["e", "r", "r2", "r3", "s", "rs", "r2s", "r3s"]
    return GroupTable(mul, names)


def group_catalog(name: str) -> GroupTable:
    """Catalog lookup; product names like "C2xC2xC2" build direct products."""
    parts = name.split("x")
    tables = []
    for part in parts:
        part = part.strip()
        if part == "V4":
            tables.append(_cyclic(2).direct_product(_cyclic(2)))
        elif part == "Q8":
            tables.append(_quaternion8())
        elif part == "D8":
            tables.append(_dihedral8())
        elif part.startswith("C") and part[1:].isdigit() and int(part[1:]) >= 1:
            tables.append(_cyclic(int(part[1:])))
        else:
            raise GroupTableError(f"unknown group name: {part!r}")
    g = tables[0]
    for h in tables[1:]:
        g = g.direct_product(h)
    return g


class KGModule:
    """A finite-dimensional right kG-module over F_p."""

    def __init__(self, group: GroupTable, field: Fp, act, check: bool = True):
        self.group = group
        self.field = field
        self.act = field.asmat(act)
        if self.act.ndim != 3 or self.act.shape[0] != group.n or self.act.shape[1] != self.act.shape[2]:
            raise ModuleError("action stack must have shape (|G|, d, d)")
        if check:
            self._validate()

    @property
    def dim(self) -> int:
        return self.act.shape[1]

    def action(self, g: int) -> np.ndarray:
        return self.act[g]

    def _validate(self) -> None:
        if not np.array_equal(self.act[0], np.eye(self.dim, dtype=np.int64)):
            raise ModuleError("identity must act as the identity matrix")
        mul = self.group.mul
        for g in self.group.generators():
            for h in range(self.group.n):
                if not np.array_equal(self.act[mul[h, g]], self.field.matmul(self.act[h], self.act[g])):
                    raise ModuleError("action is not a homomorphism")


class FreeKG(KGModule):
    """Free right kG-module of a given rank, basis (r, g) at index r*|G| + g."""

    def __init__(self, group: GroupTable, field: Fp, rank: int):
        self.rank = rank
        n = group.n
        act = np.zeros((n, rank * n, rank * n), dtype=np.int64)
        idx = np.arange(rank * n)
        h = idx % n
        r = idx // n
        for g in range(n):
            act[g, idx, r * n + group.mul[h, g]] = 1
        super().__init__(group, field, act, check=False)

    def perm(self, g: int) -> np.ndarray:
        """Index array p with (v @ act[g])[p[i]] = v[i]."""
        idx = np.arange(self.dim)
        return (idx // self.group.n) * self.group.n + self.group.mul[idx % self.group.n, g]

    def extend_from_generators(self, genrows: np.ndarray, dst: KGModule) -> np.ndarray:
        """Full matrix of the equivariant map sending generator r to genrows[r]."""
        genrows = self.field.asmat(genrows)
        out = np.empty((self.rank, self.group.n, dst.dim), dtype=np.int64)
        for g in range(self.group.n):
            out[:, g, :] = self.field.matmul(genrows, dst.action(g))
        return out.reshape(self.dim, dst.dim)


class ModuleMap:
    """An equivariant linear map between right kG-modules, acting by v @ mat."""

    def __init__(self, src: KGModule, dst: KGModule, mat, check: bool = True):
        self.src = src
        self.dst = dst
        self.mat = src.field.asmat(mat)
        if self.mat.shape != (src.dim, dst.dim):
            raise ModuleError(f"map shape {self.mat.shape} != ({src.dim}, {dst.dim})")
        if check:
            f = src.field
            for g in src.group.generators():
                if not np.array_equal(f.matmul(src.action(g), self.mat), f.matmul(self.mat, dst.action(g))):
                    raise ModuleError("map is not equivariant")

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self-then-other."""
        if other.src is not self.dst and other.src.dim != self.dst.dim:
            raise ModuleError("composition dimension mismatch")
        return ModuleMap(self.src, other.dst, self.src.field.matmul(self.mat, other.mat), check=False)

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(self.src, self.dst, (self.mat + other.mat) % self.src.field.p, check=False)


def trivial_module(group: GroupTable, field: Fp, dim: int = 1) -> KGModule:
    act = np.broadcast_to(np.eye(dim, dtype=np.int64), (group.n, dim, dim)).copy()
    return KGModule(group, field, act, check=False)


def free_module(group: GroupTable, field: Fp, rank: int) -> FreeKG:
    return FreeKG(group, field, rank)


def tensor_module(m1: KGModule, m2: KGModule) -> KGModule:
    if m1.group is not m2.group and not np.array_equal(m1.group.mul, m2.group.mul):
        raise ModuleError("tensor factors must share a group")
    f = m1.field
    act = np.stack([f.kronecker(m1.action(g), m2.action(g)) for g in range(m1.group.n)])
    return KGModule(m1.group, f, act, check=False)


def dual_module(m: KGModule) -> KGModule:
    act = np.stack([m.action(m.group.inv[g]).T for g in range(m.group.n)])
    return KGModule(m.group, m.field, act, check=False)


def restrict_module(m: KGModule, sub: GroupTable, embed) -> KGModule:
    """Restrict along an injective homomorphism sub -> m.group given as an index map."""
    embed = np.asarray(embed, dtype=np.int64)
    if embed.shape != (sub.n,) or embed[0] != 0:
        raise ModuleError("embedding must map identity to identity")
    for a in range(sub.n):
        for b in range(sub.n):
            if m.group.mul[embed[a], embed[b]] != embed[sub.mul[a, b]]:
                raise ModuleError("embedding is not a homomorphism")
    act = np.stack([m.action(int(embed[s])) for s in range(sub.n)])
    return KGModule(sub, m.field, act, check=False)


class Submodule:
    """A submodule presented by a canonical (RREF) row basis of the ambient module."""

    def __init__(self, ambient: KGModule, rows):
        f = ambient.field
        d = f.rref_decompose(rows)
        self.ambient = ambient
        self.basis = d.r[: d.rank]
        self.pivots = list(d.pivots)
        acts = []
        for g in range(ambient.group.n):
            moved = f.matmul(self.basis, ambient.action(g))
            acts.append(moved[:, self.pivots] if d.rank else np.zeros((0, 0), np.int64))
            if d.rank and not np.array_equal(f.matmul(acts[-1], self.basis), moved):
                raise ModuleError("rows do not span a submodule")
        dim = d.rank
        act = np.stack(acts) if dim else np.zeros((ambient.group.n, 0, 0), np.int64)
        self.module = KGModule(ambient.group, f, act, check=False)
        self.inclusion = ModuleMap(self.module, ambient, self.basis, check=False)

    def coords(self, vectors) -> np.ndarray:
        """Coordinates of ambient row vectors lying in the submodule."""
        v = self.ambient.field.asmat(vectors)
        c = v[..., self.pivots]
        if not np.array_equal(self.ambient.field.matmul(c, self.basis), v):
            raise SolveError("vector not in submodule")
        return c


def kernel_module(fmap: ModuleMap) -> Submodule:
    return Submodule(fmap.src, fmap.src.field.left_null(fmap.mat))


def image_module(fmap: ModuleMap) -> Submodule:
    return Submodule(fmap.dst, fmap.mat)


def hom_equivariant_basis(m1: KGModule, m2: KGModule) -> list[np.ndarray]:
    """Basis of equivariant maps m1 -> m2, each returned as a (d1, d2) matrix."""
    f = m1.field
    d1, d2 = m1.dim, m2.dim
    blocks = []
    for g in m1.group.generators():
        a = np.kron(m1.action(g), np.eye(d2, dtype=np.int64))
        b = np.kron(np.eye(d1, dtype=np.int64), m2.action(g).T)
        blocks.append((a - b) % f.p)
    if not blocks:
        blocks.append(np.zeros((1, d1 * d2), np.int64))
    stacked = np.concatenate(blocks, axis=0)
    null = f.right_null(stacked)
    canon = f.rref_decompose(null)
    return [canon.r[i].reshape(d1, d2) for i in range(canon.rank)]


def is_stably_zero(fmap: ModuleMap) -> tuple[bool, np.ndarray | None]:
    """Whether the map factors through a projective module.

    f: M -> N factors through a projective iff it lifts along the evaluation
    surjection N (x) kG -> N (action on the group factor alone), which holds
    iff the matrix of f lies in the span of g -> rho_M(g^-1) Psi rho_N(g)
    over arbitrary linear Psi.  Returns the witness Psi when it does; the
    lift itself is recovered by projective_witness_map.
    """
    m1, m2 = fmap.src, fmap.dst
    f = m1.field
    grp = m1.group
    d1, d2 = m1.dim, m2.dim
    op = np.zeros((d1 * d2, d1 * d2), dtype=np.int64)
    for g in range(grp.n):
        op = (op + np.kron(m1.action(int(grp.inv[g])), m2.action(g).T)) % f.p
    x = f.solve_xa(op.T, fmap.mat.reshape(-1), required=False)
    if x is None:
        return False, None
    return True, x.reshape(d1, d2)


def projective_witness_map(fmap: ModuleMap, psi: np.ndarray) -> tuple[FreeKG, ModuleMap, ModuleMap]:
    """Factor a stably zero map as lift-then-evaluate through a free module.

    Returns (Q, lift, ev) with Q free of rank dim(N), f = lift o ev, where
    basis (i, g) of Q stands for n_i (x) g and ev sends it to n_i . g.
    """
    m1, m2 = fmap.src, fmap.dst
    f = m1.field
    grp = m1.group
    n = grp.n
    # basis (i, g) of the free module stands for n_i (x) g with action
    # (n_i (x) g) . h = n_i (x) gh, exactly the FreeKG permutation
    q = FreeKG(grp, f, m2.dim)
    lift = np.zeros((m1.dim, q.dim), dtype=np.int64)
    ev = np.zeros((q.dim, m2.dim), dtype=np.int64)
    for g in range(n):
        block = f.matmul(m1.action(int(grp.inv[g])), psi)
        lift[:, np.arange(m2.dim) * n + g] = block
        ev[np.arange(m2.dim) * n + g, :] = m2.action(g)
    lift_map = ModuleMap(m1, q, lift)
    ev_map = ModuleMap(q, m2, ev)
    return q, lift_map, ev_map
