"""Negative Tate classes as finite complexes through projectives.

A class in degree -n over the trivial module is the same thing as a chain
complex k -> P_n -> ... -> P_1 -> k with free middles: psi reads the class
off by lifting through the minimal resolution, phi writes a class out as
the tail of that resolution, and splice concatenates two complexes so that
psi turns concatenation into the cup product.  All middles are free right
kG-modules with the (r, g) basis used everywhere else in the package.
"""

from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import ClassError, ModuleError, SolveError, WindowError
from .fplin import Fp
from .groups import FreeKG, GroupTable, KGModule
from .ring import TateClass, TateRing


@dataclass
class KComplex:
    """A complex k -> P_n -> ... -> P_1 -> k with free kG middles.

    ``a`` holds the coefficients of the first map: 1 goes to sum_r a[r] N e_r
    where N is the group norm, so the image is automatically invariant.
    ``mids`` holds the full matrices of P_n -> P_{n-1}, ..., P_2 -> P_1 in
    that order, acting on row vectors.  ``ranks`` lists the ranks of
    P_n, ..., P_1 and ``b`` the values of the last map on the free
    generators of P_1 (a map into the trivial module is any such vector).
    """

    group: GroupTable
    field: Fp
    a: np.ndarray
    mids: list = dfield(default_factory=list)
    ranks: list = dfield(default_factory=list)
    b: np.ndarray = None

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.int64) % self.field.p
        self.b = np.asarray(self.b, dtype=np.int64) % self.field.p
        self.mids = [self.field.asmat(m) for m in self.mids]
        self.ranks = [int(r) for r in self.ranks]

    @property
    def length(self) -> int:
        return len(self.ranks)

    def middle(self, j: int) -> FreeKG:
        """The free module P_j, numbered n down to 1."""
        if not 1 <= j <= self.length:
            raise ModuleError(f"no middle P_{j} in a length-{self.length} complex")
        return FreeKG(self.group, self.field, self.ranks[self.length - j])

    def bcol(self) -> np.ndarray:
        """The last map as a full column on P_1."""
        return np.repeat(self.b, self.group.n).reshape(-1, 1)

    def validate(self) -> None:
        """Check shapes, equivariance, and that consecutive maps compose to 0."""
        n = self.length
        if n < 1:
            raise ModuleError("a complex needs at least one middle module")
        if len(self.mids) != n - 1:
            raise ModuleError(f"{len(self.mids)} middle maps do not fit {n} middles")
        if self.a.shape != (self.ranks[0],):
            raise ModuleError("first-map coefficients do not match the top rank")
        if self.b.shape != (self.ranks[-1],):
            raise ModuleError("last-map coefficients do not match the bottom rank")
        f = self.field
        gn = self.group.n
        for t, mid in enumerate(self.mids):
            want = (gn * self.ranks[t], gn * self.ranks[t + 1])
            if mid.shape != want:
                raise ModuleError(f"middle map {t} has shape {mid.shape}, not {want}")
            src = FreeKG(self.group, f, self.ranks[t])
            dst = FreeKG(self.group, f, self.ranks[t + 1])
            for g in self.group.generators():
                lhs = f.matmul(src.action(g), mid)
                rhs = f.matmul(mid, dst.action(g))
                if not np.array_equal(lhs, rhs):
                    raise ModuleError(f"middle map {t} is not equivariant")
        top = np.repeat(self.a, gn).reshape(1, -1)
        if n == 1:
            if int(f.matmul(top, self.bcol())[0, 0]) != 0:
                raise ModuleError("first and last maps do not compose to zero")
        else:
            if np.any(f.matmul(top, self.mids[0])):
                raise ModuleError("first map does not land in the kernel")
            for t in range(n - 2):
                if np.any(f.matmul(self.mids[t], self.mids[t + 1])):
                    raise ModuleError(f"middle maps {t} and {t + 1} do not compose to zero")
            if np.any(f.matmul(self.mids[-1], self.bcol())):
                raise ModuleError("last middle map does not land in the kernel of the last map")


@dataclass
class DegreeOneExtension:
    """A two-dimensional module 0 -> k -> M -> k -> 0 twisted by a character.

    Basis row 0 spans the invariant submodule, row 1 maps to 1 under the
    quotient map; g sends row 1 to row 1 + chi[g] * row 0.
    """

    module: KGModule
    chi: np.ndarray


def extension_of_character(group: GroupTable, field: Fp, chi) -> DegreeOneExtension:
    chi = np.asarray(chi, dtype=np.int64) % field.p
    if chi.shape != (group.n,):
        raise ModuleError("character must assign a scalar to every group element")
    for g in range(group.n):
        for h in range(group.n):
            if (chi[group.mul[g, h]] - chi[g] - chi[h]) % field.p:
                raise ModuleError("character is not a homomorphism")
    act = np.zeros((group.n, 2, 2), dtype=np.int64)
    act[:, 0, 0] = 1
    act[:, 1, 1] = 1
    act[:, 1, 0] = chi
    return DegreeOneExtension(KGModule(group, field, act), chi)


class KCalc:
    """Translate between negative ring classes and complexes through projectives."""

    def __init__(self, ring: TateRing):
        self.ring = ring
        self.group = ring.group
        self.field = ring.field
        self.pos = ring.cres.pos

    def _check_group(self, comp: KComplex) -> None:
        if comp.group.n != self.group.n or not np.array_equal(comp.group.mul, self.group.mul):
            raise ModuleError("complex is defined over a different group")

    def _check_window(self, n: int) -> None:
        if n - 1 > self.ring.npos or -n < self.ring.nneg:
            raise WindowError(
                f"length-{n} complexes need the ring window to cover degrees "
                f"{n - 1} and {-n}")

    def lift_tower(self, comp: KComplex) -> list:
        """Full matrices of lifts f_j: P_{j+1} -> W_j over the resolution.

        f_0 covers the last map through the augmentation and each later
        stage lifts the previous one through the resolution differential.
        Failure to lift means the input was not a complex.
        """
        self._check_group(comp)
        n = comp.length
        self._check_window(n)
        f = self.field
        pos = self.pos
        gn = self.group.n
        genrows = f.asmat(np.outer(comp.b, pos.sigma))
        tower = [comp.middle(1).extend_from_generators(genrows, pos.P(0))]
        for j in range(1, n):
            mid = comp.mids[n - 1 - j]
            src_rank = comp.ranks[n - 1 - j]
            rhs_gen = f.matmul(mid[np.arange(src_rank) * gn], tower[-1])
            xg = f.matmul(rhs_gen, pos.h(j - 1))
            if not np.array_equal(f.matmul(xg, pos.D(j)), rhs_gen):
                raise SolveError(
                    f"no lift at stage {j}: the input is not a chain complex")
            tower.append(comp.middle(j + 1).extend_from_generators(xg, pos.P(j)))
        return tower

    def psi(self, comp: KComplex) -> TateClass:
        """The degree -n class represented by a length-n complex."""
        tower = self.lift_tower(comp)
        n = comp.length
        f = self.field
        gn = self.group.n
        top = np.repeat(comp.a, gn).reshape(1, -1)
        v = f.matmul(top, tower[-1])[0]
        ident = v[np.arange(self.pos.rank(n - 1)) * gn]
        pm = self.ring.pairing_matrix(n - 1)
        vec = f.solve_xa(pm.T, ident)
        return self.ring.cls(-n, vec)

    def phi(self, x: TateClass) -> KComplex:
        """The tail of the resolution, capped by the pairing values of x."""
        if x.degree >= 0:
            raise ClassError("only negative-degree classes spread out as complexes")
        n = -x.degree
        self._check_window(n)
        f = self.field
        pos = self.pos
        pm = self.ring.pairing_matrix(n - 1)
        a = f.matmul(pm, x.vec.reshape(-1, 1))[:, 0]
        mids = [pos.D(j) for j in range(n - 1, 0, -1)]
        ranks = [pos.rank(j) for j in range(n - 1, -1, -1)]
        return KComplex(self.group, f, a, mids, ranks, np.ones(1, dtype=np.int64))

    def canonical_morphism(self, comp: KComplex):
        """The componentwise map comp -> phi(psi(comp)) with identity ends.

        Returns the target complex and the list of component matrices
        P_{j+1} -> W_j for j = 0, ..., n-1.
        """
        tower = self.lift_tower(comp)
        return self.phi(self.psi(comp)), tower

    def character_of_degree_one(self, x: TateClass) -> np.ndarray:
        """The group character matching a degree-one ring class.

        Evaluates the class on lifts of sigma*g - sigma through the first
        differential; minimality makes the value independent of the lift.
        """
        if x.degree != 1:
            raise ClassError("characters come from degree-one classes")
        f = self.field
        pos = self.pos
        gn = self.group.n
        chi = np.zeros(gn, dtype=np.int64)
        for g in range(1, gn):
            u = (f.matmul(pos.sigma.reshape(1, -1), pos.P(0).action(g)) -
                 pos.sigma.reshape(1, -1)) % f.p
            w = f.matmul(u, pos.h(0))
            if not np.array_equal(f.matmul(w, pos.D(1)), u):
                raise SolveError("translated section does not lift")
            blocks = w.reshape(pos.rank(1), gn).sum(axis=1) % f.p
            chi[g] = int(np.dot(x.vec, blocks) % f.p)
        return chi

    def compose_with_extension(self, comp: KComplex, ext: DegreeOneExtension) -> KComplex:
        """Shorten a complex by one stage through a degree-one extension.

        Lifts the last map to the extension module and pushes the next
        middle map down to the invariant line, producing a complex one
        shorter whose class is the product of the original class with the
        degree-one class of the character.
        """
        self._check_group(comp)
        n = comp.length
        if n < 2:
            raise ModuleError("composition needs at least two middles")
        f = self.field
        gn = self.group.n
        theta_gen = np.outer(comp.b, np.array([0, 1], dtype=np.int64))
        theta = comp.middle(1).extend_from_generators(theta_gen, ext.module)
        through = f.matmul(comp.mids[-1], theta)
        if np.any(through[:, 1]):
            raise ModuleError("composite does not land in the invariant line")
        socle = through[:, 0].reshape(comp.ranks[-2], gn)
        if np.any(socle - socle[:, :1]):
            raise ModuleError("composite is not equivariant into the socle")
        return KComplex(self.group, f, comp.a, comp.mids[:-1], comp.ranks[:-1],
                        socle[:, 0])


def splice(c1: KComplex, c2: KComplex) -> KComplex:
    """Concatenate two complexes; psi of the result is psi(c2) cup psi(c1)."""
    if c1.group.n != c2.group.n or not np.array_equal(c1.group.mul, c2.group.mul):
        raise ModuleError("cannot splice complexes over different groups")
    f = c1.field
    gn = c1.group.n
    junction = np.outer(np.repeat(c1.b, gn), np.repeat(c2.a, gn)) % f.p
    return KComplex(c1.group, f, c1.a, c1.mids + [junction] + c2.mids,
                    c1.ranks + c2.ranks, c2.b)


def norm_complex(group: GroupTable, field: Fp) -> KComplex:
    """k -> kG -> k through the norm and the augmentation."""
    one = np.ones(1, dtype=np.int64)
    return KComplex(group, field, one, [], [1], one)


def interpretqi_complex(group: GroupTable, field: Fp, i: int) -> KComplex:
    """The complex with i+1 copies of kG tensor kG whose class is Q_i of tau.

    The ends are norm tensor norm and the product of augmentations; the
    middle maps are 1 + swap.  Requires p = 2.
    """
    if field.p != 2:
        raise ModuleError("the swap complex is built at p = 2")
    if i < 0:
        raise ClassError("the operation index must be nonnegative")
    gn = group.n
    free = FreeKG(group, field, gn)
    tgen = np.zeros((gn, gn * gn), dtype=np.int64)
    for x in range(gn):
        tgen[x, group.inv[x] * gn + x] = 1
    swap = free.extend_from_generators(tgen, free)
    one_plus_t = (np.eye(gn * gn, dtype=np.int64) + swap) % 2
    ones = np.ones(gn, dtype=np.int64)
    return KComplex(group, field, ones, [one_plus_t] * i, [gn] * (i + 1), ones)


def h_minus_one_coefficient(group: GroupTable, field: Fp, alpha) -> int:
    """Evaluate a length-1 swap complex: the sum of alpha over the group.

    ``alpha`` lists the values of a map kG tensor kG -> k on the free
    generators x tensor 1.  The composite with norm tensor norm must
    vanish for the data to form a complex.
    """
    alpha = np.asarray(alpha, dtype=np.int64) % field.p
    if alpha.shape != (group.n,):
        raise ModuleError("alpha must assign a scalar to every free generator")
    total = int(alpha.sum())
    if (group.n * total) % field.p:
        raise ModuleError("composite with the norm map is nonzero, not a complex")
    return total % field.p


def dual_tail_complex(ring: TateRing, j: int, lam) -> KComplex:
    """The transposed resolution tail W_0* -> ... -> W_j* capped by lam.

    Any coefficient vector lam on the generators of W_j* yields a complex
    because the transposed differentials already compose to zero; psi of
    the result recovers the ring class with coordinate vector lam in
    degree -1-j.
    """
    pos = ring.cres.pos
    if j < 0 or j > pos.length - 1:
        raise WindowError(f"tail degree {j} outside the resolution")
    mids = [pos.D(t).T.copy() for t in range(1, j + 1)]
    ranks = [pos.rank(t) for t in range(j + 1)]
    one = np.ones(1, dtype=np.int64)
    return KComplex(ring.group, ring.field, one, mids, ranks, lam)
