"""Dual operations on ordinary cohomology and direct-factor norm checks.

Tate duality pairs H^j with the degree -1-j part of the full ring, so every
lowering operation on negative classes has an adjoint Q_i^*: H^{i+j} -> H^j
on ordinary cohomology.  This module computes those adjoints from the chain
engine, evaluates the closed norm formula into a rank-two product, and runs
the compatibility and nonvanishing checks built on them.
"""

from dataclasses import dataclass

import numpy as np

from .chainops import ChainOps
from .errors import ClassError, ModuleError, WindowError
from .ring import TateClass, TateRing
from .symbolic import OperationTable, Presentation, SymClass, q_s


@dataclass
class DualOperation:
    """The adjoint of Q_i under the duality pairing, as a matrix on bases.

    Row a holds the coordinates of the image of the a-th basis monomial of
    H^{i+j}; adjointness <apply(x), u> = <x, Q_i(u)> determines the matrix
    uniquely because the pairing is perfect.
    """

    i: int
    j: int
    ring: TateRing
    matrix: np.ndarray

    @property
    def source_degree(self) -> int:
        return self.i + self.j

    def apply(self, x: TateClass) -> TateClass:
        if x.degree != self.source_degree:
            raise ClassError(
                f"operation expects degree {self.source_degree}, got {x.degree}")
        vec = self.ring.field.matmul(x.vec.reshape(1, -1), self.matrix)[0]
        return self.ring.cls(self.j, vec)


def dual_q(ops: ChainOps, i: int, j: int) -> DualOperation:
    """Solve the adjointness identity for the operation H^{i+j} -> H^j."""
    ring = ops.ring
    if i < 0 or j < 0:
        raise ClassError("dual operations live on nonnegative degrees")
    if i + j > ring.npos or -1 - i - j < ring.nneg:
        raise WindowError(
            f"dual operation ({i}, {j}) needs degrees {i + j} and {-1 - i - j}")
    f = ring.field
    qcols = [ops.q_c(u, i).vec for u in ring.basis(-1 - j)]
    qmat = np.stack(qcols, axis=1)
    rmat = f.matmul(ring.pairing_matrix(i + j), qmat)
    mat = f.solve_xa(ring.pairing_matrix(j), rmat)
    return DualOperation(i, j, ring, mat)


def norm_direct_factor(table: OperationTable, x: SymClass,
                       target: Presentation) -> SymClass:
    """The norm of a class from an order-two factor into the rank-two product.

    Sends x of degree d to the sum over r of Sq^r(x) z^(d-r), writing the
    source generator as the first variable of the target and the new factor
    generator z as the second.  Multiplicative because the total square is.
    """
    pres = table.pres
    if pres.name != "C2" or target.name != "V4":
        raise ModuleError("the closed norm formula is built for the order-two "
                          "factor inside the rank-two product")
    if not x.terms:
        return SymClass(target, {})
    d = x.homogeneous_degree()
    if d < 0:
        raise ClassError("the norm formula applies to ordinary cohomology")
    out = {}
    for r in range(d + 1):
        sq = q_s(table, x, -r)
        for key, coeff in sq.terms.items():
            new = ("p", key, d - r)
            out[new] = (out.get(new, 0) + coeff) % pres.p
    return SymClass(target, out)


def dual_power_check(ops: ChainOps, i: int, n: int, x: TateClass) -> bool:
    """Whether the i-th dual on x agrees with the ni-th dual on its n-th power."""
    if x.degree != i:
        raise ClassError(f"class degree {x.degree} does not match the index {i}")
    lhs = dual_q(ops, i, 0).apply(x)
    rhs = dual_q(ops, n * i, 0).apply(x ** n)
    return lhs == rhs


def norm_compatibility_check(c2ops: ChainOps, v4ops: ChainOps,
                             table: OperationTable, target: Presentation,
                             i: int) -> bool:
    """Whether the norm into the rank-two product intertwines the duals.

    Compares the scalar of the i-th dual on the degree-i power of the
    order-two generator with the 2i-th dual on its norm, evaluated through
    the chain engine of the product.
    """
    ring2, ring4 = c2ops.ring, v4ops.ring
    s_pow = ring2.monomial({"s": i})
    lhs = int(dual_q(c2ops, i, 0).apply(s_pow).vec[0])
    sym = norm_direct_factor(table, SymClass(table.pres, {i: 1}), target)
    normed = ring4.zero(2 * i)
    for key, coeff in sym.terms.items():
        if coeff % 2:
            normed = normed + ring4.monomial({"x": key[1], "y": key[2]})
    rhs = int(dual_q(v4ops, 2 * i, 0).apply(normed).vec[0])
    return lhs == rhs


def norm_failure_report(v4ops: ChainOps, d8ops: ChainOps) -> dict:
    """The wrong-subgroup norm contradiction, reproduced numerically.

    If the norm compatibility held for the rank-two elementary abelian
    subgroup of the dihedral group, every norm of a degree-one class would
    be a combination of the two polynomial squares, so the norm of the
    product class would land in the span the degree-four dual kills; the
    nonzero dual value on the product class rules that out.
    """
    ring4, ring8 = v4ops.ring, d8ops.ring
    inner = int(dual_q(v4ops, 2, 0).apply(ring4.monomial({"x": 1, "y": 1})).vec[0])

    q2 = dual_q(d8ops, 2, 0)
    q4 = dual_q(d8ops, 4, 0)
    a2 = ring8.monomial({"a": 2})
    b2 = ring8.monomial({"b": 2})
    c1 = ring8.monomial({"c": 1})
    kills_squares = (q2.apply(a2).is_zero() and q2.apply(b2).is_zero())
    detects_c = int(q2.apply(c1).vec[0])
    a4 = ring8.monomial({"a": 4})
    b4 = ring8.monomial({"b": 4})
    kills_fourth = (q4.apply(a4).is_zero() and q4.apply(b4).is_zero()
                    and q4.apply(a4 + b4).is_zero())
    ab_zero = ring8.monomial({"a": 1, "b": 1}).is_zero()

    return {
        "product_dual_value": inner,
        "degree_two_dual_kills_squares": kills_squares,
        "degree_two_dual_detects_c": bool(detects_c),
        "degree_four_dual_kills_fourth_powers": kills_fourth,
        "ab_vanishes": ab_zero,
        "contradiction": bool(inner == 1 and kills_squares and detects_c
                              and kills_fourth and ab_zero),
    }


def predicted_nontrivial(order: int, n: int) -> bool:
    """The sufficient condition: n divisible by the 2-part of the group order."""
    two_part = order & -order
    return n % two_part == 0


def nontriviality_check(ops: ChainOps, n: int) -> bool:
    """Whether Q_n is nonzero on the canonical degree -1 generator."""
    if n < 1:
        raise ClassError("nonvanishing is asked for positive operation indices")
    return not ops.q_c(ops.ring.tau, n).is_zero()
