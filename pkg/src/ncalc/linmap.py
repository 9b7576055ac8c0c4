"""Linear and bilinear maps on an algebra, in two-sided tensor form.

A ``TensorMap`` is a linear map h -> sum_s l_s * h * r_s built from pairs of
algebra elements. Every map also carries a canonical d x d real matrix (the
"flat"): column j holds the coordinates of the image of basis vector e_j.
All equality questions are settled on flats; maps produced by inversion are
flat-only and display as "numeric".

A ``BilinearMap`` is the two-argument analogue with terms
(x, y) -> p*x*q*y*r (order "xy") or p*y*q*x*r (order "yx"), and a canonical
d x d x d "flat3": flat3[:, i, j] holds the coordinates of the image of
(e_i, e_j). By convention the first argument slot is the derivative
direction and the second is the map argument wherever both meanings appear.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .algebra import SINGULAR_CUTOFF, Algebra, AlgebraElement
from .errors import AlgebraMismatch, SingularMap

FLAT_TOL = 1e-12

TermPair = tuple[AlgebraElement, AlgebraElement]


def _check_same(algebra: Algebra, other: Algebra) -> None:
    if algebra is not other:
        raise AlgebraMismatch("maps over different algebras do not combine")


class TensorMap:
    """h -> sum_s left_s * h * right_s, with a cached flat matrix."""

    __slots__ = ("algebra", "terms", "flat")

    def __init__(
        self,
        algebra: Algebra,
        terms: Iterable[TermPair] | None,
        flat: np.ndarray | None = None,
    ):
        self.algebra = algebra
        self.terms = None if terms is None else tuple(terms)
        if self.terms is not None:
            for l, r in self.terms:
                if l.algebra is not algebra or r.algebra is not algebra:
                    raise AlgebraMismatch("term factors from a different algebra")
        if flat is None:
            if self.terms is None:
                raise ValueError("a map needs terms, a flat, or both")
            flat = np.zeros((algebra.dim, algebra.dim))
            for l, r in self.terms:
                flat += algebra.left_matrix(l.coords) @ algebra.right_matrix(r.coords)
        self.flat = np.asarray(flat, dtype=float)
        if self.flat.shape != (algebra.dim, algebra.dim):
            raise ValueError("flat must be a dim x dim matrix")

    # -- constructors --------------------------------------------------------------

    @classmethod
    def from_flat(cls, algebra: Algebra, flat: np.ndarray) -> "TensorMap":
        """A numeric map: known action, no tensor terms."""
        return cls(algebra, None, flat)

    @property
    def is_numeric(self) -> bool:
        return self.terms is None

    # -- action and algebra --------------------------------------------------------

    def apply(self, h: AlgebraElement) -> AlgebraElement:
        _check_same(self.algebra, h.algebra)
        return AlgebraElement(self.algebra, self.flat @ h.coords)

    def __call__(self, h: AlgebraElement) -> AlgebraElement:
        return self.apply(h)

    def __add__(self, other: "TensorMap") -> "TensorMap":
        _check_same(self.algebra, other.algebra)
        terms = (
            None
            if self.terms is None or other.terms is None
            else self.terms + other.terms
        )
        return TensorMap(self.algebra, terms, self.flat + other.flat)

    def __sub__(self, other: "TensorMap") -> "TensorMap":
        return self + (-other)

    def __neg__(self) -> "TensorMap":
        terms = (
            None if self.terms is None else tuple((-l, r) for l, r in self.terms)
        )
        return TensorMap(self.algebra, terms, -self.flat)

    def scale(self, t: float) -> "TensorMap":
        terms = (
            None
            if self.terms is None
            else tuple((float(t) * l, r) for l, r in self.terms)
        )
        return TensorMap(self.algebra, terms, float(t) * self.flat)

    def compose(self, other: "TensorMap") -> "TensorMap":
        """self after other; on terms, (a@b) o (c@d) = (a c) @ (d b)."""
        _check_same(self.algebra, other.algebra)
        terms = None
        if self.terms is not None and other.terms is not None:
            terms = tuple(
                (a * c, d * b) for a, b in self.terms for c, d in other.terms
            )
        return TensorMap(self.algebra, terms, self.flat @ other.flat)

    def invert(self) -> "TensorMap":
        """Numeric inverse via the flat; raises SingularMap near rank loss."""
        svs = np.linalg.svd(self.flat, compute_uv=False)
        if svs[0] == 0.0 or svs[-1] < SINGULAR_CUTOFF * svs[0]:
            raise SingularMap("map is not invertible to working precision")
        return TensorMap.from_flat(self.algebra, np.linalg.inv(self.flat))

    def op_norm(self) -> float:
        """Operator norm with respect to the coordinate Euclidean norm."""
        return float(np.linalg.norm(self.flat, 2))

    def allclose(self, other: "TensorMap", tol: float = FLAT_TOL) -> bool:
        _check_same(self.algebra, other.algebra)
        return bool(np.allclose(self.flat, other.flat, rtol=0.0, atol=tol))

    # -- display and serialization -------------------------------------------------

    def __repr__(self) -> str:
        if self.is_numeric:
            return f"TensorMap({self.algebra.name}, numeric)"
        return f"TensorMap({self.algebra.name}, {len(self.terms)} terms)"

    def describe(self) -> str:
        if self.is_numeric:
            return "numeric"
        if not self.terms:
            return "0"
        return " + ".join(f"{l!r} (x) {r!r}" for l, r in self.terms)

    def to_json(self) -> dict:
        doc: dict = {"flat": [[float(v) for v in row] for row in self.flat]}
        if self.terms is not None:
            doc["terms"] = [
                [l.coords.tolist(), r.coords.tolist()] for l, r in self.terms
            ]
        return doc

    @classmethod
    def from_json(cls, algebra: Algebra, doc: dict) -> "TensorMap":
        terms = None
        if "terms" in doc:
            terms = tuple(
                (algebra.element(l), algebra.element(r)) for l, r in doc["terms"]
            )
        flat = np.asarray(doc["flat"], dtype=float) if "flat" in doc else None
        return cls(algebra, terms, flat)


def tensor(left: AlgebraElement, right: AlgebraElement) -> TensorMap:
    """The rank-one map h -> left * h * right."""
    _check_same(left.algebra, right.algebra)
    return TensorMap(left.algebra, [(left, right)])


def identity_map(algebra: Algebra) -> TensorMap:
    return tensor(algebra.one, algebra.one)


def zero_map(algebra: Algebra) -> TensorMap:
    return TensorMap(algebra, ())


BilinearTerm = tuple[AlgebraElement, AlgebraElement, AlgebraElement, str]

XY = "xy"
YX = "yx"


class BilinearMap:
    """(x, y) -> sum of p*x*q*y*r ("xy" terms) and p*y*q*x*r ("yx" terms)."""

    __slots__ = ("algebra", "terms", "flat3")

    def __init__(
        self,
        algebra: Algebra,
        terms: Iterable[BilinearTerm] | None,
        flat3: np.ndarray | None = None,
    ):
        self.algebra = algebra
        self.terms = None if terms is None else tuple(terms)
        d = algebra.dim
        if flat3 is None:
            if self.terms is None:
                raise ValueError("a bilinear map needs terms, a flat3, or both")
            flat3 = np.zeros((d, d, d))
            for p, q, r, order in self.terms:
                if order not in (XY, YX):
                    raise ValueError(f"unknown slot order {order!r}")
                lp = algebra.left_matrix(p.coords)
                lq = algebra.left_matrix(q.coords)
                rr = algebra.right_matrix(r.coords)
                # coords(p * e_i * q * e_j * r) = Lp Le_i Lq Re... assembled
                # columnwise: for each first-slot basis vector e_i,
                # flat3[:, i, :] = Lp L(e_i) Lq R(r) evaluated on all e_j.
                for i in range(d):
                    li = algebra.table[i].T
                    block = lp @ li @ lq @ rr
                    if order == XY:
                        flat3[:, i, :] += block
                    else:
                        flat3[:, :, i] += block
        self.flat3 = np.asarray(flat3, dtype=float)
        if self.flat3.shape != (d, d, d):
            raise ValueError("flat3 must have shape (dim, dim, dim)")

    @classmethod
    def from_flat3(cls, algebra: Algebra, flat3: np.ndarray) -> "BilinearMap":
        return cls(algebra, None, flat3)

    @property
    def is_numeric(self) -> bool:
        return self.terms is None

    def apply2(self, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
        _check_same(self.algebra, x.algebra)
        _check_same(self.algebra, y.algebra)
        return AlgebraElement(
            self.algebra, np.einsum("kij,i,j->k", self.flat3, x.coords, y.coords)
        )

    def __call__(self, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
        return self.apply2(x, y)

    def __add__(self, other: "BilinearMap") -> "BilinearMap":
        _check_same(self.algebra, other.algebra)
        terms = (
            None
            if self.terms is None or other.terms is None
            else self.terms + other.terms
        )
        return BilinearMap(self.algebra, terms, self.flat3 + other.flat3)

    def __neg__(self) -> "BilinearMap":
        terms = (
            None
            if self.terms is None
            else tuple((-p, q, r, o) for p, q, r, o in self.terms)
        )
        return BilinearMap(self.algebra, terms, -self.flat3)

    def __sub__(self, other: "BilinearMap") -> "BilinearMap":
        return self + (-other)

    def swap_slots(self) -> "BilinearMap":
        """The map (x, y) -> self(y, x), numeric."""
        return BilinearMap.from_flat3(self.algebra, self.flat3.transpose(0, 2, 1))

    def fix_first(self, x: AlgebraElement) -> TensorMap:
        """Contract the first slot: y -> self(x, y), as a numeric TensorMap."""
        _check_same(self.algebra, x.algebra)
        return TensorMap.from_flat(
            self.algebra, np.einsum("kij,i->kj", self.flat3, x.coords)
        )

    def allclose(self, other: "BilinearMap", tol: float = FLAT_TOL) -> bool:
        _check_same(self.algebra, other.algebra)
        return bool(np.allclose(self.flat3, other.flat3, rtol=0.0, atol=tol))

    def to_json(self) -> dict:
        doc: dict = {"flat3": self.flat3.tolist()}
        if self.terms is not None:
            doc["terms"] = [
                [p.coords.tolist(), q.coords.tolist(), r.coords.tolist(), o]
                for p, q, r, o in self.terms
            ]
        return doc

    def __repr__(self) -> str:
        kind = "numeric" if self.is_numeric else f"{len(self.terms)} terms"
        return f"BilinearMap({self.algebra.name}, {kind})"


def zero_bilinear(algebra: Algebra) -> BilinearMap:
    return BilinearMap(algebra, ())


def mul_bilinear(algebra: Algebra) -> BilinearMap:
    """(x, y) -> x * y."""
    one = algebra.one
    return BilinearMap(algebra, [(one, one, one, XY)])
