"""Vector fields, non-coordinate frames, and their differential invariants.

A vector field on A^n assigns to each point x a tuple of algebra elements,
given here by expression components. The Lie derivative of one field along
another contracts the full derivative maps against field values; the
commutator variant multiplies coefficients instead and only agrees with the
Lie derivative in commutative situations, which the returned flag tracks.

A frame is an n x n array of symbolic tensor forms (coefficients of frame
vectors against the coordinate directions). Its anholonomy measures the
failure of the frame to come from coordinate lines: for each pair of lower
indices the coordinate-direction derivatives of the coefficients are
antisymmetrized, leaving one tensor map per (pair, upper index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import Algebra, AlgebraElement, TupleElement
from .errors import ShapeMismatch
from .expr import (
    Const,
    Expr,
    PolyMap,
    TensorExpr,
    eval_derivative,
    parse_expression,
)
from .linmap import TensorMap
from .mapmatrix import MapMatrix


@dataclass(frozen=True)
class VectorField:
    """A field on A^n with expression coefficients against d/dx^i."""

    algebra: Algebra
    n: int
    components: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.n:
            raise ShapeMismatch("a field needs one component per coordinate")

    @classmethod
    def from_sources(
        cls, algebra: Algebra, n: int, sources: Sequence[str]
    ) -> "VectorField":
        return cls(
            algebra, n, tuple(parse_expression(s, n, algebra) for s in sources)
        )

    def as_polymap(self) -> PolyMap:
        return PolyMap(self.algebra, self.n, self.components)

    def eval(self, x: TupleElement) -> TupleElement:
        return self.as_polymap().eval(x)

    def derivative(self, x: TupleElement) -> MapMatrix:
        return eval_derivative(self.as_polymap(), x)


def lie_derivative(
    v: VectorField, w: VectorField, x: TupleElement
) -> TupleElement:
    """(L_v w)(x): derivative of w contracted with v minus the reverse."""
    dv = v.derivative(x)
    dw = w.derivative(x)
    return dw.apply_col(v.eval(x)) - dv.apply_col(w.eval(x))


def field_commutator(
    v: VectorField, w: VectorField, x: TupleElement, tol: float = 1e-10
) -> tuple[TupleElement, bool]:
    """Coefficient-product commutator and a pointwise-commutation flag.

    Component i is sum_j v^j(x) * (d w^i/d x^j at x applied to the unit)
    minus the same with v and w exchanged. The flag reports whether every
    product v^j(x) * w^i(x) commutes at x (within tol); only then can this
    be expected to match lie_derivative, and noncommuting coefficient data
    can break the match even when the flag holds, since the derivative
    direction enters products the flag does not see.
    """
    vx = v.eval(x)
    wx = w.eval(x)
    dv = v.derivative(x)
    dw = w.derivative(x)
    one = v.algebra.one
    comps = []
    for i in range(v.n):
        acc = v.algebra.zero
        for j in range(v.n):
            acc = acc + vx[j] * dw[i, j].apply(one) - wx[j] * dv[i, j].apply(one)
        comps.append(acc)
    flag = all(
        (vx[j] * wx[i] - wx[i] * vx[j]).norm() < tol
        for i in range(v.n)
        for j in range(v.n)
    )
    return TupleElement(comps), flag


@dataclass(frozen=True)
class Frame:
    """n x n symbolic coefficients: entry [k][i] weighs d/dx^i in frame vector k."""

    algebra: Algebra
    n: int
    coeffs: tuple[tuple[TensorExpr, ...], ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.n or any(
            len(row) != self.n for row in self.coeffs
        ):
            raise ShapeMismatch("frame coefficients must form an n x n array")

    @classmethod
    def from_sources(
        cls,
        algebra: Algebra,
        n: int,
        entries: Sequence[Sequence[Sequence[Sequence[str]]]],
    ) -> "Frame":
        """entries[k][i] is a list of [left_src, right_src] pairs."""
        rows = []
        for row in entries:
            cells = []
            for pairs in row:
                cells.append(
                    TensorExpr(
                        algebra,
                        tuple(
                            (
                                parse_expression(l, n, algebra),
                                parse_expression(r, n, algebra),
                            )
                            for l, r in pairs
                        ),
                    )
                )
            rows.append(tuple(cells))
        return cls(algebra, n, tuple(rows))

    @classmethod
    def coordinate(cls, algebra: Algebra, n: int) -> "Frame":
        unit_pair = (Const(algebra.one), Const(algebra.one))
        one = TensorExpr(algebra, (unit_pair,))
        zero = TensorExpr(algebra, ())
        return cls(
            algebra,
            n,
            tuple(
                tuple(one if k == i else zero for i in range(n)) for k in range(n)
            ),
        )

    def matrix_at(self, x: TupleElement) -> MapMatrix:
        return MapMatrix(
            [[te.eval(x) for te in row] for row in self.coeffs]
        )

    def is_valid_at(self, x: TupleElement) -> bool:
        """A frame must evaluate to an invertible matrix of maps."""
        flat = self.matrix_at(x).block_flat()
        svs = np.linalg.svd(flat, compute_uv=False)
        return bool(svs[0] > 0.0 and svs[-1] >= 1e-10 * svs[0])


def anholonomy(frame: Frame, x: TupleElement) -> list[list[list[TensorMap]]]:
    """Antisymmetrized coordinate derivatives of the frame coefficients.

    out[k][l][i] = d(coeff[k][i])/dx^l - d(coeff[l][i])/dx^k, each derivative
    taken along the coordinate line (direction slot contracted with the
    unit), leaving a tensor map acting on the remaining argument.
    """
    n = frame.n
    one = frame.algebra.one
    deriv = [
        [
            [frame.coeffs[k][i].diff_at(l + 1, x).fix_first(one) for i in range(n)]
            for l in range(n)
        ]
        for k in range(n)
    ]
    return [
        [
            [deriv[k][l][i] - deriv[l][k][i] for i in range(n)]
            for l in range(n)
        ]
        for k in range(n)
    ]
