"""Matrices over an algebra and matrices of tensor-form maps.

``AMatrix`` is a plain matrix of algebra elements with the two one-sided star
products that arise when entries do not commute. ``MapMatrix`` is a matrix
whose entries are ``TensorMap``s; it acts on tuples, composes entrywise
("composition product"), and flattens to one large real matrix (the
"block flat") whose (k, i) block of size d x d is entry (k, i)'s flat. The
block flat turns the composition product into an ordinary matrix product and
is the vehicle for inversion.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .algebra import SINGULAR_CUTOFF, Algebra, AlgebraElement, TupleElement
from .errors import AlgebraMismatch, ShapeMismatch, SingularMapMatrix
from .linmap import TensorMap, identity_map, zero_map


class AMatrix:
    """A rows x cols matrix of algebra elements."""

    __slots__ = ("algebra", "rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[AlgebraElement]]):
        if not entries or not entries[0]:
            raise ValueError("empty matrix")
        self.rows = len(entries)
        self.cols = len(entries[0])
        self.algebra = entries[0][0].algebra
        for row in entries:
            if len(row) != self.cols:
                raise ShapeMismatch("ragged rows")
            for e in row:
                if e.algebra is not self.algebra:
                    raise AlgebraMismatch("entries from different algebras")
        self.entries = [list(row) for row in entries]

    def __getitem__(self, rc: tuple[int, int]) -> AlgebraElement:
        r, c = rc
        return self.entries[r][c]

    @classmethod
    def identity(cls, algebra: Algebra, n: int) -> "AMatrix":
        return cls(
            [
                [algebra.one if r == c else algebra.zero for c in range(n)]
                for r in range(n)
            ]
        )

    def allclose(self, other: "AMatrix", tol: float = 1e-12) -> bool:
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        return all(
            self.entries[r][c].allclose(other.entries[r][c], tol)
            for r in range(self.rows)
            for c in range(self.cols)
        )

    def __repr__(self) -> str:
        return f"AMatrix({self.algebra.name}, {self.rows}x{self.cols})"


def star_rc(a: AMatrix, b: AMatrix) -> AMatrix:
    """Row-by-column product: out[i][j] = sum_k a[i][k] * b[k][j]."""
    if a.algebra is not b.algebra:
        raise AlgebraMismatch("star products need a common algebra")
    if a.cols != b.rows:
        raise ShapeMismatch(f"{a.rows}x{a.cols} times {b.rows}x{b.cols}")
    out = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = a.algebra.zero
            for k in range(a.cols):
                acc = acc + a.entries[i][k] * b.entries[k][j]
            row.append(acc)
        out.append(row)
    return AMatrix(out)


def star_cr(a: AMatrix, b: AMatrix) -> AMatrix:
    """Column-by-row product: out[r][c] = sum_k b[r][k] * a[k][c].

    The b-side factor multiplies from the left; the result has shape
    rows(b) x cols(a) and requires rows(a) == cols(b). It equals
    star_rc(b, a); when either factor is an identity matrix (or both are
    1x1 over a commutative algebra) the two star products agree.
    """
    if a.algebra is not b.algebra:
        raise AlgebraMismatch("star products need a common algebra")
    if b.cols != a.rows:
        raise ShapeMismatch(f"{a.rows}x{a.cols} star-cr {b.rows}x{b.cols}")
    return star_rc(b, a)


class MapMatrix:
    """A rows x cols matrix of TensorMaps over one algebra."""

    __slots__ = ("algebra", "rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[TensorMap]]):
        if not entries or not entries[0]:
            raise ValueError("empty matrix")
        self.rows = len(entries)
        self.cols = len(entries[0])
        self.algebra = entries[0][0].algebra
        for row in entries:
            if len(row) != self.cols:
                raise ShapeMismatch("ragged rows")
            for e in row:
                if e.algebra is not self.algebra:
                    raise AlgebraMismatch("entries over different algebras")
        self.entries = [list(row) for row in entries]

    def __getitem__(self, rc: tuple[int, int]) -> TensorMap:
        r, c = rc
        return self.entries[r][c]

    @classmethod
    def identity(cls, algebra: Algebra, n: int) -> "MapMatrix":
        return cls(
            [
                [identity_map(algebra) if r == c else zero_map(algebra) for c in range(n)]
                for r in range(n)
            ]
        )

    @classmethod
    def zero(cls, algebra: Algebra, rows: int, cols: int) -> "MapMatrix":
        return cls([[zero_map(algebra) for _ in range(cols)] for _ in range(rows)])

    def submatrix(self, row_ids: Iterable[int], col_ids: Iterable[int]) -> "MapMatrix":
        return MapMatrix(
            [[self.entries[r][c] for c in col_ids] for r in row_ids]
        )

    # -- algebra -------------------------------------------------------------------

    def __add__(self, other: "MapMatrix") -> "MapMatrix":
        self._match(other)
        return MapMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other: "MapMatrix") -> "MapMatrix":
        self._match(other)
        return MapMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __neg__(self) -> "MapMatrix":
        return MapMatrix([[-e for e in row] for row in self.entries])

    def _match(self, other: "MapMatrix") -> None:
        if self.algebra is not other.algebra:
            raise AlgebraMismatch("matrices over different algebras")
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("shapes differ")

    def apply_col(self, v: TupleElement) -> TupleElement:
        """Act on a column tuple: out_k = sum_i entry(k, i) applied to v_i."""
        if v.algebra is not self.algebra:
            raise AlgebraMismatch("tuple over a different algebra")
        if len(v) != self.cols:
            raise ShapeMismatch(f"tuple of length {len(v)} against {self.cols} columns")
        outs = []
        for k in range(self.rows):
            acc = self.algebra.zero
            for i in range(self.cols):
                acc = acc + self.entries[k][i].apply(v[i])
            outs.append(acc)
        return TupleElement(outs)

    def block_flat(self) -> np.ndarray:
        """The (rows*d) x (cols*d) real matrix of entry flats."""
        d = self.algebra.dim
        out = np.zeros((self.rows * d, self.cols * d))
        for r in range(self.rows):
            for c in range(self.cols):
                out[r * d : (r + 1) * d, c * d : (c + 1) * d] = self.entries[r][c].flat
        return out

    @classmethod
    def from_block_flat(
        cls, algebra: Algebra, rows: int, cols: int, mat: np.ndarray
    ) -> "MapMatrix":
        d = algebra.dim
        mat = np.asarray(mat, dtype=float)
        if mat.shape != (rows * d, cols * d):
            raise ShapeMismatch("block size does not match the declared shape")
        return cls(
            [
                [
                    TensorMap.from_flat(
                        algebra, mat[r * d : (r + 1) * d, c * d : (c + 1) * d]
                    )
                    for c in range(cols)
                ]
                for r in range(rows)
            ]
        )

    def allclose(self, other: "MapMatrix", tol: float = 1e-12) -> bool:
        self._match(other)
        return bool(
            np.allclose(self.block_flat(), other.block_flat(), rtol=0.0, atol=tol)
        )

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[e.to_json() for e in row] for row in self.entries],
        }

    def __repr__(self) -> str:
        return f"MapMatrix({self.algebra.name}, {self.rows}x{self.cols})"


def comp_product(f: MapMatrix, g: MapMatrix) -> MapMatrix:
    """Matrix product under entry composition: out[k][l] = sum_i f[k][i] o g[i][l].

    On block flats this is the ordinary matrix product, so
    block_flat(comp_product(f, g)) == block_flat(f) @ block_flat(g).
    """
    if f.algebra is not g.algebra:
        raise AlgebraMismatch("matrices over different algebras")
    if f.cols != g.rows:
        raise ShapeMismatch(f"{f.rows}x{f.cols} composed with {g.rows}x{g.cols}")
    out = []
    for k in range(f.rows):
        row = []
        for l in range(g.cols):
            acc = f.entries[k][0].compose(g.entries[0][l])
            for i in range(1, f.cols):
                acc = acc + f.entries[k][i].compose(g.entries[i][l])
            row.append(acc)
        out.append(row)
    return MapMatrix(out)


def invert_mapmatrix(f: MapMatrix) -> MapMatrix:
    """Inverse with respect to the composition product, via the block flat.

    Entries of the result are numeric (flat-only). Raises SingularMapMatrix
    when the relative smallest singular value of the block flat is below the
    cutoff.
    """
    if f.rows != f.cols:
        raise ShapeMismatch("only square map matrices invert")
    big = f.block_flat()
    svs = np.linalg.svd(big, compute_uv=False)
    if svs[0] == 0.0 or svs[-1] < SINGULAR_CUTOFF * svs[0]:
        raise SingularMapMatrix("block flat is singular to working precision")
    return MapMatrix.from_block_flat(f.algebra, f.rows, f.cols, np.linalg.inv(big))
