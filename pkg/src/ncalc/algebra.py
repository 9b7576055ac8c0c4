"""Finite-dimensional associative unital real algebras given by basis tables.

An algebra of dimension d is described by a d x d x d structure table:
``table[i, j, k]`` is the coefficient of basis vector e_k in the product
e_i * e_j. Elements are real coordinate vectors over that basis, and the norm
is the Euclidean norm of the coordinates. Built-in tables cover the reals,
the complex numbers, the quaternions, and the algebra of real 2x2 matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlgebraMismatch, NonAssociative, NoUnit, Singular

# Relative smallest-singular-value threshold below which inverses are refused.
SINGULAR_CUTOFF = 1e-10


def _as_coords(dim: int, values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (dim,):
        raise ValueError(f"expected {dim} coordinates, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Algebra:
    """A validated structure-constant algebra.

    Instances act as handles: elements interoperate only when they carry the
    same ``Algebra`` instance. Construction validates associativity on all
    basis triples and that ``unit`` is a two-sided identity; both checks are
    exact table arithmetic, not sampled.
    """

    name: str
    dim: int
    table: np.ndarray
    unit: np.ndarray
    symbols: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=float)
        if table.shape != (self.dim,) * 3:
            raise ValueError(f"table must have shape {(self.dim,) * 3}")
        unit = _as_coords(self.dim, self.unit)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "unit", unit)
        # (e_i e_j) e_k vs e_i (e_j e_k), all triples at once.
        left = np.einsum("ijm,mkl->ijkl", table, table)
        right = np.einsum("jkm,iml->ijkl", table, table)
        if not np.array_equal(left, right):
            bad = np.argwhere(left != right)[0]
            raise NonAssociative(
                f"{self.name}: basis triple ({bad[0]},{bad[1]},{bad[2]}) "
                "breaks associativity"
            )
        ident = np.eye(self.dim)
        if not (
            np.array_equal(self.left_matrix(unit), ident)
            and np.array_equal(self.right_matrix(unit), ident)
        ):
            raise NoUnit(f"{self.name}: declared unit is not a two-sided identity")

    # -- raw coordinate operations -------------------------------------------------

    def mul_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Coordinates of the product of two coordinate vectors."""
        return np.einsum("i,j,ijk->k", a, b, self.table)

    def left_matrix(self, a: np.ndarray) -> np.ndarray:
        """Matrix of h -> a*h acting on coordinates."""
        return np.einsum("i,ijk->kj", a, self.table)

    def right_matrix(self, b: np.ndarray) -> np.ndarray:
        """Matrix of h -> h*b acting on coordinates."""
        return np.einsum("j,ijk->ki", b, self.table)

    # -- element constructors ------------------------------------------------------

    def element(self, values: Sequence[float]) -> AlgebraElement:
        return AlgebraElement(self, _as_coords(self.dim, values))

    def basis(self, i: int) -> AlgebraElement:
        coords = np.zeros(self.dim)
        coords[i] = 1.0
        return AlgebraElement(self, coords)

    def basis_elements(self) -> list[AlgebraElement]:
        return [self.basis(i) for i in range(self.dim)]

    def scalar(self, value: float) -> AlgebraElement:
        return AlgebraElement(self, float(value) * self.unit)

    @property
    def one(self) -> AlgebraElement:
        return AlgebraElement(self, self.unit.copy())

    @property
    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, np.zeros(self.dim))

    def random_element(self, rng: np.random.Generator) -> AlgebraElement:
        """Element with coordinates uniform in [-1, 1]."""
        return AlgebraElement(self, rng.uniform(-1.0, 1.0, self.dim))

    def symbol_element(self, name: str) -> AlgebraElement | None:
        idx = self.symbols.get(name)
        return None if idx is None else self.basis(idx)

    # -- serialization -------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "unit": self.unit.tolist(),
            "table": self.table.ravel().tolist(),
            "symbols": dict(self.symbols),
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "Algebra":
        dim = int(doc["dim"])
        table = np.asarray(doc["table"], dtype=float).reshape(dim, dim, dim)
        return cls(
            name=str(doc.get("name", "custom")),
            dim=dim,
            table=table,
            unit=np.asarray(doc["unit"], dtype=float),
            symbols={str(k): int(v) for k, v in doc.get("symbols", {}).items()},
        )

    def __repr__(self) -> str:
        return f"Algebra({self.name}, dim={self.dim})"


class AlgebraElement:
    """An element of a structure-constant algebra (a real coordinate vector)."""

    __slots__ = ("algebra", "coords")

    def __init__(self, algebra: Algebra, coords: np.ndarray):
        self.algebra = algebra
        self.coords = np.asarray(coords, dtype=float)

    def _check(self, other: "AlgebraElement") -> None:
        if self.algebra is not other.algebra:
            raise AlgebraMismatch(
                f"elements of {self.algebra.name} and {other.algebra.name} do not mix"
            )

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, self.coords + other.coords)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, self.coords - other.coords)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, -self.coords)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement(
                self.algebra, self.algebra.mul_coords(self.coords, other.coords)
            )
        return AlgebraElement(self.algebra, self.coords * float(other))

    def __rmul__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.algebra, float(scalar) * self.coords)

    def __truediv__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.coords / float(scalar))

    def __pow__(self, n: int) -> "AlgebraElement":
        if n < 0:
            return self.inv() ** (-n)
        out = self.algebra.one
        for _ in range(n):
            out = out * self
        return out

    def inv(self) -> "AlgebraElement":
        """Two-sided inverse, via the left-multiplication matrix.

        Raises Singular when the relative smallest singular value of that
        matrix is below the cutoff. In a finite-dimensional associative
        unital algebra a one-sided inverse is automatically two-sided.
        """
        lmat = self.algebra.left_matrix(self.coords)
        svs = np.linalg.svd(lmat, compute_uv=False)
        if svs[0] == 0.0 or svs[-1] < SINGULAR_CUTOFF * svs[0]:
            raise Singular(f"element of {self.algebra.name} is not invertible")
        return AlgebraElement(self.algebra, np.linalg.solve(lmat, self.algebra.unit))

    def norm(self) -> float:
        """Euclidean norm of the coordinates."""
        return float(np.linalg.norm(self.coords))

    def allclose(self, other: "AlgebraElement", tol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coords, other.coords, rtol=0.0, atol=tol))

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coords) <= tol))

    def __repr__(self) -> str:
        vals = ", ".join(format(v, "g") for v in self.coords)
        return f"<{self.algebra.name}: [{vals}]>"


class TupleElement:
    """A point of A^n: an ordered tuple of elements of one algebra."""

    __slots__ = ("algebra", "components")

    def __init__(self, components: Iterable[AlgebraElement]):
        comps = tuple(components)
        if not comps:
            raise ValueError("empty tuple")
        algebra = comps[0].algebra
        for c in comps[1:]:
            if c.algebra is not algebra:
                raise AlgebraMismatch("tuple components from different algebras")
        self.algebra = algebra
        self.components = comps

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> AlgebraElement:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "TupleElement") -> "TupleElement":
        return TupleElement(a + b for a, b in zip(self.components, other.components))

    def __sub__(self, other: "TupleElement") -> "TupleElement":
        return TupleElement(a - b for a, b in zip(self.components, other.components))

    def __neg__(self) -> "TupleElement":
        return TupleElement(-a for a in self.components)

    def scale(self, t: float) -> "TupleElement":
        return TupleElement(t * a for a in self.components)

    def norm(self) -> float:
        """Max of the component norms."""
        return max(c.norm() for c in self.components)

    def stacked(self) -> np.ndarray:
        """All coordinates concatenated into one vector of length n*dim."""
        return np.concatenate([c.coords for c in self.components])

    @classmethod
    def from_stacked(cls, algebra: Algebra, vec: np.ndarray) -> "TupleElement":
        d = algebra.dim
        if len(vec) % d:
            raise ValueError("stacked length is not a multiple of the dimension")
        return cls(
            AlgebraElement(algebra, np.array(vec[i : i + d]))
            for i in range(0, len(vec), d)
        )

    def allclose(self, other: "TupleElement", tol: float = 1e-12) -> bool:
        return len(self) == len(other) and all(
            a.allclose(b, tol) for a, b in zip(self.components, other.components)
        )

    def to_json(self) -> list[list[float]]:
        return [c.coords.tolist() for c in self.components]

    def __repr__(self) -> str:
        return "(" + ", ".join(repr(c) for c in self.components) + ")"


def tuple_norm(x: TupleElement) -> float:
    return x.norm()


# -- built-in algebras -------------------------------------------------------------


def _real_table() -> np.ndarray:
    return np.ones((1, 1, 1))


def _complex_table() -> np.ndarray:
    t = np.zeros((2, 2, 2))
    t[0, 0, 0] = 1.0
    t[0, 1, 1] = 1.0
    t[1, 0, 1] = 1.0
    t[1, 1, 0] = -1.0
    return t


def _quaternion_table() -> np.ndarray:
    # Basis order (1, i, j, k); i^2 = j^2 = k^2 = -1, ij = k cyclically.
    t = np.zeros((4, 4, 4))
    for j in range(4):
        t[0, j, j] = 1.0
        t[j, 0, j] = 1.0
    t[1, 1, 0] = t[2, 2, 0] = t[3, 3, 0] = -1.0
    t[1, 2, 3] = 1.0
    t[2, 1, 3] = -1.0
    t[2, 3, 1] = 1.0
    t[3, 2, 1] = -1.0
    t[3, 1, 2] = 1.0
    t[1, 3, 2] = -1.0
    return t


def _mat2_table() -> np.ndarray:
    # Basis order (E11, E12, E21, E22); E_ab E_cd = delta_bc E_ad.
    idx = {(0, 0): 0, (0, 1): 1, (1, 0): 2, (1, 1): 3}
    t = np.zeros((4, 4, 4))
    for (a, b), i in idx.items():
        for (c, d), j in idx.items():
            if b == c:
                t[i, j, idx[(a, d)]] = 1.0
    return t


def _build_builtins() -> dict[str, Algebra]:
    return {
        "real": Algebra("real", 1, _real_table(), np.array([1.0])),
        "complex": Algebra(
            "complex", 2, _complex_table(), np.array([1.0, 0.0]), {"i": 1}
        ),
        "quaternion": Algebra(
            "quaternion",
            4,
            _quaternion_table(),
            np.array([1.0, 0.0, 0.0, 0.0]),
            {"i": 1, "j": 2, "k": 3},
        ),
        "mat2": Algebra(
            "mat2", 4, _mat2_table(), np.array([1.0, 0.0, 0.0, 1.0])
        ),
    }


_BUILTINS: dict[str, Algebra] = _build_builtins()


def builtin_algebra(name: str) -> Algebra:
    """One of the shipped algebras: real, complex, quaternion, mat2."""
    try:
        return _BUILTINS[name]
    except KeyError:
        raise KeyError(
            f"unknown algebra {name!r}; choose from {sorted(_BUILTINS)}"
        ) from None


def quaternions() -> Algebra:
    return _BUILTINS["quaternion"]


def complexes() -> Algebra:
    return _BUILTINS["complex"]


def reals() -> Algebra:
    return _BUILTINS["real"]


def mat2() -> Algebra:
    return _BUILTINS["mat2"]


def load_algebra(source: str | Mapping) -> Algebra:
    """Resolve a builtin name, a JSON string, or an already-parsed JSON mapping."""
    if isinstance(source, Mapping):
        return Algebra.from_json(source)
    if source in _BUILTINS:
        return _BUILTINS[source]
    return Algebra.from_json(json.loads(source))
