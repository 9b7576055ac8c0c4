"""Groups on A^n given by a polynomial product map, and their calculus.

A group here is the data (algebra, n, product, identity, inverse) where the
product is a polynomial map A^n x A^n -> A^n written over 2n variables
(left factor in slots 1..n, right factor in slots n+1..2n). From the
product's derivative come the two families of shift Jacobians, their values
at the identity (the basic maps psi), the inverse basic maps lambda, the
structure constants obtained by differentiating psi along itself, and the
bracket they induce on tangent tuples. Everything is checked numerically:
an identity suite of composition laws, a constancy check on the structure
constants across sample points, and the integrability residual tying the
derivatives of lambda to the structure constants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import Algebra, AlgebraElement, TupleElement, load_algebra
from .errors import GroupSpecError, NcalcError, ShapeMismatch, SpreadTooLarge
from .expr import PolyMap, TensorExpr, diff, fd_step, parse_map
from .mapmatrix import MapMatrix, comp_product, invert_mapmatrix

DEFAULT_SEED = 42
COND_LIMIT = 1e6


def random_tuple(algebra: Algebra, n: int, rng: np.random.Generator) -> TupleElement:
    """A tuple with every coordinate uniform in [-1, 1]."""
    return TupleElement(algebra.random_element(rng) for _ in range(n))


def basis_tuple(algebra: Algebra, n: int, slot: int, index: int) -> TupleElement:
    """Zero everywhere except basis vector `index` in `slot`."""
    comps = [algebra.zero for _ in range(n)]
    comps[slot] = algebra.basis(index)
    return TupleElement(comps)


def _concat(b: TupleElement, a: TupleElement) -> TupleElement:
    return TupleElement(tuple(b.components) + tuple(a.components))


def fd_matrix_derivative(
    fun: Callable[[TupleElement], np.ndarray], c: TupleElement, algebra: Algebra
) -> np.ndarray:
    """Central differences of a matrix-valued function along every direction.

    Returns an array D of shape (n, d, rows, cols): D[p, mu] is the
    derivative of fun along basis vector mu in slot p.
    """
    n = len(c)
    d = algebra.dim
    t = fd_step(c)
    base_shape = None
    out = None
    for p in range(n):
        for mu in range(d):
            h = basis_tuple(algebra, n, p, mu).scale(t)
            delta = (fun(c + h) - fun(c - h)) / (2.0 * t)
            if out is None:
                base_shape = delta.shape
                out = np.zeros((n, d) + base_shape)
            out[p, mu] = delta
    return out


def fd_jacobian(
    fun: Callable[[TupleElement], TupleElement], x: TupleElement, algebra: Algebra
) -> np.ndarray:
    """Stacked central-difference Jacobian of a tuple-valued function."""
    n = len(x)
    d = algebra.dim
    t = fd_step(x)
    cols = []
    for p in range(n):
        for mu in range(d):
            h = basis_tuple(algebra, n, p, mu).scale(t)
            cols.append((fun(x + h) - fun(x - h)).stacked() / (2.0 * t))
    return np.column_stack(cols)


@dataclass(frozen=True)
class StructureConstants:
    """Tangent-space structure constants of one side.

    ``array[o, t, q]`` is the flat3 of a bilinear map: first slot (direction)
    carries tangent index q, second slot (argument) carries tangent index t,
    output lands in component o.
    """

    side: str
    n: int
    algebra: Algebra
    array: np.ndarray  # shape (n, n, n, d, d, d)
    point: TupleElement
    spread: float

    def bilinear(self, o: int, t: int, q: int):
        from .linmap import BilinearMap

        return BilinearMap.from_flat3(self.algebra, self.array[o, t, q])

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "n": self.n,
            "spread": float(self.spread),
            "array": self.array.tolist(),
        }


class LieGroup:
    """A polynomial group chart on A^n with cached symbolic derivatives."""

    def __init__(
        self,
        algebra: Algebra,
        n: int,
        product: PolyMap,
        identity: TupleElement,
        inverse: PolyMap,
        name: str = "group",
    ):
        if product.n_in != 2 * n or product.n_out != n:
            raise ShapeMismatch("product must map 2n inputs to n outputs")
        if inverse.n_in != n or inverse.n_out != n:
            raise ShapeMismatch("inverse must map n inputs to n outputs")
        if len(identity) != n:
            raise ShapeMismatch("identity must be an n-tuple")
        self.algebra = algebra
        self.n = n
        self.product = product
        self.identity = identity
        self.inverse = inverse
        self.name = name
        self._dproduct: list[list[TensorExpr]] = diff(product)
        self._dinverse: list[list[TensorExpr]] = diff(inverse)

    # -- construction --------------------------------------------------------------

    @classmethod
    def from_sources(
        cls,
        algebra: Algebra,
        n: int,
        product_src: str,
        identity_coords: Sequence[Sequence[float]],
        inverse_src: str,
        name: str = "group",
    ) -> "LieGroup":
        product = parse_map(product_src, 2 * n, algebra)
        inverse = parse_map(inverse_src, n, algebra)
        identity = TupleElement(algebra.element(c) for c in identity_coords)
        return cls(algebra, n, product, identity, inverse, name)

    @classmethod
    def from_json(cls, doc: Mapping) -> "LieGroup":
        algebra = load_algebra(doc["algebra"])
        return cls.from_sources(
            algebra,
            int(doc["n"]),
            doc["product"],
            doc["identity"],
            doc["inverse"],
            name=str(doc.get("name", "group")),
        )

    # -- group operations ----------------------------------------------------------

    def multiply(self, b: TupleElement, a: TupleElement) -> TupleElement:
        return self.product.eval(_concat(b, a))

    def inverse_point(self, a: TupleElement) -> TupleElement:
        return self.inverse.eval(a)

    def validate(
        self,
        seed: int = DEFAULT_SEED,
        samples: int = 20,
        tol_identity: float = 1e-10,
        tol_assoc: float = 1e-9,
        tol_inverse: float = 1e-9,
    ) -> None:
        """Check the group laws on sampled points; raise GroupSpecError."""
        rng = np.random.default_rng(seed)
        e = self.identity
        for _ in range(samples):
            a = self.random_point(rng)
            b = self.random_point(rng)
            c = self.random_point(rng)
            if not self.multiply(e, a).allclose(a, tol_identity):
                raise GroupSpecError(f"{self.name}: e*a deviates from a")
            if not self.multiply(a, e).allclose(a, tol_identity):
                raise GroupSpecError(f"{self.name}: a*e deviates from a")
            left = self.multiply(self.multiply(a, b), c)
            right = self.multiply(a, self.multiply(b, c))
            if not left.allclose(right, tol_assoc):
                raise GroupSpecError(f"{self.name}: product is not associative")
            ai = self.inverse_point(a)
            if not self.multiply(a, ai).allclose(e, tol_inverse):
                raise GroupSpecError(f"{self.name}: a*inv(a) deviates from e")
            if not self.multiply(ai, a).allclose(e, tol_inverse):
                raise GroupSpecError(f"{self.name}: inv(a)*a deviates from e")

    # -- sampling ------------------------------------------------------------------

    def random_point(self, rng: np.random.Generator, attempts: int = 200) -> TupleElement:
        """Uniform [-1,1] coordinates, resampled while any needed inverse is bad.

        A candidate is rejected when evaluating the inverse map fails or when
        either basic-map block matrix has condition number above the limit.
        """
        for _ in range(attempts):
            a = random_tuple(self.algebra, self.n, rng)
            try:
                self.inverse_point(a)
                if np.linalg.cond(self.psi_left(a).block_flat()) > COND_LIMIT:
                    continue
                if np.linalg.cond(self.psi_right(a).block_flat()) > COND_LIMIT:
                    continue
            except NcalcError:
                continue
            return a
        raise GroupSpecError(f"{self.name}: could not sample a usable point")

    # -- shift Jacobians and basic maps --------------------------------------------

    def _product_jacobian(self, point: TupleElement) -> MapMatrix:
        return MapMatrix(
            [[te.eval(point) for te in row] for row in self._dproduct]
        )

    def jac_left(self, b: TupleElement, a: TupleElement) -> MapMatrix:
        """Derivative of a -> b*a, taken at (b, a)."""
        full = self._product_jacobian(_concat(b, a))
        return full.submatrix(range(self.n), range(self.n, 2 * self.n))

    def jac_right(self, a: TupleElement, b: TupleElement) -> MapMatrix:
        """Derivative of a -> a*b, taken at (a, b)."""
        full = self._product_jacobian(_concat(a, b))
        return full.submatrix(range(self.n), range(self.n))

    def psi_left(self, a: TupleElement) -> MapMatrix:
        return self.jac_left(a, self.identity)

    def psi_right(self, a: TupleElement) -> MapMatrix:
        return self.jac_right(self.identity, a)

    def lambda_left(self, a: TupleElement) -> MapMatrix:
        return invert_mapmatrix(self.psi_left(a))

    def lambda_right(self, a: TupleElement) -> MapMatrix:
        return invert_mapmatrix(self.psi_right(a))

    def inverse_jacobian(self, a: TupleElement) -> MapMatrix:
        return MapMatrix(
            [[te.eval(a) for te in row] for row in self._dinverse]
        )

    # -- identity suite ------------------------------------------------------------

    def verify_identity_suite(
        self,
        seed: int = DEFAULT_SEED,
        n_points: int = 10,
        tol_exact: float = 1e-8,
        tol_inverse: float = 1e-5,
    ) -> dict:
        """Max residuals of the shift-Jacobian identities over sampled points."""
        rng = np.random.default_rng(seed)
        triples = [
            (self.random_point(rng), self.random_point(rng), self.random_point(rng))
            for _ in range(n_points)
        ]
        residuals: dict[str, float] = {}

        def track(key: str, lhs: MapMatrix, rhs: MapMatrix) -> None:
            r = float(np.linalg.norm(lhs.block_flat() - rhs.block_flat()))
            residuals[key] = max(residuals.get(key, 0.0), r)

        def track_np(key: str, lhs: np.ndarray, rhs: MapMatrix) -> None:
            r = float(np.linalg.norm(lhs - rhs.block_flat()))
            residuals[key] = max(residuals.get(key, 0.0), r)

        e = self.identity
        ident = MapMatrix.identity(self.algebra, self.n)
        for b, c, a in triples:
            ca = self.multiply(c, a)
            bc = self.multiply(b, c)
            ab = self.multiply(a, b)
            ba = self.multiply(b, a)
            ai = self.inverse_point(a)
            bi = self.inverse_point(b)

            track(
                "left_cocycle",
                comp_product(self.jac_left(b, ca), self.jac_left(c, a)),
                self.jac_left(bc, a),
            )
            track(
                "right_cocycle",
                comp_product(self.jac_right(ab, c), self.jac_right(a, b)),
                self.jac_right(a, bc),
            )
            track("left_jac_at_identity", self.jac_left(e, a), ident)
            track("right_jac_at_identity", self.jac_right(a, e), ident)
            track(
                "left_jac_inverse",
                invert_mapmatrix(self.jac_left(b, a)),
                self.jac_left(bi, ba),
            )
            track(
                "right_jac_inverse",
                invert_mapmatrix(self.jac_right(a, b)),
                self.jac_right(ab, bi),
            )
            track("lambda_left_via_shift", self.lambda_left(a), self.jac_left(ai, a))
            track(
                "lambda_right_via_shift", self.lambda_right(a), self.jac_right(a, ai)
            )
            left_decomp = comp_product(self.psi_left(ba), self.lambda_left(a))
            right_decomp = comp_product(self.psi_right(ab), self.lambda_right(a))
            track("left_decomposition", self.jac_left(b, a), left_decomp)
            track("right_decomposition", self.jac_right(a, b), right_decomp)
            track_np(
                "left_shift_equation",
                fd_jacobian(lambda p: self.multiply(b, p), a, self.algebra),
                left_decomp,
            )
            track_np(
                "right_shift_equation",
                fd_jacobian(lambda p: self.multiply(p, b), a, self.algebra),
                right_decomp,
            )
            dinv = self.inverse_jacobian(a)
            track(
                "inverse_derivative_right_left",
                dinv,
                -comp_product(self.psi_right(ai), self.lambda_left(a)),
            )
            track(
                "inverse_derivative_left_right",
                dinv,
                -comp_product(self.psi_left(ai), self.lambda_right(a)),
            )

        eq_strings = {
            "left_cocycle": "AL(b, c*a) o AL(c, a) = AL(b*c, a)",
            "right_cocycle": "AR(a*b, c) o AR(a, b) = AR(a, b*c)",
            "left_jac_at_identity": "AL(e, a) = 1",
            "right_jac_at_identity": "AR(a, e) = 1",
            "left_jac_inverse": "AL(b, a)^-1 = AL(inv(b), b*a)",
            "right_jac_inverse": "AR(a, b)^-1 = AR(a*b, inv(b))",
            "lambda_left_via_shift": "lamL(a) = AL(inv(a), a)",
            "lambda_right_via_shift": "lamR(a) = AR(a, inv(a))",
            "left_decomposition": "AL(b, a) = psiL(b*a) o lamL(a)",
            "right_decomposition": "AR(a, b) = psiR(a*b) o lamR(a)",
            "left_shift_equation": "d/da[b*a] = psiL(b*a) o lamL(a)",
            "right_shift_equation": "d/da[a*b] = psiR(a*b) o lamR(a)",
            "inverse_derivative_right_left": "d/da[inv(a)] = -psiR(inv(a)) o lamL(a)",
            "inverse_derivative_left_right": "d/da[inv(a)] = -psiL(inv(a)) o lamR(a)",
        }
        inverse_family = {
            "inverse_derivative_right_left",
            "inverse_derivative_left_right",
        }
        identities = []
        for key, eq in eq_strings.items():
            tol = tol_inverse if key in inverse_family else tol_exact
            identities.append(
                {
                    "name": key,
                    "eq": eq,
                    "max_residual": residuals[key],
                    "tol": tol,
                    "pass": bool(residuals[key] < tol),
                }
            )
        return {
            "group": self.name,
            "seed": seed,
            "points": n_points,
            "identities": identities,
            "pass": all(item["pass"] for item in identities),
        }

    # -- structure constants -------------------------------------------------------

    def _psi_matrix(self, side: str) -> Callable[[TupleElement], np.ndarray]:
        if side == "left":
            return lambda c: self.psi_left(c).block_flat()
        if side == "right":
            return lambda c: self.psi_right(c).block_flat()
        raise ValueError("side must be 'left' or 'right'")

    def _lambda_matrix(self, side: str) -> Callable[[TupleElement], np.ndarray]:
        if side == "left":
            return lambda c: self.lambda_left(c).block_flat()
        if side == "right":
            return lambda c: self.lambda_right(c).block_flat()
        raise ValueError("side must be 'left' or 'right'")

    def _constants_at(self, side: str, c: TupleElement) -> np.ndarray:
        n, d = self.n, self.algebra.dim
        psi_of = self._psi_matrix(side)
        big_psi = psi_of(c)
        big_lambda = self._lambda_matrix(side)(c)
        dpsi = fd_matrix_derivative(psi_of, c, self.algebra)  # (n, d, nd, nd)
        out = np.zeros((n, n, n, d, d, d))
        for q in range(n):
            for mu in range(d):
                # Tangent direction e_mu in slot q, pushed to a chart velocity.
                u = big_psi[:, q * d + mu]
                du = np.einsum("pv,pvrc->rc", u.reshape(n, d), dpsi)
                m = big_lambda @ du
                for o in range(n):
                    for t in range(n):
                        out[o, t, q, :, mu, :] = m[
                            o * d : (o + 1) * d, t * d : (t + 1) * d
                        ]
        return out

    def structure_constants(
        self,
        side: str,
        seed: int = DEFAULT_SEED,
        n_points: int = 5,
        tol_spread: float = 1e-6,
        points: Sequence[TupleElement] | None = None,
    ) -> StructureConstants:
        """Differentiate the basic maps at sampled points; must be constant.

        Raises SpreadTooLarge when values at different points disagree by
        more than tol_spread.
        """
        if points is None:
            rng = np.random.default_rng(seed)
            points = [self.random_point(rng) for _ in range(n_points)]
        arrays = [self._constants_at(side, c) for c in points]
        spread = 0.0
        for i in range(len(arrays)):
            for j in range(i + 1, len(arrays)):
                spread = max(spread, float(np.max(np.abs(arrays[i] - arrays[j]))))
        result = StructureConstants(
            side, self.n, self.algebra, arrays[0], points[0], spread
        )
        if spread > tol_spread:
            raise SpreadTooLarge(
                f"{self.name}/{side}: structure constants vary by {spread:.3e}"
            )
        return result

    # -- bracket and invariant fields ----------------------------------------------

    def bracket(
        self,
        side: str,
        v: TupleElement,
        w: TupleElement,
        constants: StructureConstants | None = None,
    ) -> TupleElement:
        """The commutator the structure constants induce on tangent tuples."""
        if constants is None or constants.side != side:
            constants = self.structure_constants(side)
        vmat = np.stack([comp.coords for comp in v])
        wmat = np.stack([comp.coords for comp in w])
        plus = np.einsum("otqkmn,qm,tn->ok", constants.array, vmat, wmat)
        minus = np.einsum("otqkmn,qm,tn->ok", constants.array, wmat, vmat)
        return TupleElement.from_stacked(self.algebra, (plus - minus).ravel())

    def invariant_field(self, side: str, b: TupleElement) -> "InvariantField":
        return InvariantField(self, side, b)

    # -- integrability residual ----------------------------------------------------

    def maurer_residual(
        self,
        side: str,
        seed: int = DEFAULT_SEED,
        n_points: int = 5,
        constants: StructureConstants | None = None,
    ) -> float:
        """Residual of the integrability equation tying d(lambda) to constants.

        For tangent directions h1, h2 and lower indices al, be the
        antisymmetrized chart derivative of lambda must reproduce the
        structure constants contracted with lambda twice; the max absolute
        deviation over sampled points is returned.
        """
        if constants is None or constants.side != side:
            constants = self.structure_constants(side, seed=seed)
        n, d = self.n, self.algebra.dim
        lam_of = self._lambda_matrix(side)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_points):
            c = self.random_point(rng)
            dlam = fd_matrix_derivative(lam_of, c, self.algebra)
            dl6 = dlam.reshape(n, d, n, d, n, d)  # [al, mu, o, k, be, nu]
            curl = dl6.transpose(2, 0, 4, 3, 1, 5) - dl6.transpose(2, 4, 0, 3, 5, 1)
            lam4 = lam_of(c).reshape(n, d, n, d)  # [q, m, be, nu]
            plus = np.einsum(
                "otqkmn,qmbv,tnau->oabkuv", constants.array, lam4, lam4
            )
            minus = np.einsum(
                "otqkmn,qmau,tnbv->oabkuv", constants.array, lam4, lam4
            )
            worst = max(worst, float(np.max(np.abs(curl - (plus - minus)))))
        return worst


class InvariantField:
    """The field a -> psi_side(a) applied to a fixed tangent tuple."""

    def __init__(self, group: LieGroup, side: str, b: TupleElement):
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.group = group
        self.side = side
        self.b = b

    def eval(self, a: TupleElement) -> TupleElement:
        psi = (
            self.group.psi_left(a)
            if self.side == "left"
            else self.group.psi_right(a)
        )
        return psi.apply_col(self.b)

    def __call__(self, a: TupleElement) -> TupleElement:
        return self.eval(a)


def numeric_lie_derivative(
    v: Callable[[TupleElement], TupleElement],
    w: Callable[[TupleElement], TupleElement],
    x: TupleElement,
    algebra: Algebra,
) -> TupleElement:
    """Finite-difference Lie derivative of w along v for callable fields."""
    jv = fd_jacobian(v, x, algebra)
    jw = fd_jacobian(w, x, algebra)
    out = jw @ v(x).stacked() - jv @ w(x).stacked()
    return TupleElement.from_stacked(algebra, out)


# -- built-in groups ---------------------------------------------------------------


def _quat_mult() -> LieGroup:
    from .algebra import quaternions

    alg = quaternions()
    return LieGroup.from_sources(
        alg,
        1,
        "y1 = x1*x2",
        [[1.0, 0.0, 0.0, 0.0]],
        "y1 = inv(x1)",
        name="quat-mult",
    )


def _quat_affine() -> LieGroup:
    from .algebra import quaternions

    alg = quaternions()
    return LieGroup.from_sources(
        alg,
        2,
        "y1 = x1*x3; y2 = x1*x4 + x2",
        [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
        "y1 = inv(x1); y2 = -inv(x1)*x2",
        name="quat-affine",
    )


def _complex_mult() -> LieGroup:
    from .algebra import complexes

    alg = complexes()
    return LieGroup.from_sources(
        alg,
        1,
        "y1 = x1*x2",
        [[1.0, 0.0]],
        "y1 = inv(x1)",
        name="complex-mult",
    )


_BUILTIN_GROUPS: dict[str, Callable[[], LieGroup]] = {
    "quat-mult": _quat_mult,
    "quat-affine": _quat_affine,
    "complex-mult": _complex_mult,
}


def builtin_group(name: str) -> LieGroup:
    try:
        return _BUILTIN_GROUPS[name]()
    except KeyError:
        raise KeyError(
            f"unknown group {name!r}; choose from {sorted(_BUILTIN_GROUPS)}"
        ) from None


def load_group(source: str | Mapping) -> LieGroup:
    """Resolve a builtin name, a JSON string, or a parsed JSON mapping."""
    if isinstance(source, Mapping):
        return LieGroup.from_json(source)
    if source in _BUILTIN_GROUPS:
        return _BUILTIN_GROUPS[source]()
    return LieGroup.from_json(json.loads(source))
