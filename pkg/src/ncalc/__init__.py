"""Calculus over finite-dimensional non-commutative normed algebras.

Derivatives of maps between powers of an algebra take values in sums of
two-sided tensor products; this package implements that calculus (symbolic
differentiation, finite-difference checks, matrices of maps) together with
the group layer built on it: shift Jacobians, basic maps and their inverses,
structure constants, brackets, invariant fields, and non-coordinate frames.
"""

from .algebra import (
    Algebra,
    AlgebraElement,
    TupleElement,
    builtin_algebra,
    complexes,
    load_algebra,
    mat2,
    quaternions,
    reals,
    tuple_norm,
)
from .errors import (
    AlgebraMismatch,
    EvalError,
    ExprSyntaxError,
    GroupSpecError,
    IndexOutOfRange,
    NcalcError,
    NonAssociative,
    NoUnit,
    ShapeMismatch,
    Singular,
    SingularMap,
    SingularMapMatrix,
    SpreadTooLarge,
    UnknownSymbol,
)
from .expr import (
    Const,
    Expr,
    Inv,
    Neg,
    PolyMap,
    Prod,
    Sum,
    TensorExpr,
    Var,
    check_chain_rule,
    compose_polymap,
    diff,
    diff_expr,
    eval_derivative,
    eval_expr,
    fd_directional,
    fd_step,
    parse_expression,
    parse_map,
    second_partial,
    to_latex,
    to_source,
)
from .geometry import Frame, VectorField, anholonomy, field_commutator, lie_derivative
from .liegroup import (
    InvariantField,
    LieGroup,
    StructureConstants,
    basis_tuple,
    builtin_group,
    load_group,
    numeric_lie_derivative,
    random_tuple,
)
from .linmap import (
    BilinearMap,
    TensorMap,
    identity_map,
    mul_bilinear,
    tensor,
    zero_bilinear,
    zero_map,
)
from .mapmatrix import AMatrix, MapMatrix, comp_product, invert_mapmatrix, star_cr, star_rc

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
