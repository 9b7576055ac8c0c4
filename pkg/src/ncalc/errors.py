"""Exception types shared across the package."""

from __future__ import annotations


class NcalcError(Exception):
    """Base class for all package errors."""


class AlgebraMismatch(NcalcError):
    """Operands belong to different algebra instances."""


class NonAssociative(NcalcError):
    """A structure-constant table fails associativity on some basis triple."""


class NoUnit(NcalcError):
    """The declared unit does not act as a two-sided identity."""


class Singular(NcalcError):
    """An algebra element has no inverse (to working precision)."""


class SingularMap(NcalcError):
    """A linear map (tensor form) is not invertible."""


class SingularMapMatrix(NcalcError):
    """A matrix of maps is not invertible as a block linear system."""


class ShapeMismatch(NcalcError):
    """Matrix shapes are incompatible for the requested product."""


class ExprSyntaxError(NcalcError):
    """Source text fails to parse; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSymbol(ExprSyntaxError):
    """A literal symbol is not defined for the chosen algebra."""


class IndexOutOfRange(NcalcError):
    """A variable or output index is outside the declared arity."""


class EvalError(NcalcError):
    """Evaluation of an expression failed (e.g. inverse of a singular value)."""


class GroupSpecError(NcalcError):
    """A group description fails its defining laws (identity/associativity/inverse)."""


class SpreadTooLarge(NcalcError):
    """Structure constants disagree across sample points beyond tolerance."""
