"""Polynomial-with-inverses expressions over an algebra, and their calculus.

Expressions are trees of constants, 1-based variables, sums, ordered
products, negations, and inverses; ``x1^3`` is accepted as sugar for a
threefold product. A ``PolyMap`` bundles components y1..ym of such
expressions into a map A^n -> A^m.

The derivative of a component with respect to one variable is a
``TensorExpr``: a list of (left, right) expression pairs standing for
h -> sum_s l_s(x) * h * r_s(x). Differentiation is exact and symbolic
(term rewriting); finite differences exist only as an independent check.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import Algebra, AlgebraElement, TupleElement
from .errors import EvalError, ExprSyntaxError, IndexOutOfRange, UnknownSymbol
from .linmap import XY, YX, BilinearMap, TensorMap, tensor
from .mapmatrix import MapMatrix, comp_product

CBRT_EPS = float(np.cbrt(np.finfo(float).eps))


# -- AST ---------------------------------------------------------------------------


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: AlgebraElement


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple[Expr, ...]


@dataclass(frozen=True)
class Prod(Expr):
    factors: tuple[Expr, ...]


@dataclass(frozen=True)
class Neg(Expr):
    inner: Expr


@dataclass(frozen=True)
class Inv(Expr):
    inner: Expr


def _is_unit_const(e: Expr, algebra: Algebra) -> bool:
    return isinstance(e, Const) and np.array_equal(e.value.coords, algebra.unit)


def _is_zero_const(e: Expr) -> bool:
    return isinstance(e, Const) and not e.value.coords.any()


def _times(u: Expr | None, v: Expr | None, algebra: Algebra) -> Expr | None:
    """Product with literal-unit folding; None marks a literal zero."""
    if u is None or v is None:
        return None
    if _is_zero_const(u) or _is_zero_const(v):
        return None
    if _is_unit_const(u, algebra):
        return v
    if _is_unit_const(v, algebra):
        return u
    if isinstance(u, Const) and isinstance(v, Const):
        return Const(u.value * v.value)
    uf = u.factors if isinstance(u, Prod) else (u,)
    vf = v.factors if isinstance(v, Prod) else (v,)
    return Prod(uf + vf)


def _neg(u: Expr | None) -> Expr | None:
    if u is None:
        return None
    if isinstance(u, Const):
        return Const(-u.value)
    if isinstance(u, Neg):
        return u.inner
    return Neg(u)


# -- evaluation --------------------------------------------------------------------


def eval_expr(e: Expr, x: TupleElement) -> AlgebraElement:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        if e.index > len(x):
            raise IndexOutOfRange(f"x{e.index} against a tuple of length {len(x)}")
        return x[e.index - 1]
    if isinstance(e, Sum):
        acc = eval_expr(e.terms[0], x)
        for t in e.terms[1:]:
            acc = acc + eval_expr(t, x)
        return acc
    if isinstance(e, Prod):
        acc = eval_expr(e.factors[0], x)
        for f in e.factors[1:]:
            acc = acc * eval_expr(f, x)
        return acc
    if isinstance(e, Neg):
        return -eval_expr(e.inner, x)
    if isinstance(e, Inv):
        return eval_expr(e.inner, x).inv()
    raise EvalError(f"unknown node {type(e).__name__}")


# -- differentiation ---------------------------------------------------------------

TensorPairs = list[tuple[Expr, Expr]]


def diff_expr(e: Expr, j: int, algebra: Algebra) -> TensorPairs:
    """Tensor-form partial derivative with respect to variable j (1-based).

    Rules: constants die; a matched variable yields the pair (1, 1); sums
    differentiate termwise; for a product u*v each pair (l, r) of du becomes
    (l, r*v) and each pair of dv becomes (u*l, r); for inv(u) each pair
    (l, r) of du becomes (-inv(u)*l, r*inv(u)). Literal zeros are dropped,
    nothing else is simplified.
    """
    one = Const(algebra.one)
    if isinstance(e, Const):
        return []
    if isinstance(e, Var):
        return [(one, one)] if e.index == j else []
    if isinstance(e, Sum):
        out: TensorPairs = []
        for t in e.terms:
            out.extend(diff_expr(t, j, algebra))
        return out
    if isinstance(e, Neg):
        return _clean((_neg(l), r) for l, r in diff_expr(e.inner, j, algebra))
    if isinstance(e, Prod):
        return _diff_product(e.factors, j, algebra)
    if isinstance(e, Inv):
        iu = Inv(e.inner)
        return _clean(
            (_neg(_times(iu, l, algebra)), _times(r, iu, algebra))
            for l, r in diff_expr(e.inner, j, algebra)
        )
    raise EvalError(f"unknown node {type(e).__name__}")


def _clean(pairs) -> TensorPairs:
    return [(l, r) for l, r in pairs if l is not None and r is not None]


def _diff_product(factors: tuple[Expr, ...], j: int, algebra: Algebra) -> TensorPairs:
    if len(factors) == 1:
        return diff_expr(factors[0], j, algebra)
    u = factors[0]
    v = factors[1] if len(factors) == 2 else Prod(factors[1:])
    du = diff_expr(u, j, algebra)
    dv = diff_expr(v, j, algebra)
    out = _clean((l, _times(r, v, algebra)) for l, r in du)
    out.extend(_clean((_times(u, l, algebra), r) for l, r in dv))
    return out


@dataclass(frozen=True)
class TensorExpr:
    """A symbolic two-sided form: h -> sum_s left_s(x) * h * right_s(x)."""

    algebra: Algebra
    pairs: tuple[tuple[Expr, Expr], ...]

    def eval(self, x: TupleElement) -> TensorMap:
        terms = [(eval_expr(l, x), eval_expr(r, x)) for l, r in self.pairs]
        return TensorMap(self.algebra, terms)

    def diff_at(self, i: int, x: TupleElement) -> BilinearMap:
        """Derivative by variable i at x, as a bilinear map.

        First slot is the direction of differentiation, second the argument
        of the original map: (u, h) -> d/dt self(x + t u)(h).
        """
        terms = []
        for l_expr, r_expr in self.pairs:
            r_val = eval_expr(r_expr, x)
            l_val = eval_expr(l_expr, x)
            for p, q in diff_expr(l_expr, i, self.algebra):
                terms.append((eval_expr(p, x), eval_expr(q, x), r_val, XY))
            for p, q in diff_expr(r_expr, i, self.algebra):
                terms.append((l_val, eval_expr(p, x), eval_expr(q, x), YX))
        return BilinearMap(self.algebra, terms)

    def to_source(self) -> list[list[str]]:
        return [[to_source(l), to_source(r)] for l, r in self.pairs]

    def pretty(self) -> str:
        if not self.pairs:
            return "0"
        return " + ".join(
            f"{to_source(l)} (x) {to_source(r)}" for l, r in self.pairs
        )

    def latex(self) -> str:
        if not self.pairs:
            return "0"
        return " + ".join(
            f"{to_latex(l)} \\otimes {to_latex(r)}" for l, r in self.pairs
        )


@dataclass(frozen=True)
class PolyMap:
    """A map A^n_in -> A^n_out with expression components y1..y{n_out}."""

    algebra: Algebra
    n_in: int
    components: tuple[Expr, ...]

    @property
    def n_out(self) -> int:
        return len(self.components)

    def eval(self, x: TupleElement) -> TupleElement:
        if len(x) != self.n_in:
            raise IndexOutOfRange(
                f"map of arity {self.n_in} applied to a {len(x)}-tuple"
            )
        if x.algebra is not self.algebra:
            raise EvalError("point belongs to a different algebra")
        return TupleElement(eval_expr(c, x) for c in self.components)

    def __call__(self, x: TupleElement) -> TupleElement:
        return self.eval(x)

    def to_source(self) -> str:
        return "; ".join(
            f"y{k + 1} = {to_source(c)}" for k, c in enumerate(self.components)
        )


def diff(f: PolyMap) -> list[list[TensorExpr]]:
    """The full symbolic derivative: entry [k][j] is d y{k+1} / d x{j+1}."""
    return [
        [
            TensorExpr(f.algebra, tuple(diff_expr(c, j + 1, f.algebra)))
            for j in range(f.n_in)
        ]
        for c in f.components
    ]


def eval_derivative(f: PolyMap, x: TupleElement) -> MapMatrix:
    """The derivative at x as an n_out x n_in matrix of tensor maps."""
    sym = diff(f)
    return MapMatrix([[te.eval(x) for te in row] for row in sym])


def second_partial(f: PolyMap, i: int, j: int, x: TupleElement) -> list[BilinearMap]:
    """d2 y / dx^i dx^j at x, one bilinear map per output component.

    The outer derivative is by x^i and fills the first slot, the inner by
    x^j fills the second: result(u, w) = d_i [ d_j f (w) ] (u).
    """
    out = []
    for c in f.components:
        te = TensorExpr(f.algebra, tuple(diff_expr(c, j, f.algebra)))
        out.append(te.diff_at(i, x))
    return out


def fd_step(x: TupleElement) -> float:
    return CBRT_EPS * max(1.0, x.norm())


def fd_directional(
    f: PolyMap, x: TupleElement, h: TupleElement, step: float | None = None
) -> TupleElement:
    """Central-difference directional derivative of f at x along h."""
    t = fd_step(x) if step is None else step
    plus = f.eval(x + h.scale(t))
    minus = f.eval(x - h.scale(t))
    return (plus - minus).scale(1.0 / (2.0 * t))


def subst_expr(e: Expr, replacements: Sequence[Expr]) -> Expr:
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        if e.index > len(replacements):
            raise IndexOutOfRange(f"x{e.index} against {len(replacements)} inputs")
        return replacements[e.index - 1]
    if isinstance(e, Sum):
        return Sum(tuple(subst_expr(t, replacements) for t in e.terms))
    if isinstance(e, Prod):
        return Prod(tuple(subst_expr(t, replacements) for t in e.factors))
    if isinstance(e, Neg):
        return Neg(subst_expr(e.inner, replacements))
    if isinstance(e, Inv):
        return Inv(subst_expr(e.inner, replacements))
    raise EvalError(f"unknown node {type(e).__name__}")


def compose_polymap(g: PolyMap, f: PolyMap) -> PolyMap:
    """g after f, by substituting f's components into g's variables."""
    if g.algebra is not f.algebra:
        raise EvalError("maps over different algebras do not compose")
    if g.n_in != f.n_out:
        raise IndexOutOfRange(
            f"outer arity {g.n_in} against inner output {f.n_out}"
        )
    return PolyMap(
        f.algebra,
        f.n_in,
        tuple(subst_expr(c, f.components) for c in g.components),
    )


def check_chain_rule(g: PolyMap, f: PolyMap, x: TupleElement) -> float:
    """Frobenius residual between D(g o f)(x) and Dg(f(x)) composed with Df(x)."""
    direct = eval_derivative(compose_polymap(g, f), x)
    chained = comp_product(eval_derivative(g, f.eval(x)), eval_derivative(f, x))
    return float(
        np.linalg.norm(direct.block_flat() - chained.block_flat())
    )


# -- source rendering --------------------------------------------------------------


def _fmt_real(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))  # shortest digits that reparse to the same float


def _const_source(value: AlgebraElement) -> str:
    alg = value.algebra
    coords = value.coords
    if np.array_equal(coords, coords[np.argmax(alg.unit != 0)] * alg.unit) and (
        np.count_nonzero(alg.unit) == 1
    ):
        # Scalar multiples of a one-hot unit render as bare reals.
        scale = coords[int(np.argmax(alg.unit != 0))]
        return _fmt_real(scale)
    for name, idx in alg.symbols.items():
        basis = np.zeros(alg.dim)
        basis[idx] = 1.0
        if np.array_equal(coords, basis):
            return name
        if np.array_equal(coords, -basis):
            return f"-{name}"
    return "q(" + ",".join(_fmt_real(c) for c in coords) + ")"


def to_source(e: Expr) -> str:
    """Render back to the grammar accepted by parse_map."""
    if isinstance(e, Const):
        return _const_source(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Sum):
        parts = [to_source(e.terms[0])]
        for t in e.terms[1:]:
            s = to_source(t)
            parts.append(f"- {s[1:]}" if s.startswith("-") else f"+ {s}")
        return " ".join(parts)
    if isinstance(e, Prod):
        return "*".join(_wrap_factor(f) for f in e.factors)
    if isinstance(e, Neg):
        return "-" + _wrap_factor(e.inner)
    if isinstance(e, Inv):
        return f"inv({to_source(e.inner)})"
    raise EvalError(f"unknown node {type(e).__name__}")


def _wrap_factor(e: Expr) -> str:
    s = to_source(e)
    if isinstance(e, (Sum, Neg)) or s.startswith("-"):
        return f"({s})"
    return s


def to_latex(e: Expr) -> str:
    if isinstance(e, Const):
        s = _const_source(e.value)
        return s.replace("q(", "\\mathrm{q}(")
    if isinstance(e, Var):
        return f"x^{{{e.index}}}"
    if isinstance(e, Sum):
        parts = [to_latex(e.terms[0])]
        for t in e.terms[1:]:
            s = to_latex(t)
            parts.append(f"- {s[1:]}" if s.startswith("-") else f"+ {s}")
        return " ".join(parts)
    if isinstance(e, Prod):
        return " ".join(_wrap_latex(f) for f in e.factors)
    if isinstance(e, Neg):
        return "-" + _wrap_latex(e.inner)
    if isinstance(e, Inv):
        return f"{{{_wrap_latex(e.inner)}}}^{{-1}}"
    raise EvalError(f"unknown node {type(e).__name__}")


def _wrap_latex(e: Expr) -> str:
    s = to_latex(e)
    if isinstance(e, (Sum, Neg)):
        return f"\\left({s}\\right)"
    return s


# -- parsing -----------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^(),;=]))"
)

_VAR_RE = re.compile(r"^x(\d+)$")
_OUT_RE = re.compile(r"^y(\d+)$")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == m.start():
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(src) - len(stripped)
            raise ExprSyntaxError(f"unexpected character {src[bad_at]!r}", bad_at)
        for kind in ("number", "name", "op"):
            text = m.group(kind)
            if text is not None:
                tokens.append(_Token(kind, text, m.start(kind)))
                break
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, src: str, n_in: int, algebra: Algebra):
        self.src = src
        self.n_in = n_in
        self.algebra = algebra
        self.tokens = _tokenize(src)
        self.i = 0

    # -- token plumbing --

    def _peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of input", len(self.src))
        self.i += 1
        return tok

    def _accept_op(self, *ops: str) -> _Token | None:
        tok = self._peek()
        if tok is not None and tok.kind == "op" and tok.text in ops:
            self.i += 1
            return tok
        return None

    def _expect_op(self, op: str) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ExprSyntaxError(f"expected {op!r}", len(self.src))
        if tok.kind != "op" or tok.text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {tok.text!r}", tok.pos)
        self.i += 1
        return tok

    # -- grammar --

    def parse_map(self) -> PolyMap:
        comps: dict[int, Expr] = {}
        while True:
            self._statement(comps)
            if self._accept_op(";") is None:
                break
            if self._peek() is None:
                break  # tolerate one trailing separator
        tok = self._peek()
        if tok is not None:
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.pos)
        m = len(comps)
        missing = [k for k in range(1, m + 1) if k not in comps]
        if missing:
            raise ExprSyntaxError(
                f"outputs must cover y1..y{m}; missing y{missing[0]}", len(self.src)
            )
        return PolyMap(
            self.algebra, self.n_in, tuple(comps[k] for k in range(1, m + 1))
        )

    def parse_single(self) -> Expr:
        e = self._expr()
        tok = self._peek()
        if tok is not None:
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.pos)
        return e

    def _statement(self, comps: dict[int, Expr]) -> None:
        tok = self._next()
        m = _OUT_RE.match(tok.text) if tok.kind == "name" else None
        if m is None:
            raise ExprSyntaxError(
                f"expected an output variable like y1, found {tok.text!r}", tok.pos
            )
        idx = int(m.group(1))
        if idx < 1:
            raise IndexOutOfRange("output indices start at y1")
        if idx in comps:
            raise ExprSyntaxError(f"output y{idx} defined twice", tok.pos)
        self._expect_op("=")
        comps[idx] = self._expr()

    def _expr(self) -> Expr:
        terms = [self._term()]
        while True:
            if self._accept_op("+"):
                terms.append(self._term())
            elif self._accept_op("-"):
                terms.append(Neg(self._term()))
            else:
                break
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def _term(self) -> Expr:
        factors = [self._factor()]
        while self._accept_op("*"):
            factors.append(self._factor())
        return factors[0] if len(factors) == 1 else Prod(tuple(factors))

    def _factor(self) -> Expr:
        if self._accept_op("-"):
            return Neg(self._factor())
        atom = self._atom()
        if self._accept_op("^"):
            tok = self._next()
            if tok.kind != "number" or not tok.text.isdigit():
                raise ExprSyntaxError("exponent must be a plain integer", tok.pos)
            n = int(tok.text)
            if n == 0:
                return Const(self.algebra.one)
            return atom if n == 1 else Prod((atom,) * n)
        return atom

    def _atom(self) -> Expr:
        tok = self._next()
        if tok.kind == "number":
            return Const(self.algebra.scalar(float(tok.text)))
        if tok.kind == "op" and tok.text == "(":
            e = self._expr()
            self._expect_op(")")
            return e
        if tok.kind == "name":
            return self._name_atom(tok)
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.pos)

    def _name_atom(self, tok: _Token) -> Expr:
        m = _VAR_RE.match(tok.text)
        if m:
            idx = int(m.group(1))
            if idx < 1 or idx > self.n_in:
                raise IndexOutOfRange(
                    f"variable x{idx} outside arity {self.n_in}"
                )
            return Var(idx)
        if tok.text == "inv":
            self._expect_op("(")
            e = self._expr()
            self._expect_op(")")
            return Inv(e)
        if tok.text == "q":
            return Const(self._coords_literal())
        sym = self.algebra.symbol_element(tok.text)
        if sym is not None:
            return Const(sym)
        raise UnknownSymbol(
            f"symbol {tok.text!r} is not defined over {self.algebra.name}", tok.pos
        )

    def _coords_literal(self) -> AlgebraElement:
        self._expect_op("(")
        coords = [self._real()]
        while self._accept_op(","):
            coords.append(self._real())
        close = self._expect_op(")")
        if len(coords) != self.algebra.dim:
            raise ExprSyntaxError(
                f"q(...) needs {self.algebra.dim} coordinates over "
                f"{self.algebra.name}, got {len(coords)}",
                close.pos,
            )
        return self.algebra.element(coords)

    def _real(self) -> float:
        sign = -1.0 if self._accept_op("-") else 1.0
        tok = self._next()
        if tok.kind != "number":
            raise ExprSyntaxError(f"expected a number, found {tok.text!r}", tok.pos)
        return sign * float(tok.text)


def parse_map(src: str, n_in: int, algebra: Algebra) -> PolyMap:
    """Parse 'y1 = ...; y2 = ...' source into a PolyMap with n_in inputs."""
    return _Parser(src, n_in, algebra).parse_map()


def parse_expression(src: str, n_in: int, algebra: Algebra) -> Expr:
    """Parse a single expression (no output variable)."""
    return _Parser(src, n_in, algebra).parse_single()
