"""Shared random generators for the test suite (all seeded by the caller)."""

from __future__ import annotations

import numpy as np

from ncalc import Const, Expr, Neg, PolyMap, Prod, Sum, TupleElement, Var
from ncalc.algebra import Algebra


def random_atom(algebra: Algebra, n_in: int, rng: np.random.Generator) -> Expr:
    if rng.random() < 0.7:
        return Var(int(rng.integers(1, n_in + 1)))
    return Const(algebra.random_element(rng))


def random_term(
    algebra: Algebra, n_in: int, rng: np.random.Generator, degree: int
) -> Expr:
    k = int(rng.integers(1, degree + 1))
    factors = tuple(random_atom(algebra, n_in, rng) for _ in range(k))
    e: Expr = factors[0] if k == 1 else Prod(factors)
    if rng.random() < 0.2:
        e = Neg(e)
    return e


def random_expr(
    algebra: Algebra, n_in: int, rng: np.random.Generator, degree: int = 3
) -> Expr:
    count = int(rng.integers(1, 4))
    terms = tuple(random_term(algebra, n_in, rng, degree) for _ in range(count))
    return terms[0] if count == 1 else Sum(terms)


def random_polymap(
    algebra: Algebra,
    n_in: int,
    n_out: int,
    rng: np.random.Generator,
    degree: int = 3,
) -> PolyMap:
    return PolyMap(
        algebra,
        n_in,
        tuple(random_expr(algebra, n_in, rng, degree) for _ in range(n_out)),
    )


def random_point(
    algebra: Algebra, n: int, rng: np.random.Generator
) -> TupleElement:
    return TupleElement(algebra.random_element(rng) for _ in range(n))


def real_polynomial_expr(
    algebra: Algebra, n_in: int, rng: np.random.Generator, degree: int = 2
) -> Expr:
    """Polynomial with real scalar constants only (commutative at real points)."""
    count = int(rng.integers(1, 4))
    terms = []
    for _ in range(count):
        k = int(rng.integers(1, degree + 1))
        factors = []
        for _ in range(k):
            if rng.random() < 0.6:
                factors.append(Var(int(rng.integers(1, n_in + 1))))
            else:
                factors.append(Const(algebra.scalar(float(rng.uniform(-2, 2)))))
        terms.append(factors[0] if k == 1 else Prod(tuple(factors)))
    return terms[0] if count == 1 else Sum(tuple(terms))


def real_point(algebra: Algebra, n: int, rng: np.random.Generator) -> TupleElement:
    return TupleElement(
        algebra.scalar(float(rng.uniform(-2, 2))) for _ in range(n)
    )
