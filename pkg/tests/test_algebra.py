import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncalc import (
    Algebra,
    AlgebraMismatch,
    NonAssociative,
    NoUnit,
    Singular,
    TupleElement,
    builtin_algebra,
    complexes,
    load_algebra,
    mat2,
    quaternions,
    reals,
    tuple_norm,
)

ALL_NAMES = ["real", "complex", "quaternion", "mat2"]


@pytest.mark.parametrize("name", ALL_NAMES)
def test_builtin_tables_validate(name):
    alg = builtin_algebra(name)
    assert alg.dim in (1, 2, 4)
    assert alg.one.allclose(alg.one)


@pytest.mark.parametrize("name", ["quaternion", "mat2"])
def test_associativity_brute_force(name):
    # Independent oracle: triple products through element arithmetic.
    alg = builtin_algebra(name)
    basis = alg.basis_elements()
    for a in basis:
        for b in basis:
            for c in basis:
                left = (a * b) * c
                right = a * (b * c)
                assert np.array_equal(left.coords, right.coords)


def test_tampered_table_raises():
    alg = quaternions()
    bad = alg.table.copy()
    bad[1, 2, 3] = -1.0  # flip i*j
    with pytest.raises(NonAssociative):
        Algebra("broken", 4, bad, alg.unit)


def test_wrong_unit_raises():
    alg = quaternions()
    with pytest.raises(NoUnit):
        Algebra("broken", 4, alg.table, np.array([0.0, 1.0, 0.0, 0.0]))


def test_quaternion_products():
    H = quaternions()
    one, i, j, k = H.basis_elements()
    assert (i * j).allclose(k)
    assert (j * i).allclose(-k)
    assert (j * k).allclose(i)
    assert (k * i).allclose(j)
    assert (i * i).allclose(-one)
    assert ((one + i) * (one - i)).allclose(2 * one)


def test_unit_is_neutral():
    rng = np.random.default_rng(3)
    for name in ALL_NAMES:
        alg = builtin_algebra(name)
        a = alg.random_element(rng)
        assert (a * alg.one).allclose(a)
        assert (alg.one * a).allclose(a)


def test_mat2_matches_matrix_multiplication():
    # Basis order (E11, E12, E21, E22): compare against numpy 2x2 products.
    M = mat2()
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = M.random_element(rng)
        b = M.random_element(rng)
        am = a.coords.reshape(2, 2)
        bm = b.coords.reshape(2, 2)
        assert np.allclose((a * b).coords.reshape(2, 2), am @ bm, atol=1e-13)


def test_inverse_examples():
    H = quaternions()
    one, i, _, _ = H.basis_elements()
    assert i.inv().allclose(-i)
    assert (one + i).inv().allclose((one - i) / 2)
    with pytest.raises(Singular):
        H.zero.inv()
    with pytest.raises(Singular):
        mat2().basis(0).inv()  # E11 is a rank-one matrix


def test_inverse_roundtrip_random():
    rng = np.random.default_rng(11)
    for name in ALL_NAMES:
        alg = builtin_algebra(name)
        for _ in range(50):
            a = alg.random_element(rng)
            try:
                b = a.inv()
            except Singular:
                continue
            assert (a * b).allclose(alg.one, 1e-10)
            assert (b * a).allclose(alg.one, 1e-10)


def test_norm_examples():
    H = quaternions()
    one, i, j, k = H.basis_elements()
    assert (one + i + j + k).norm() == pytest.approx(2.0, abs=1e-15)
    x = TupleElement([i, 3 * one])
    assert tuple_norm(x) == pytest.approx(3.0, abs=1e-15)


@pytest.mark.parametrize("name", ["real", "complex", "quaternion"])
def test_norm_multiplicative_on_division_algebras(name):
    alg = builtin_algebra(name)
    rng = np.random.default_rng(17)
    for _ in range(1000):
        a = alg.random_element(rng)
        b = alg.random_element(rng)
        lhs = (a * b).norm()
        rhs = a.norm() * b.norm()
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)


def test_norm_submultiplicative_mat2():
    M = mat2()
    rng = np.random.default_rng(19)
    for _ in range(500):
        a = M.random_element(rng)
        b = M.random_element(rng)
        assert (a * b).norm() <= a.norm() * b.norm() * (1 + 1e-12)


def test_distributivity():
    rng = np.random.default_rng(23)
    for name in ALL_NAMES:
        alg = builtin_algebra(name)
        a, b, c = (alg.random_element(rng) for _ in range(3))
        assert (a * (b + c)).allclose(a * b + a * c, 1e-13)
        assert ((a + b) * c).allclose(a * c + b * c, 1e-13)


coord = st.floats(
    min_value=-10, max_value=10, allow_nan=False, allow_infinity=False
)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(coord, min_size=4, max_size=4),
    st.lists(coord, min_size=4, max_size=4),
    st.lists(coord, min_size=4, max_size=4),
)
def test_quaternion_element_associativity(ac, bc, cc):
    H = quaternions()
    a, b, c = H.element(ac), H.element(bc), H.element(cc)
    scale = max(1.0, a.norm() * b.norm() * c.norm())
    assert ((a * b) * c - a * (b * c)).norm() <= 1e-9 * scale


@settings(max_examples=50, deadline=None)
@given(
    st.lists(coord, min_size=4, max_size=4),
    st.lists(coord, min_size=4, max_size=4),
)
def test_quaternion_norm_multiplicative_hypothesis(ac, bc):
    H = quaternions()
    a, b = H.element(ac), H.element(bc)
    assert (a * b).norm() == pytest.approx(a.norm() * b.norm(), rel=1e-9, abs=1e-9)


def test_power_sugar():
    H = quaternions()
    rng = np.random.default_rng(29)
    a = H.random_element(rng)
    assert (a ** 3).allclose(a * a * a, 1e-12)
    assert (a ** 0).allclose(H.one)


def test_json_roundtrip():
    H = quaternions()
    doc = H.to_json()
    H2 = Algebra.from_json(doc)
    assert np.array_equal(H2.table, H.table)
    rng = np.random.default_rng(31)
    a, b = H.random_element(rng), H.random_element(rng)
    a2, b2 = H2.element(a.coords), H2.element(b.coords)
    assert np.allclose((a * b).coords, (a2 * b2).coords)


def test_load_algebra_by_name_is_cached():
    assert load_algebra("quaternion") is quaternions()
    assert load_algebra("real") is reals()


def test_mismatch_raises():
    with pytest.raises(AlgebraMismatch):
        quaternions().one + complexes().one
    with pytest.raises(AlgebraMismatch):
        quaternions().one * complexes().one


def test_tuple_stacking_roundtrip():
    H = quaternions()
    rng = np.random.default_rng(37)
    x = TupleElement([H.random_element(rng) for _ in range(3)])
    y = TupleElement.from_stacked(H, x.stacked())
    assert x.allclose(y)
    assert len(y) == 3


def test_tuple_arithmetic():
    H = quaternions()
    one, i, j, _ = H.basis_elements()
    x = TupleElement([one, i])
    y = TupleElement([j, one])
    assert (x + y).allclose(TupleElement([one + j, i + one]))
    assert (x - y).scale(2.0).allclose(TupleElement([2 * (one - j), 2 * (i - one)]))
