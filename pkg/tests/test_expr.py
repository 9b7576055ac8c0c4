import numpy as np
import pytest

from helpers import random_point, random_polymap

from ncalc import (
    Const,
    ExprSyntaxError,
    IndexOutOfRange,
    Inv,
    Neg,
    PolyMap,
    Prod,
    Singular,
    Sum,
    TensorExpr,
    TupleElement,
    UnknownSymbol,
    Var,
    check_chain_rule,
    complexes,
    compose_polymap,
    diff,
    diff_expr,
    eval_derivative,
    eval_expr,
    fd_directional,
    fd_step,
    parse_expression,
    parse_map,
    quaternions,
    second_partial,
    tensor,
    to_latex,
    to_source,
)

H = quaternions()
REF_SRC = "y1 = x1*x1 + x2*x3; y2 = x1*x2 + x3*x3"


def ref_map():
    return parse_map(REF_SRC, 3, H)


# -- parsing -----------------------------------------------------------------------


def test_parse_reference_map():
    f = ref_map()
    assert f.n_in == 3 and f.n_out == 2
    one = H.one
    y = f.eval(TupleElement([one, one, one]))
    assert y[0].allclose(2 * one)
    assert y[1].allclose(2 * one)


def test_parse_literals():
    one, i, j, k = H.basis_elements()
    e = parse_expression("q(1,2,3,4)", 1, H)
    assert eval_expr(e, TupleElement([one])).allclose(
        one + 2 * i + 3 * j + 4 * k
    )
    e = parse_expression("2.5 + i - j*k", 1, H)
    assert eval_expr(e, TupleElement([one])).allclose(2.5 * one + i - j * k)
    C = complexes()
    e = parse_expression("q(1,-2)", 1, C)
    assert eval_expr(e, TupleElement([C.one])).allclose(C.one - 2 * C.basis(1))


def test_parse_power_sugar():
    f = parse_map("y1 = x1^3", 1, H)
    g = parse_map("y1 = x1*x1*x1", 1, H)
    rng = np.random.default_rng(1)
    x = random_point(H, 1, rng)
    assert f.eval(x)[0].allclose(g.eval(x)[0], 1e-13)
    z = parse_map("y1 = x1^0", 1, H)
    assert z.eval(x)[0].allclose(H.one)


def test_parse_unary_minus():
    f = parse_map("y1 = -x1 + 2", 1, H)
    i = H.basis(1)
    assert f.eval(TupleElement([i]))[0].allclose(2 * H.one - i)
    g = parse_map("y1 = -inv(x1)*x1", 1, H)
    assert g.eval(TupleElement([i]))[0].allclose(-H.one, 1e-12)


def test_parse_syntax_error_position():
    with pytest.raises(ExprSyntaxError) as err:
        parse_map("y1 = x1 x2", 2, H)
    assert err.value.position == 8
    with pytest.raises(ExprSyntaxError):
        parse_map("y1 = ", 1, H)
    with pytest.raises(ExprSyntaxError):
        parse_map("x1 = x1", 1, H)
    with pytest.raises(ExprSyntaxError):
        parse_map("y1 = (x1", 1, H)
    with pytest.raises(ExprSyntaxError):
        parse_map("y1 = x1 $", 1, H)


def test_parse_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        parse_map("y1 = z + 1", 1, H)
    with pytest.raises(UnknownSymbol):
        parse_map("y1 = j", 1, complexes())  # j only exists over quaternions


def test_parse_index_errors():
    with pytest.raises(IndexOutOfRange):
        parse_map("y1 = x3", 2, H)
    with pytest.raises(IndexOutOfRange):
        parse_map("y1 = x0", 2, H)
    with pytest.raises(ExprSyntaxError):
        parse_map("y1 = x1; y1 = x1", 1, H)
    with pytest.raises(ExprSyntaxError):
        parse_map("y2 = x1", 1, H)  # y1 missing


def test_parse_q_arity_checked():
    with pytest.raises(ExprSyntaxError):
        parse_map("y1 = q(1,2,3)", 1, H)


def test_source_roundtrip():
    rng = np.random.default_rng(5)
    for _ in range(25):
        f = random_polymap(H, 3, 2, rng)
        back = parse_map(f.to_source(), 3, H)
        x = random_point(H, 3, rng)
        for a, b in zip(f.eval(x), back.eval(x)):
            assert a.allclose(b, 1e-12)


def test_latex_rendering():
    f = ref_map()
    sym = diff(f)
    tex = sym[0][0].latex()
    assert "\\otimes" in tex
    assert "x^{1}" in tex
    assert to_latex(Inv(Var(1))) == "{x^{1}}^{-1}"


# -- differentiation rules ---------------------------------------------------------


def test_diff_variable_and_constant():
    pairs = diff_expr(Var(1), 1, H)
    assert len(pairs) == 1
    l, r = pairs[0]
    assert isinstance(l, Const) and l.value.allclose(H.one)
    assert isinstance(r, Const) and r.value.allclose(H.one)
    assert diff_expr(Var(2), 1, H) == []
    assert diff_expr(Const(H.basis(1)), 1, H) == []


def test_diff_reference_matrix_termwise():
    # The symbolic matrix evaluated anywhere must match the closed form
    # [[x1 (x) 1 + 1 (x) x1, 1 (x) x3, x2 (x) 1],
    #  [1 (x) x2,            x1 (x) 1, x3 (x) 1 + 1 (x) x3]].
    f = ref_map()
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = random_point(H, 3, rng)
        x1, x2, x3 = x
        one = H.one
        D = eval_derivative(f, x)
        expected = [
            [tensor(x1, one) + tensor(one, x1), tensor(one, x3), tensor(x2, one)],
            [tensor(one, x2), tensor(x1, one), tensor(x3, one) + tensor(one, x3)],
        ]
        for r in range(2):
            for c in range(3):
                assert D[r, c].allclose(expected[r][c], 1e-12)


def test_diff_entry_term_sources():
    f = ref_map()
    sym = diff(f)
    assert sym[0][1].to_source() == [["1", "x3"]]
    assert sym[0][2].to_source() == [["x2", "1"]]
    assert len(sym[0][0].pairs) == 2


def test_diff_inverse_rule():
    i, j = H.basis(1), H.basis(2)
    e = Inv(Var(1))
    te = TensorExpr(H, tuple(diff_expr(e, 1, H)))
    m = te.eval(TupleElement([i]))
    # d(inv) at i applied to j: -(inv i) j (inv i) = -j.
    assert m.apply(j).allclose(-j, 1e-12)


def test_diff_product_rule_against_elementwise_sum():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f = random_polymap(H, 2, 1, rng, degree=2)
        g = random_polymap(H, 2, 1, rng, degree=2)
        prod = PolyMap(H, 2, (Prod((f.components[0], g.components[0])),))
        x = random_point(H, 2, rng)
        for jv in (1, 2):
            dfg = TensorExpr(H, tuple(diff_expr(prod.components[0], jv, H))).eval(x)
            fx = eval_expr(f.components[0], x)
            gx = eval_expr(g.components[0], x)
            acc = None
            for l, r in diff_expr(f.components[0], jv, H):
                t = tensor(eval_expr(l, x), eval_expr(r, x) * gx)
                acc = t if acc is None else acc + t
            for l, r in diff_expr(g.components[0], jv, H):
                t = tensor(fx * eval_expr(l, x), eval_expr(r, x))
                acc = t if acc is None else acc + t
            if acc is None:
                assert np.allclose(dfg.flat, 0.0)
            else:
                assert dfg.allclose(acc, 1e-11)


def test_diff_linearity():
    rng = np.random.default_rng(13)
    f = random_polymap(H, 2, 1, rng)
    g = random_polymap(H, 2, 1, rng)
    both = PolyMap(H, 2, (Sum((f.components[0], g.components[0])),))
    neg = PolyMap(H, 2, (Neg(f.components[0]),))
    x = random_point(H, 2, rng)
    Df = eval_derivative(f, x).block_flat()
    Dg = eval_derivative(g, x).block_flat()
    assert np.allclose(eval_derivative(both, x).block_flat(), Df + Dg, atol=1e-12)
    assert np.allclose(eval_derivative(neg, x).block_flat(), -Df, atol=1e-13)


def test_identity_and_constant_derivatives():
    f = parse_map("y1 = x1", 1, H)
    x = TupleElement([H.basis(2)])
    D = eval_derivative(f, x)
    assert np.allclose(D.block_flat(), np.eye(4))
    g = parse_map("y1 = i", 1, H)
    assert np.allclose(eval_derivative(g, x).block_flat(), 0.0)


# -- finite differences ------------------------------------------------------------


def test_fd_step_scaling():
    cbrt = float(np.cbrt(np.finfo(float).eps))
    small = TupleElement([H.basis(1)])
    big = TupleElement([3 * H.one, H.basis(2)])
    assert fd_step(small) == pytest.approx(cbrt)
    assert fd_step(big) == pytest.approx(3 * cbrt)  # tuple norm is the component max


def test_fd_matches_symbolic_quadratic():
    f = parse_map("y1 = x1*x1", 1, H)
    x = TupleElement([H.basis(1)])
    h = TupleElement([H.basis(2)])
    fd = fd_directional(f, x, h)
    assert fd[0].norm() < 1e-10  # ij + ji = 0


def test_fd_vs_symbolic_random():
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(100):
        n_in = int(rng.integers(1, 4))
        f = random_polymap(H, n_in, int(rng.integers(1, 3)), rng)
        x = random_point(H, n_in, rng)
        h = random_point(H, n_in, rng)
        sym = eval_derivative(f, x).apply_col(h)
        fd = fd_directional(f, x, h)
        worst = max(worst, (fd - sym).norm() / max(1.0, sym.norm()))
    assert worst < 1e-5


# -- second derivatives ------------------------------------------------------------


def test_second_partial_square():
    f = parse_map("y1 = x1*x1", 1, H)
    x = TupleElement([H.basis(1)])
    sp = second_partial(f, 1, 1, x)[0]
    rng = np.random.default_rng(19)
    u, w = H.random_element(rng), H.random_element(rng)
    assert sp.apply2(u, w).allclose(u * w + w * u, 1e-12)


def test_second_partial_linear_vanishes():
    f = parse_map("y1 = x1 + j*x2", 2, H)
    x = TupleElement([H.basis(1), H.basis(2)])
    for i in (1, 2):
        for j in (1, 2):
            for b in second_partial(f, i, j, x):
                assert np.allclose(b.flat3, 0.0)


def test_second_partial_mixed_orders():
    # For y1 = x1*x1 + x2*x3 the mixed derivative keeps slot order:
    # outer x2 / inner x3 multiplies direction before argument.
    f = ref_map()
    x = TupleElement([H.basis(1), H.basis(2), H.basis(3)])
    i, j = H.basis(1), H.basis(2)
    sp23 = second_partial(f, 2, 3, x)[0]
    sp32 = second_partial(f, 3, 2, x)[0]
    assert sp23.apply2(i, j).allclose(i * j, 1e-12)
    assert sp32.apply2(i, j).allclose(j * i, 1e-12)


def test_second_partial_fd_oracle():
    # Mixed central differences of the map itself pin the slot convention.
    rng = np.random.default_rng(23)
    f = ref_map()
    x = random_point(H, 3, rng)
    u = H.random_element(rng)
    w = H.random_element(rng)
    s = t = 1e-3

    def shift(iv, jv, su, tw):
        comps = list(x.components)
        comps[iv - 1] = comps[iv - 1] + u * su
        comps[jv - 1] = comps[jv - 1] + w * tw
        return f.eval(TupleElement(comps))[0]

    for iv, jv in ((2, 3), (3, 2), (1, 1)):
        num = (
            shift(iv, jv, s, t)
            - shift(iv, jv, s, -t)
            - shift(iv, jv, -s, t)
            + shift(iv, jv, -s, -t)
        ).coords / (4 * s * t)
        sym = second_partial(f, iv, jv, x)[0].apply2(u, w)
        assert np.allclose(num, sym.coords, atol=1e-6)


def test_second_partial_symmetry():
    rng = np.random.default_rng(29)
    for _ in range(50):
        n_in = int(rng.integers(1, 4))
        f = random_polymap(H, n_in, 1, rng)
        x = random_point(H, n_in, rng)
        iv = int(rng.integers(1, n_in + 1))
        jv = int(rng.integers(1, n_in + 1))
        a = second_partial(f, iv, jv, x)[0]
        b = second_partial(f, jv, iv, x)[0]
        assert np.allclose(a.flat3, b.flat3.transpose(0, 2, 1), atol=1e-12)


# -- increments and chain rule -----------------------------------------------------


def test_first_order_increment_ratio():
    f = ref_map()
    rng = np.random.default_rng(31)
    for _ in range(20):
        x = random_point(H, 3, rng)
        h = random_point(H, 3, rng).scale(0.1)
        D = eval_derivative(f, x)

        def remainder(hh):
            lin = D.apply_col(hh)
            full = f.eval(x + hh) - f.eval(x)
            return (full - lin).norm()

        r1 = remainder(h)
        r2 = remainder(h.scale(0.5))
        assert r1 <= 4.0 * h.norm() ** 2 * 10  # coarse quadratic bound
        assert 3.5 <= r1 / r2 <= 4.5


def test_chain_rule_identity_case():
    f = ref_map()
    ident = parse_map("y1 = x1; y2 = x2", 2, H)
    rng = np.random.default_rng(37)
    x = random_point(H, 3, rng)
    assert check_chain_rule(ident, f, x) < 1e-12


def test_chain_rule_random_pairs():
    rng = np.random.default_rng(41)
    for _ in range(20):
        inner_out = int(rng.integers(1, 3))
        f = random_polymap(H, 2, inner_out, rng)
        g = random_polymap(H, inner_out, 2, rng)
        x = random_point(H, 2, rng)
        assert check_chain_rule(g, f, x) < 1e-9


def test_compose_polymap_evaluates_as_composition():
    rng = np.random.default_rng(43)
    f = random_polymap(H, 2, 2, rng)
    g = random_polymap(H, 2, 1, rng)
    x = random_point(H, 2, rng)
    direct = compose_polymap(g, f).eval(x)
    stepped = g.eval(f.eval(x))
    for a, b in zip(direct, stepped):
        assert a.allclose(b, 1e-11)


def test_eval_singular_inverse_raises():
    f = parse_map("y1 = inv(x1)", 1, H)
    with pytest.raises(Singular):
        f.eval(TupleElement([H.zero]))


def test_to_source_of_diff_is_parseable():
    f = ref_map()
    rng = np.random.default_rng(47)
    x = random_point(H, 3, rng)
    for row in diff(f):
        for te in row:
            for lsrc, rsrc in te.to_source():
                l = parse_expression(lsrc, 3, H)
                r = parse_expression(rsrc, 3, H)
                assert eval_expr(l, x).algebra is H
                assert eval_expr(r, x).algebra is H
