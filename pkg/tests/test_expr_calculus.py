"""Differentiation, substitution, and polynomial collection."""

import pytest

from gbeq.expr import (
    Context,
    CollectError,
    DifferentiationError,
    app,
    collect,
    contains_func,
    diff_n,
    differentiate,
    exp,
    format_expr,
    func,
    integral,
    mul,
    parse,
    rat,
    simplify,
    substitute,
    var,
)


@pytest.fixture
def ctx():
    c = Context()
    c.add_var("t")
    c.add_var("x")
    c.add_function("u", ("t", "x"))
    c.add_function("f", ("t", "x"))
    return c


def d(e, wrt, ctx):
    return format_expr(differentiate(e, wrt, ctx))


def test_polynomial_rules(ctx):
    assert d(parse("t*x^2", ctx), "x", ctx) == "2*t*x"
    assert d(parse("x^(-1)", ctx), "x", ctx) == "-1/x^2"
    assert d(parse("(1 + x)^(1/2)", ctx), "x", ctx) == "1/(2*(1 + x)^(1/2))"


def test_function_symbols_bump_indices(ctx):
    u = ctx.fn("u")
    assert d(u, "x", ctx) == "u_x"
    assert format_expr(diff_n(u, "x", 2, ctx)) == "u_xx"
    assert d(differentiate(u, "t", ctx), "x", ctx) == "u_tx"
    assert d(mul(u, u), "x", ctx) == "2*u*u_x"


def test_chain_rule_through_exp(ctx):
    f = ctx.fn("f")
    assert differentiate(exp(f), "x", ctx) == mul(ctx.fn("f", (0, 1)), exp(f))


def test_integral_rules(ctx):
    f = ctx.fn("f")
    e = integral(f, "x")
    assert d(e, "x", ctx) == "f"
    assert d(e, "t", ctx) == "int(f_t, x)"


def test_explicit_arguments_chain(ctx):
    g = func("f", ("t", "x"), (0, 1), (parse("2*t", ctx), parse("1 + x", ctx)))
    assert d(g, "t", ctx) == "2*f_tx(2*t, 1 + x)"
    assert d(g, "x", ctx) == "f_xx(2*t, 1 + x)"


def test_abs_needs_sign_information(ctx):
    with pytest.raises(DifferentiationError):
        differentiate(app("abs", ctx.fn("f")), "x", ctx)
    signed = Context()
    signed.add_var("x")
    signed.add_function("f", ("x",))
    signed.assume_positive(signed.fn("f"))
    df = differentiate(app("abs", signed.fn("f")), "x", signed)
    assert format_expr(simplify(df, signed)) == "f_x"


def test_substitution_is_simultaneous(ctx):
    e = parse("t + x", ctx)
    r = substitute(e, {"t": var("x"), "x": parse("2*t", ctx)}, ctx)
    # sequential application would send t -> x -> 2t
    assert format_expr(r) == "2*t + x"


def test_substitute_solution_into_jet(ctx):
    e = parse("u_x + u^2", ctx)
    r = simplify(substitute(e, {"u": parse("2/x", ctx)}, ctx), ctx)
    assert format_expr(r) == "2/x^2"


def test_substitute_composes_into_explicit_args(ctx):
    e = func("u", ("t", "x"), (0, 0), (parse("2*t", ctx), var("x")))
    r = substitute(e, {"u": parse("t*x^2", ctx)}, ctx)
    assert format_expr(r) == "2*t*x^2"
    e2 = func("u", ("t", "x"), (1, 1), (parse("2*t", ctx), var("x")))
    assert format_expr(substitute(e2, {"u": parse("t*x^2", ctx)}, ctx)) == "2*x"


def test_substitute_replacements_enter_verbatim(ctx):
    # the image of t mentions x; the image of x must not rewrite it
    e = parse("t*x", ctx)
    r = substitute(e, {"t": var("x"), "x": var("t")}, ctx)
    assert format_expr(r) == "t*x"


def test_collect_by_degree(ctx):
    co = collect(parse("(2 + t)*x^2 + t*x + 1/2", ctx), var("x"), ctx)
    assert {k: format_expr(v) for k, v in co.items()} == {
        0: "1/2",
        1: "t",
        2: "2 + t",
    }


def test_collect_rejects_non_polynomial(ctx):
    with pytest.raises(CollectError, match="occurs inside"):
        collect(parse("1/(1 + x)", ctx), var("x"), ctx)
    with pytest.raises(CollectError, match="non-polynomial power"):
        collect(parse("x^(1/2)", ctx), var("x"), ctx)


def test_collect_in_function_symbol(ctx):
    u = ctx.fn("u")
    e = parse("u^2*f + u*f_x + 1", ctx)
    co = collect(e, u, ctx)
    assert format_expr(co[2]) == "f"
    assert format_expr(co[1]) == "f_x"
    assert format_expr(co[0]) == "1"


def test_contains_func(ctx):
    e = parse("u_x + f*t", ctx)
    assert contains_func(e, "u")
    assert contains_func(e, "f")
    assert not contains_func(e, "g")


def test_derivative_of_integral_atom_in_product(ctx):
    f = ctx.fn("f")
    e = mul(var("t"), integral(f, "x"))
    r = differentiate(e, "t", ctx)
    assert format_expr(r) == "t*int(f_t, x) + int(f, x)"
