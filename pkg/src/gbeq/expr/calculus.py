"""Differentiation, substitution, and polynomial collection."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional

from .context import Context
from .nodes import (
    Add,
    App,
    Expr,
    ExprError,
    Func,
    Int,
    Mul,
    Pow,
    Rat,
    Var,
    ZERO,
    ONE,
    add,
    app,
    func,
    integral,
    mul,
    pow_,
    rat,
    var,
)


class DifferentiationError(ExprError):
    """Raised when a derivative needs a sign that is not assumed."""


class SubstitutionError(ExprError):
    """Raised for malformed replacements."""


def differentiate(e: Expr, wrt: str, ctx: Optional[Context] = None) -> Expr:
    """Partial derivative of e with respect to the variable named wrt.

    Function symbols at their default arguments differentiate into
    bumped derivative indices; explicitly applied symbols chain-rule
    through their arguments.  abs and sign need the context to resolve
    signs and raise DifferentiationError otherwise.
    """
    if isinstance(e, Rat):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == wrt else ZERO
    if isinstance(e, Func):
        if e.args is None:
            if wrt not in e.argnames:
                return ZERO
            i = e.argnames.index(wrt)
            didx = e.didx[:i] + (e.didx[i] + 1,) + e.didx[i + 1 :]
            return Func(e.name, e.argnames, didx, None)
        parts = []
        for i, a in enumerate(e.args):
            da = differentiate(a, wrt, ctx)
            if da == ZERO:
                continue
            didx = e.didx[:i] + (e.didx[i] + 1,) + e.didx[i + 1 :]
            parts.append(mul(Func(e.name, e.argnames, didx, e.args), da))
        return add(*parts)
    if isinstance(e, Add):
        return add(*[differentiate(t, wrt, ctx) for t in e.terms])
    if isinstance(e, Mul):
        parts = []
        for i, (b, ex) in enumerate(e.powers):
            db = differentiate(b, wrt, ctx)
            if db == ZERO:
                continue
            rest = [(b2, ex2) for j, (b2, ex2) in enumerate(e.powers) if j != i]
            factor = mul(
                rat(ex),
                pow_(b, ex - 1),
                db,
                *[pow_(b2, ex2) for b2, ex2 in rest],
            )
            parts.append(factor)
        return mul(rat(e.coeff), add(*parts)) if parts else ZERO
    if isinstance(e, Pow):
        db = differentiate(e.base, wrt, ctx)
        if db == ZERO:
            return ZERO
        return mul(rat(e.exponent), pow_(e.base, e.exponent - 1), db)
    if isinstance(e, App):
        da = differentiate(e.arg, wrt, ctx)
        if da == ZERO:
            return ZERO
        if e.fn == "exp":
            return mul(e, da)
        if e.fn == "ln":
            return mul(pow_(e.arg, Fraction(-1)), da)
        if e.fn == "sin":
            return mul(app("cos", e.arg), da)
        if e.fn == "cos":
            return mul(rat(-1), app("sin", e.arg), da)
        if e.fn == "abs":
            sign = ctx.sign_of(e.arg) if ctx is not None else None
            if sign == 1:
                return da
            if sign == -1:
                return mul(rat(-1), da)
            if ctx is not None and ctx.is_nonzero(e.arg):
                return mul(app("sign", e.arg), da)
            raise DifferentiationError(
                f"cannot differentiate abs({e.arg!r}) without a sign assumption"
            )
        if e.fn == "sign":
            if ctx is not None and ctx.is_nonzero(e.arg):
                return ZERO
            raise DifferentiationError(
                f"cannot differentiate sign({e.arg!r}) without a nonzero assumption"
            )
    if isinstance(e, Int):
        if e.var == wrt:
            return e.body
        return integral(differentiate(e.body, wrt, ctx), e.var)
    raise ExprError(f"cannot differentiate {type(e).__name__}")


def diff_n(e: Expr, wrt: str, order: int, ctx: Optional[Context] = None) -> Expr:
    for _ in range(order):
        e = differentiate(e, wrt, ctx)
    return e


def substitute(e: Expr, mapping: Mapping[str, Expr], ctx: Optional[Context] = None) -> Expr:
    """Simultaneous substitution by symbol name.

    A key naming a variable replaces that variable everywhere.  A key
    naming a function symbol replaces the symbol by an expression in
    its signature variables; derivative nodes differentiate the
    replacement and explicit arguments compose into it.  Replacements
    are inserted verbatim (no re-substitution), which is what makes
    the operation simultaneous.
    """
    if not mapping:
        return e
    return _subst(e, dict(mapping), ctx)


def _subst(e: Expr, mapping: Dict[str, Expr], ctx: Optional[Context]) -> Expr:
    if isinstance(e, Rat):
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Func):
        rep = mapping.get(e.name)
        if rep is None:
            return _subst_func_args(e, mapping, ctx)
        deriv = rep
        for name, count in zip(e.argnames, e.didx):
            for _ in range(count):
                deriv = differentiate(deriv, name, ctx)
        if e.args is None:
            return deriv
        new_args = tuple(_subst(a, mapping, ctx) for a in e.args)
        return _subst(deriv, {n: a for n, a in zip(e.argnames, new_args)}, ctx)
    if isinstance(e, Add):
        return add(*[_subst(t, mapping, ctx) for t in e.terms])
    if isinstance(e, Mul):
        return mul(
            rat(e.coeff),
            *[pow_(_subst(b, mapping, ctx), ex) for b, ex in e.powers],
        )
    if isinstance(e, Pow):
        return pow_(_subst(e.base, mapping, ctx), e.exponent)
    if isinstance(e, App):
        return app(e.fn, _subst(e.arg, mapping, ctx))
    if isinstance(e, Int):
        rep = mapping.get(e.var)
        if rep is not None and not isinstance(rep, Var):
            raise SubstitutionError(
                f"cannot substitute a non-variable for the antiderivative "
                f"variable {e.var}"
            )
        new_var = rep.name if isinstance(rep, Var) else e.var
        return integral(_subst(e.body, mapping, ctx), new_var)
    raise ExprError(f"cannot substitute into {type(e).__name__}")


def _subst_func_args(e: Func, mapping: Dict[str, Expr], ctx: Optional[Context]) -> Expr:
    """Apply a mapping inside a function node whose own name is kept.

    When a signature variable of a default-application node is mapped,
    the application becomes explicit: f with x -> (y - 1) turns into
    f(t, y - 1).
    """
    if e.args is not None:
        new_args = tuple(_subst(a, mapping, ctx) for a in e.args)
        if new_args == e.args:
            return e
        return func(e.name, e.argnames, e.didx, new_args)
    if not any(n in mapping for n in e.argnames):
        return e
    new_args = tuple(mapping.get(n, var(n)) for n in e.argnames)
    return func(e.name, e.argnames, e.didx, new_args)


def contains_func(e: Expr, name: str) -> bool:
    """Does e mention the function symbol called name?"""
    if isinstance(e, (Rat, Var)):
        return False
    if isinstance(e, Func):
        if e.name == name:
            return True
        return e.args is not None and any(contains_func(a, name) for a in e.args)
    if isinstance(e, App):
        return contains_func(e.arg, name)
    if isinstance(e, Int):
        return contains_func(e.body, name)
    if isinstance(e, Pow):
        return contains_func(e.base, name)
    if isinstance(e, Add):
        return any(contains_func(t, name) for t in e.terms)
    if isinstance(e, Mul):
        return any(contains_func(b, name) for b, _ in e.powers)
    raise ExprError(f"unknown node {type(e).__name__}")


class CollectError(ExprError):
    """Raised when an expression is not polynomial in the requested atom."""


def collect(e: Expr, atom: Expr, ctx: Optional[Context] = None) -> Dict[int, Expr]:
    """Coefficients of e as a polynomial in atom, keyed by degree.

    The expression is expanded first.  Any occurrence of the atom with
    a negative or fractional exponent, or buried inside another base,
    raises CollectError.
    """
    from .simplify import expand

    if isinstance(atom, Var):
        occurs = lambda x: _mentions_var_strict(x, atom.name)
    elif isinstance(atom, Func):
        occurs = lambda x: contains_func(x, atom.name)
    else:
        raise CollectError(f"cannot collect in {atom!r}")

    buckets: Dict[int, list] = {}
    ex = expand(e)
    terms = ex.terms if isinstance(ex, Add) else (ex,)
    for term in terms:
        if isinstance(term, Rat):
            buckets.setdefault(0, []).append(term)
            continue
        coeff, powers = (term.coeff, term.powers) if isinstance(term, Mul) else (Fraction(1), ((term, Fraction(1)),))
        degree = 0
        rest = [rat(coeff)]
        for b, exn in powers:
            if b == atom:
                if exn.denominator != 1 or exn < 0:
                    raise CollectError(f"non-polynomial power {exn} of {atom!r}")
                degree += int(exn)
                continue
            if occurs(b):
                raise CollectError(f"{atom!r} occurs inside {b!r}")
            rest.append(pow_(b, exn))
        buckets.setdefault(degree, []).append(mul(*rest))
    return {deg: add(*parts) for deg, parts in sorted(buckets.items())}


def _mentions_var_strict(e: Expr, name: str) -> bool:
    """Like contains_var but ignoring default signature arguments.

    For collection purposes an unapplied symbol f(t, x) is an opaque
    coefficient; only explicit occurrences of the variable count.
    """
    if isinstance(e, Var):
        return e.name == name
    if isinstance(e, Rat):
        return False
    if isinstance(e, Func):
        return e.args is not None and any(
            _mentions_var_strict(a, name) for a in e.args
        )
    if isinstance(e, App):
        return _mentions_var_strict(e.arg, name)
    if isinstance(e, Int):
        return e.var == name or _mentions_var_strict(e.body, name)
    if isinstance(e, Pow):
        return _mentions_var_strict(e.base, name)
    if isinstance(e, Add):
        return any(_mentions_var_strict(t, name) for t in e.terms)
    if isinstance(e, Mul):
        return any(_mentions_var_strict(b, name) for b, _ in e.powers)
    raise ExprError(f"unknown node {type(e).__name__}")
