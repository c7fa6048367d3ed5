"""Immutable expression trees with exact rational coefficients.

Every constructor in this module returns a node in canonical form:
sums are flattened, sorted, and merged by monomial; products carry a
single rational coefficient and a sorted tuple of (base, exponent)
pairs with exact Fraction exponents; rational powers of rational
numbers extract perfect roots.  Structural equality of canonical nodes
is the cheap equality test everything else builds on.

Rewrites that are only valid under positivity or nonvanishing
assumptions are *not* performed here; see simplify.simplify, which
takes a Context.  The constructors only apply rules that hold on the
domain of definition of both sides (for instance exponent addition on
a shared base, or exp(a)*exp(b) -> exp(a+b)).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

RationalLike = Union[int, Fraction]

# Function names understood by App nodes.  sqrt is accepted by the
# parser but is rewritten to a 1/2 power immediately.
APP_NAMES = ("exp", "ln", "abs", "sign", "sin", "cos")

_KIND_RAT = 0
_KIND_VAR = 1
_KIND_FUNC = 2
_KIND_APP = 3
_KIND_INT = 4
_KIND_POW = 5
_KIND_ADD = 6
_KIND_MUL = 7


class ExprError(Exception):
    """Base class for expression-level errors."""


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ("_hash", "_key")

    # Arithmetic sugar so formula code reads like the mathematics.
    def __add__(self, other: "ExprLike") -> "Expr":
        return add(self, as_expr(other))

    def __radd__(self, other: "ExprLike") -> "Expr":
        return add(as_expr(other), self)

    def __sub__(self, other: "ExprLike") -> "Expr":
        return add(self, mul(rat(-1), as_expr(other)))

    def __rsub__(self, other: "ExprLike") -> "Expr":
        return add(as_expr(other), mul(rat(-1), self))

    def __mul__(self, other: "ExprLike") -> "Expr":
        return mul(self, as_expr(other))

    def __rmul__(self, other: "ExprLike") -> "Expr":
        return mul(as_expr(other), self)

    def __truediv__(self, other: "ExprLike") -> "Expr":
        return div(self, as_expr(other))

    def __rtruediv__(self, other: "ExprLike") -> "Expr":
        return div(as_expr(other), self)

    def __pow__(self, other: RationalLike) -> "Expr":
        return pow_(self, other)

    def __neg__(self) -> "Expr":
        return mul(rat(-1), self)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        from .fmt import format_expr

        return format_expr(self)


ExprLike = Union[Expr, int, Fraction]


def as_expr(value: ExprLike) -> Expr:
    """Coerce ints and Fractions to Rat nodes, pass Expr through."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return rat(value)
    raise TypeError(f"cannot interpret {value!r} as an expression")


class Rat(Expr):
    """An exact rational constant."""

    __slots__ = ("value",)

    def __init__(self, value: Fraction):
        self.value = value
        self._key = (_KIND_RAT, value)
        # hashes build on child hashes and numerator/denominator pairs
        # rather than the nested key: Fraction.__hash__ costs a modular
        # inverse, and rehashing whole subtrees made construction
        # quadratic on expand-heavy paths
        self._hash = hash((_KIND_RAT, value.numerator, value.denominator))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Rat) and self.value == other.value

    __hash__ = Expr.__hash__


class Var(Expr):
    """An independent variable such as t or x."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._key = (_KIND_VAR, name)
        self._hash = hash(self._key)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Var) and self.name == other.name

    __hash__ = Expr.__hash__


class Func(Expr):
    """A function symbol, possibly differentiated, possibly applied.

    ``argnames`` is the declared signature, e.g. ("t", "x").  ``didx``
    counts derivatives per signature slot, so X_txx has didx (1, 2).
    ``args`` is None when the symbol is applied at its own signature
    variables (the usual case when writing equations in source
    coordinates) and a tuple of expressions when applied elsewhere,
    as in T_t(S(t)) during compositions.
    """

    __slots__ = ("name", "argnames", "didx", "args")

    def __init__(
        self,
        name: str,
        argnames: Tuple[str, ...],
        didx: Tuple[int, ...],
        args: Optional[Tuple[Expr, ...]] = None,
    ):
        if len(didx) != len(argnames):
            raise ExprError(f"didx length {didx} does not match signature {argnames}")
        if args is not None and len(args) != len(argnames):
            raise ExprError(f"{name} expects {len(argnames)} arguments, got {len(args)}")
        self.name = name
        self.argnames = argnames
        self.didx = didx
        self.args = args
        if args is None:
            argkey: tuple = (0,)
            arghash: tuple = (0,)
        else:
            argkey = (1,) + tuple(a._key for a in args)
            arghash = (1,) + tuple(a._hash for a in args)
        self._key = (_KIND_FUNC, name, argnames, didx, argkey)
        self._hash = hash((_KIND_FUNC, name, argnames, didx, arghash))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Func) and self._key == other._key

    __hash__ = Expr.__hash__


class App(Expr):
    """Application of a fixed elementary function (exp, ln, abs, ...)."""

    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: Expr):
        if fn not in APP_NAMES:
            raise ExprError(f"unknown function {fn}")
        self.fn = fn
        self.arg = arg
        self._key = (_KIND_APP, fn, arg._key)
        self._hash = hash((_KIND_APP, fn, arg._hash))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, App) and self._key == other._key

    __hash__ = Expr.__hash__


class Int(Expr):
    """An antiderivative of ``body`` with respect to ``var``.

    The node denotes *an* antiderivative; identities involving it are
    understood up to the usual constant.  Numeric evaluation fixes the
    base point (see numeric.evaluate).
    """

    __slots__ = ("body", "var")

    def __init__(self, body: Expr, var: str):
        self.body = body
        self.var = var
        self._key = (_KIND_INT, var, body._key)
        self._hash = hash((_KIND_INT, var, body._hash))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Int) and self._key == other._key

    __hash__ = Expr.__hash__


class Pow(Expr):
    """An opaque rational power kept unevaluated.

    Only produced when a rewrite such as (b^e)^r -> b^(e*r) is not
    valid without assumptions.  simplify upgrades these nodes when the
    context allows.
    """

    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: Fraction):
        self.base = base
        self.exponent = exponent
        self._key = (_KIND_POW, base._key, exponent)
        self._hash = hash(
            (_KIND_POW, base._hash, exponent.numerator, exponent.denominator)
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Pow) and self._key == other._key

    __hash__ = Expr.__hash__


class Add(Expr):
    """A flattened, sorted sum of at least two unlike terms."""

    __slots__ = ("terms",)

    def __init__(self, terms: Tuple[Expr, ...]):
        self.terms = terms
        self._key = (_KIND_ADD,) + tuple(t._key for t in terms)
        self._hash = hash((_KIND_ADD,) + tuple(t._hash for t in terms))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Add) and self._key == other._key

    __hash__ = Expr.__hash__


class Mul(Expr):
    """coeff * prod(base_i ^ exp_i) with sorted bases and Fraction exponents."""

    __slots__ = ("coeff", "powers")

    def __init__(self, coeff: Fraction, powers: Tuple[Tuple[Expr, Fraction], ...]):
        self.coeff = coeff
        self.powers = powers
        self._key = (_KIND_MUL, coeff) + tuple((b._key, e) for b, e in powers)
        self._hash = hash(
            (_KIND_MUL, coeff.numerator, coeff.denominator)
            + tuple((b._hash, e.numerator, e.denominator) for b, e in powers)
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Mul) and self._key == other._key

    __hash__ = Expr.__hash__


# ---------------------------------------------------------------------------
# canonical constructors


ZERO_FR = Fraction(0)
ONE_FR = Fraction(1)

_rat_cache: dict = {}


def rat(value: RationalLike, den: Optional[int] = None) -> Rat:
    """Make a rational constant; rat(1, 2) is one half."""
    if den is not None:
        value = Fraction(value, den)
    elif not isinstance(value, Fraction):
        value = Fraction(value)
    node = _rat_cache.get(value)
    if node is None:
        node = Rat(value)
        if len(_rat_cache) < 4096:
            _rat_cache[value] = node
    return node


ZERO = rat(0)
ONE = rat(1)
MINUS_ONE = rat(-1)


def var(name: str) -> Var:
    return Var(name)


def func(
    name: str,
    argnames: Sequence[str],
    didx: Optional[Sequence[int]] = None,
    args: Optional[Sequence[Expr]] = None,
) -> Func:
    argnames = tuple(argnames)
    if didx is None:
        didx = (0,) * len(argnames)
    if args is not None:
        args = tuple(args)
        if args == tuple(Var(a) for a in argnames):
            args = None  # application at the signature variables is the default
    return Func(name, argnames, tuple(didx), args)


def _as_coeff_powers(e: Expr) -> Tuple[Fraction, Tuple[Tuple[Expr, Fraction], ...]]:
    """Split a canonical node into (coefficient, monomial)."""
    if isinstance(e, Rat):
        return e.value, ()
    if isinstance(e, Mul):
        return e.coeff, e.powers
    return ONE_FR, ((e, ONE_FR),)


def add(*terms: ExprLike) -> Expr:
    """Canonical sum: flatten, merge like monomials, drop zeros, sort."""
    acc: dict = {}
    const = ZERO_FR
    stack = [as_expr(t) for t in terms]
    stack.reverse()
    while stack:
        node = stack.pop()
        if isinstance(node, Add):
            stack.extend(reversed(node.terms))
            continue
        if isinstance(node, Rat):
            const += node.value
            continue
        coeff, powers = _as_coeff_powers(node)
        prev = acc.get(powers)
        acc[powers] = coeff if prev is None else prev + coeff
    out = []
    for powers, coeff in acc.items():
        if coeff == 0:
            continue
        out.append(_make_mul(coeff, powers))
    if const != 0:
        out.append(rat(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=_term_order)
    return Add(tuple(out))


def _term_order(term: Expr):
    """Order terms of a sum by their monomial part, constants first."""
    if isinstance(term, Rat):
        return ((),)
    _, powers = _as_coeff_powers(term)
    return (tuple((b._key, e) for b, e in powers),)


def _make_mul(coeff: Fraction, powers: Tuple[Tuple[Expr, Fraction], ...]) -> Expr:
    if coeff == 0:
        return ZERO
    if not powers:
        return rat(coeff)
    if coeff == 1 and len(powers) == 1 and powers[0][1] == 1:
        return powers[0][0]
    return Mul(coeff, powers)


def _scale_expr(coeff: Fraction, e: Expr) -> Expr:
    """coeff * e with the scalar distributed over sums.

    Keeps exp arguments flat, so that exp(s) * exp(-s) cancels through
    the merged-argument path.  Unwraps a bare scalar-times-sum first;
    those arrive from exp(c * (...)) built elsewhere.
    """
    if (
        isinstance(e, Mul)
        and len(e.powers) == 1
        and e.powers[0][1] == 1
        and isinstance(e.powers[0][0], Add)
    ):
        coeff = coeff * e.coeff
        e = e.powers[0][0]
    if coeff == 1:
        return e
    if isinstance(e, Add):
        return add(*(mul(rat(coeff), term) for term in e.terms))
    return mul(rat(coeff), e)


def mul(*factors: ExprLike) -> Expr:
    """Canonical product: flatten, fold rationals, merge equal bases.

    Exponents on a shared base always add (a domain-of-definition
    convention: x * x^-1 -> 1).  All exp factors combine into a single
    exp of the summed, exponent-weighted arguments.
    """
    coeff = ONE_FR
    acc: dict = {}
    order: list = []
    exp_arg_terms: list = []

    def push(base: Expr, exponent: Fraction) -> None:
        nonlocal coeff
        if exponent == 0:
            return
        if isinstance(base, Rat):
            if exponent.denominator == 1:
                coeff *= base.value ** int(exponent)
                return
            # non-integer power of a rational: keep prime bases
            for b2, e2 in _rat_power_parts(base.value, exponent):
                if isinstance(b2, Rat) and e2.denominator == 1:
                    coeff *= b2.value ** int(e2)
                else:
                    _accumulate(b2, e2)
            return
        if isinstance(base, App) and base.fn == "exp":
            exp_arg_terms.append(_scale_expr(exponent, base.arg))
            return
        if isinstance(base, Mul):
            # only reachable with exponent 1 via flattening below
            raise ExprError("internal: Mul base must be flattened before push")
        _accumulate(base, exponent)

    def _accumulate(base: Expr, exponent: Fraction) -> None:
        if base in acc:
            acc[base] += exponent
        else:
            acc[base] = exponent
            order.append(base)

    stack = [as_expr(f) for f in factors]
    stack.reverse()
    while stack:
        node = stack.pop()
        if isinstance(node, Rat):
            coeff *= node.value
            continue
        if isinstance(node, Mul):
            coeff *= node.coeff
            for b, e in node.powers:
                push(b, e)
            continue
        push(node, ONE_FR)

    if coeff == 0:
        return ZERO

    # fold all exponential factors into one
    if exp_arg_terms:
        s = add(*exp_arg_terms)
        e = exp(s)
        if isinstance(e, Rat):
            coeff *= e.value
        else:
            b, ee = (e, ONE_FR) if not isinstance(e, Mul) else (None, None)
            if b is None:
                # exp() constructor may return coeff*exp(..) only via
                # rational folding, which cannot happen here
                raise ExprError("internal: unexpected exp result")
            _accumulate(b, ee)

    powers = []
    for base in order:
        e = acc[base]
        if e == 0:
            continue
        if isinstance(base, Rat):
            if e.denominator == 1:
                coeff *= base.value ** int(e)
                continue
        powers.append((base, e))
    powers.sort(key=lambda be: be[0]._key)
    if coeff == 0:
        return ZERO
    return _make_mul(coeff, tuple(powers))


def _int_root_split(n: int, root: int) -> Iterable[Tuple[int, int]]:
    """Factor n >= 2 into primes, yielding (prime, multiplicity)."""
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            yield p, k
        p += 1 if p == 2 else 2
    if m > 1:
        yield m, 1


def _rat_power_parts(value: Fraction, exponent: Fraction) -> list:
    """Split value**exponent into (base, exponent) parts with prime bases.

    value must be a positive or negative rational; negative values with
    an even exponent denominator produce an opaque Pow part.
    """
    parts: list = []
    if value < 0:
        if exponent.denominator % 2 == 1:
            # odd root of a negative number is real; pull the sign out
            sign = -1 if exponent.numerator % 2 == 1 else 1
            parts.append((rat(sign), ONE_FR))
            value = -value
        else:
            return [(Pow(rat(value), exponent), ONE_FR)]
    if value == 1:
        if not parts:
            parts.append((ONE, ONE_FR))
        return parts
    num, den = value.numerator, value.denominator
    for n, e_sign in ((num, 1), (den, -1)):
        if n == 1:
            continue
        if n > 10**12:
            parts.append((rat(n), exponent * e_sign))
            continue
        for p, k in _int_root_split(n, exponent.denominator):
            total = exponent * k * e_sign
            whole = Fraction(int(math.floor(total)), 1) if total.denominator == 1 else Fraction(total.numerator // total.denominator)
            fracpart = total - whole
            if whole != 0:
                parts.append((rat(p), whole))
            if fracpart != 0:
                parts.append((rat(p), fracpart))
    if not parts:
        parts.append((ONE, ONE_FR))
    return parts


def _is_surely_positive(e: Expr) -> bool:
    """Positivity decidable without a context: exp nodes and positive rationals."""
    if isinstance(e, Rat):
        return e.value > 0
    if isinstance(e, App) and e.fn == "exp":
        return True
    if isinstance(e, Mul):
        return e.coeff > 0 and all(
            _is_surely_positive(b) for b, _ in e.powers
        )
    if isinstance(e, Pow):
        return _is_surely_positive(e.base)
    return False


def pow_(base: ExprLike, exponent: RationalLike) -> Expr:
    """Canonical rational power.

    Integer exponents distribute over products and merge with inner
    exponents unconditionally.  Fractional exponents distribute only
    when validity does not depend on signs; otherwise an opaque Pow
    node is produced and left for assumption-aware simplification.
    """
    base = as_expr(base)
    if not isinstance(exponent, Fraction):
        exponent = Fraction(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Rat):
        if exponent.denominator == 1:
            return rat(base.value ** int(exponent))
        if base.value == 0:
            raise ExprError("zero raised to a fractional power")
        return mul(*[_make_mul(ONE_FR, ((b, e),)) if not (isinstance(b, Rat) and e == 1) else b for b, e in _rat_power_parts(base.value, exponent)])
    if isinstance(base, Mul):
        ok = exponent.denominator == 1 or (
            base.coeff > 0 and all(_merge_ok(b, e, exponent) for b, e in base.powers)
        )
        if ok:
            parts = [pow_(rat(base.coeff), exponent)]
            for b, e in base.powers:
                parts.append(_pow_single(b, e * exponent))
            return mul(*parts)
        return Pow(base, exponent)
    return _pow_single(base, exponent)


def _merge_ok(b: Expr, inner: Fraction, outer: Fraction) -> bool:
    """Is (b^inner)^outer -> b^(inner*outer) valid without assumptions?"""
    if outer.denominator == 1:
        return True
    if inner == 1:
        return True
    return _is_surely_positive(b)


def _pow_single(base: Expr, exponent: Fraction) -> Expr:
    """Power of a non-Rat, non-Mul base with exponent folding guards."""
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, App):
        if base.fn == "exp":
            return exp(mul(rat(exponent), base.arg))
        if base.fn == "sign" and exponent.denominator == 1:
            # sign^2 = 1 wherever sign is defined and nonzero is not
            # known; keep even powers only when the argument is surely
            # nonzero via simplify.  Here only fold exact squares of
            # surely-positive arguments.
            pass
    if isinstance(base, Pow):
        if _merge_ok(base.base, base.exponent, exponent):
            return pow_(base.base, base.exponent * exponent)
        return Pow(base, exponent)
    return _make_mul(ONE_FR, ((base, exponent),))


def div(a: ExprLike, b: ExprLike) -> Expr:
    return mul(as_expr(a), pow_(as_expr(b), Fraction(-1)))


def app(fn: str, arg: ExprLike) -> Expr:
    """Apply an elementary function with a few always-valid folds."""
    arg = as_expr(arg)
    if fn == "sqrt":
        return pow_(arg, Fraction(1, 2))
    if fn == "exp":
        return exp(arg)
    if fn == "ln":
        if arg == ONE:
            return ZERO
        if isinstance(arg, App) and arg.fn == "exp":
            return arg.arg
        return App("ln", arg)
    if fn == "abs":
        if isinstance(arg, Rat):
            return rat(abs(arg.value))
        if _is_surely_positive(arg):
            return arg
        if isinstance(arg, App) and arg.fn == "abs":
            return arg
        if isinstance(arg, App) and arg.fn == "sign":
            # sign is defined away from zeros, where its modulus is 1
            return ONE
        coeff, powers = _as_coeff_powers(arg)
        inner = _make_mul(ONE_FR, powers)
        if _is_surely_positive(inner):
            return mul(rat(abs(coeff)), inner)
        if abs(coeff) != 1:
            return mul(rat(abs(coeff)), App("abs", inner))
        return App("abs", inner)
    if fn == "sign":
        if isinstance(arg, Rat):
            if arg.value == 0:
                raise ExprError("sign(0) is undefined here")
            return ONE if arg.value > 0 else MINUS_ONE
        if _is_surely_positive(arg):
            return ONE
        if isinstance(arg, App) and arg.fn == "abs":
            return ONE
        if isinstance(arg, App) and arg.fn == "sign":
            return arg
        coeff, powers = _as_coeff_powers(arg)
        if coeff < 0:
            return mul(MINUS_ONE, app("sign", _make_mul(-coeff, powers)))
        if coeff != 1:
            return app("sign", _make_mul(ONE_FR, powers))
        return App("sign", arg)
    if fn == "sin":
        if arg == ZERO:
            return ZERO
        return App("sin", arg)
    if fn == "cos":
        if arg == ZERO:
            return ONE
        return App("cos", arg)
    raise ExprError(f"unknown function {fn}")


def exp(arg: ExprLike) -> Expr:
    arg = as_expr(arg)
    if arg == ZERO:
        return ONE
    if isinstance(arg, App) and arg.fn == "ln":
        return arg.arg
    return App("exp", arg)


def ln(arg: ExprLike) -> Expr:
    return app("ln", arg)


def sqrt(arg: ExprLike) -> Expr:
    return pow_(as_expr(arg), Fraction(1, 2))


def integral(body: ExprLike, var_name: str) -> Expr:
    body = as_expr(body)
    if body == ZERO:
        return ZERO
    if not contains_var(body, var_name):
        # canonical antiderivative of a constant-in-var body
        return mul(body, var(var_name))
    return Int(body, var_name)


# ---------------------------------------------------------------------------
# structure helpers


def atoms_of(e: Expr) -> list:
    """All leaf unknowns of e: Vars, unapplied Func symbols, Int nodes.

    Int nodes are treated as opaque atoms; an antiderivative is a new
    transcendental as far as identity testing goes.  Explicitly applied
    Func nodes contribute their arguments' atoms plus themselves.
    """
    seen = set()
    out = []

    def walk(node: Expr) -> None:
        if isinstance(node, (Var, Int)):
            if node not in seen:
                seen.add(node)
                out.append(node)
            return
        if isinstance(node, Func):
            if node not in seen:
                seen.add(node)
                out.append(node)
            if node.args is not None:
                for a in node.args:
                    walk(a)
            return
        if isinstance(node, App):
            walk(node.arg)
        elif isinstance(node, Pow):
            walk(node.base)
        elif isinstance(node, Add):
            for t in node.terms:
                walk(t)
        elif isinstance(node, Mul):
            for b, _ in node.powers:
                walk(b)

    walk(e)
    return out


def contains_var(e: Expr, name: str) -> bool:
    """Does e mention the variable ``name`` (including via default args)?"""
    if isinstance(e, Var):
        return e.name == name
    if isinstance(e, Rat):
        return False
    if isinstance(e, Func):
        if e.args is None:
            return name in e.argnames
        return any(contains_var(a, name) for a in e.args)
    if isinstance(e, App):
        return contains_var(e.arg, name)
    if isinstance(e, Int):
        return e.var == name or contains_var(e.body, name)
    if isinstance(e, Pow):
        return contains_var(e.base, name)
    if isinstance(e, Add):
        return any(contains_var(t, name) for t in e.terms)
    if isinstance(e, Mul):
        return any(contains_var(b, name) for b, _ in e.powers)
    raise ExprError(f"unknown node {type(e)}")


def is_rational_const(e: Expr) -> bool:
    return isinstance(e, Rat)
