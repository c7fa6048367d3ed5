"""Deciding whether an expression vanishes identically.

The symbolic route (simplify, expand, clear denominators) settles
every rational identity exactly.  When it does not reduce to zero the
expression is sampled: either per jet coordinate, treating each
derivative atom as an independent unknown, or, when function symbols
appear with explicit arguments or under antiderivatives, by binding
every symbol to a random polynomial stand-in so that all occurrences
stay consistent.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .context import Context
from .context import NEGATIVE as FLAG_NEGATIVE
from .context import NONZERO as FLAG_NONZERO
from .context import POSITIVE as FLAG_POSITIVE
from .fmt import format_expr
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
    add,
    atoms_of,
    mul,
    pow_,
    rat,
    var,
)
from .numeric import EvalError, Evaluator
from .simplify import normal_form, simplify

SYMBOLIC_ZERO = "SYMBOLIC_ZERO"
NUMERIC_ZERO = "NUMERIC_ZERO"
NONZERO = "NONZERO"

_MAGNITUDE = (0.1, 2.0)


@dataclass
class ZeroResult:
    """Outcome of an identity test."""

    verdict: str
    residual: Expr
    tolerance: float
    seed: int
    samples: List[Tuple[Dict[str, float], float]] = field(default_factory=list)
    max_abs: float = 0.0
    note: str = ""

    def __bool__(self) -> bool:
        return self.verdict in (SYMBOLIC_ZERO, NUMERIC_ZERO)

    def summary(self) -> str:
        if self.verdict == SYMBOLIC_ZERO:
            return "reduced to 0 symbolically"
        if self.verdict == NUMERIC_ZERO:
            return (
                f"not symbolically zero; {len(self.samples)} samples within "
                f"relative tolerance {self.tolerance:g} (max {self.max_abs:.3g})"
            )
        return f"nonzero (max sampled magnitude {self.max_abs:.3g})"


class SamplingError(ExprError):
    """Raised when no valid sample points could be drawn."""


def is_zero(
    e: Expr,
    ctx: Optional[Context] = None,
    tol: float = 1e-9,
    n_samples: int = 30,
    seed: int = 42,
    normalize: bool = True,
) -> ZeroResult:
    """Test whether e vanishes identically, symbolically then numerically.

    By default the numeric stage samples the cleared-denominator
    normal form, which is the right notion for identities between
    opaque symbols.  With normalize=False it samples the expression's
    own values instead (after plain simplification), so verdicts carry
    value semantics: small-but-nonzero residuals of approximate data
    count as NUMERIC_ZERO.
    """
    nf = normal_form(e, ctx)
    if nf == ZERO:
        return ZeroResult(SYMBOLIC_ZERO, nf, tol, seed)
    if not normalize:
        nf = simplify(e, ctx)
    if isinstance(nf, Rat):
        return ZeroResult(
            NONZERO, nf, tol, seed, samples=[({}, float(nf.value))],
            max_abs=abs(float(nf.value)),
        )
    if _needs_standins(nf):
        return _sample_standins(nf, ctx, tol, n_samples, seed)
    return _sample_jets(nf, ctx, tol, n_samples, seed)


def _needs_standins(e: Expr) -> bool:
    """Explicit applications and antiderivatives correlate occurrences."""
    if isinstance(e, (Rat, Var)):
        return False
    if isinstance(e, Func):
        return e.args is not None
    if isinstance(e, Int):
        return True
    if isinstance(e, App):
        return _needs_standins(e.arg)
    if isinstance(e, Pow):
        return _needs_standins(e.base)
    if isinstance(e, Add):
        return any(_needs_standins(t) for t in e.terms)
    if isinstance(e, Mul):
        return any(_needs_standins(b) for b, _ in e.powers)
    raise ExprError(f"unknown node {type(e).__name__}")


def _terms_of(e: Expr) -> Tuple[Expr, ...]:
    return e.terms if isinstance(e, Add) else (e,)


def _draw_signed(rng: random.Random, sign: Optional[int]) -> float:
    mag = rng.uniform(*_MAGNITUDE)
    if sign is None:
        sign = rng.choice((1, -1))
    return sign * mag


def _atom_sign(ctx: Optional[Context], atom: Expr) -> Optional[int]:
    if ctx is None:
        return None
    return ctx.sign_of(atom)


def _check_terms(
    terms: Tuple[Expr, ...],
    evaluator: Evaluator,
    point: Dict[str, float],
    tol: float,
) -> Tuple[float, float]:
    """Return (total, allowance) for the relative-tolerance test."""
    values = [evaluator(t, point) for t in terms]
    total = sum(values)
    scale = max([1.0] + [abs(v) for v in values])
    return total, tol * scale


def _sample_jets(
    nf: Expr,
    ctx: Optional[Context],
    tol: float,
    n_samples: int,
    seed: int,
) -> ZeroResult:
    rng = random.Random(seed)
    atoms = atoms_of(nf)
    terms = _terms_of(nf)
    samples: List[Tuple[Dict[str, float], float]] = []
    max_abs = 0.0
    attempts = 0
    while len(samples) < n_samples:
        attempts += 1
        if attempts > n_samples * 20:
            raise SamplingError("could not draw valid sample points")
        values = {a: _draw_signed(rng, _atom_sign(ctx, a)) for a in atoms}
        point = {a.name: v for a, v in values.items() if isinstance(a, Var)}
        evaluator = Evaluator(atom_values=values)
        try:
            total, allowance = _check_terms(terms, evaluator, point, tol)
        except EvalError:
            continue
        label = {format_expr(a): v for a, v in values.items()}
        samples.append((label, total))
        max_abs = max(max_abs, abs(total))
        if abs(total) > allowance:
            return ZeroResult(
                NONZERO, nf, tol, seed, samples=samples, max_abs=max_abs
            )
    return ZeroResult(
        NUMERIC_ZERO, nf, tol, seed, samples=samples, max_abs=max_abs
    )


# -- stand-in sampling ------------------------------------------------------


def _collect_symbols(e: Expr, funcs: Dict[str, Tuple[str, ...]], vars_: set) -> None:
    if isinstance(e, Rat):
        return
    if isinstance(e, Var):
        vars_.add(e.name)
        return
    if isinstance(e, Func):
        funcs[e.name] = e.argnames
        vars_.update(e.argnames)
        if e.args is not None:
            for a in e.args:
                _collect_symbols(a, funcs, vars_)
        return
    if isinstance(e, App):
        _collect_symbols(e.arg, funcs, vars_)
    elif isinstance(e, Int):
        vars_.add(e.var)
        _collect_symbols(e.body, funcs, vars_)
    elif isinstance(e, Pow):
        _collect_symbols(e.base, funcs, vars_)
    elif isinstance(e, Add):
        for t in e.terms:
            _collect_symbols(t, funcs, vars_)
    elif isinstance(e, Mul):
        for b, _ in e.powers:
            _collect_symbols(b, funcs, vars_)


def _func_constraints(
    ctx: Optional[Context], name: str, argnames: Tuple[str, ...]
) -> Dict[Tuple[int, ...], str]:
    """Sign requirements on derivative atoms of a symbol, keyed by didx."""
    out: Dict[Tuple[int, ...], str] = {}
    if ctx is None:
        return out
    for target, flags in ctx.assumptions.items():
        if isinstance(target, Func) and target.name == name and target.args is None:
            if FLAG_POSITIVE in flags:
                out[target.didx] = FLAG_POSITIVE
            elif FLAG_NEGATIVE in flags:
                out[target.didx] = FLAG_NEGATIVE
            elif FLAG_NONZERO in flags:
                out[target.didx] = FLAG_NONZERO
    return out


def _random_standin(
    rng: random.Random,
    argnames: Tuple[str, ...],
    constraints: Dict[Tuple[int, ...], str],
) -> Expr:
    """A random polynomial with boosted coefficients on constrained didx.

    Constraint satisfaction is verified afterwards at the sampled
    points; this only biases the draw toward satisfying them.
    """
    max_deg = 2
    for didx in constraints:
        max_deg = max(max_deg, sum(didx))
    quiet = 0.02 if constraints else 1.0
    terms = []
    k = len(argnames)
    for alpha in itertools.product(range(max_deg + 1), repeat=k):
        if sum(alpha) > max_deg:
            continue
        flag = constraints.get(alpha)
        if flag is None:
            c = rng.uniform(-1.2, 1.2) * quiet
        else:
            c = rng.uniform(0.9, 1.4)
            if flag == FLAG_NEGATIVE or (flag == FLAG_NONZERO and rng.random() < 0.5):
                c = -c
            # divide by the factorials the derivative will multiply back
            for a in alpha:
                for j in range(2, a + 1):
                    c /= j
        coeff = Fraction(round(c * 10**6), 10**6)
        if coeff == 0:
            continue
        factors: List[Expr] = [rat(coeff)]
        for name, power in zip(argnames, alpha):
            if power:
                factors.append(pow_(var(name), Fraction(power)))
        terms.append(mul(*factors))
    return add(*terms)


def _sample_standins(
    nf: Expr,
    ctx: Optional[Context],
    tol: float,
    n_samples: int,
    seed: int,
) -> ZeroResult:
    rng = random.Random(seed)
    funcs: Dict[str, Tuple[str, ...]] = {}
    var_names: set = set()
    _collect_symbols(nf, funcs, var_names)
    terms = _terms_of(nf)
    constraints = {
        name: _func_constraints(ctx, name, sig) for name, sig in funcs.items()
    }

    samples: List[Tuple[Dict[str, float], float]] = []
    max_abs = 0.0
    attempts = 0
    while len(samples) < n_samples:
        attempts += 1
        if attempts > n_samples * 30:
            raise SamplingError("could not draw valid stand-in rounds")
        point = {}
        for name in sorted(var_names):
            sign = _atom_sign(ctx, var(name))
            point[name] = _draw_signed(rng, sign)
        bindings = {
            name: _random_standin(rng, sig, constraints[name])
            for name, sig in sorted(funcs.items())
        }
        evaluator = Evaluator(bindings=bindings)
        if not _constraints_hold(evaluator, funcs, constraints, point):
            continue
        try:
            total, allowance = _check_terms(terms, evaluator, point, tol)
        except EvalError:
            continue
        samples.append((dict(point), total))
        max_abs = max(max_abs, abs(total))
        if abs(total) > allowance:
            return ZeroResult(
                NONZERO, nf, tol, seed, samples=samples, max_abs=max_abs,
                note="stand-in sampling",
            )
    return ZeroResult(
        NUMERIC_ZERO, nf, tol, seed, samples=samples, max_abs=max_abs,
        note="stand-in sampling",
    )


def _constraints_hold(
    evaluator: Evaluator,
    funcs: Dict[str, Tuple[str, ...]],
    constraints: Dict[str, Dict[Tuple[int, ...], str]],
    point: Dict[str, float],
) -> bool:
    for name, sig in funcs.items():
        for didx, flag in constraints[name].items():
            node = Func(name, sig, didx, None)
            try:
                v = evaluator(node, point)
            except EvalError:
                return False
            if flag == FLAG_POSITIVE and v < 1e-6:
                return False
            if flag == FLAG_NEGATIVE and v > -1e-6:
                return False
            if flag == FLAG_NONZERO and abs(v) < 1e-6:
                return False
    return True
