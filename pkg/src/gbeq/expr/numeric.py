"""Floating-point evaluation of expressions.

Function symbols evaluate through bindings, which map a symbol name to
a closed-form expression in its signature variables; derivative nodes
differentiate the binding symbolically before evaluating, so all
occurrences of a symbol stay consistent.  Int nodes integrate their
body numerically from a fixed base point with adaptive quadrature.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from scipy.integrate import quad

from .calculus import differentiate
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
)


class EvalError(ExprError):
    """Raised when an expression cannot be evaluated at a point."""


class Evaluator:
    """Evaluates expressions at numeric points.

    Args:
        bindings: closed forms for function symbols, keyed by name.
            Each value is an expression in the symbol's signature
            variables.
        base_point: lower limit used for Int nodes.
        quad_tol: absolute tolerance passed to the quadrature.
    """

    def __init__(
        self,
        bindings: Optional[Mapping[str, Expr]] = None,
        base_point: float = 0.0,
        quad_tol: float = 1e-11,
        atom_values: Optional[Mapping[Expr, float]] = None,
    ):
        self.bindings = dict(bindings) if bindings else {}
        self.base_point = base_point
        self.quad_tol = quad_tol
        self.atom_values = dict(atom_values) if atom_values else {}
        self._deriv_cache: Dict[Tuple[str, Tuple[int, ...]], Expr] = {}

    def __call__(self, e: Expr, point: Mapping[str, float]) -> float:
        return self._eval(e, dict(point))

    def _eval(self, e: Expr, point: Dict[str, float]) -> float:
        if isinstance(e, Rat):
            return float(e.value)
        if isinstance(e, Var):
            try:
                return point[e.name]
            except KeyError:
                raise EvalError(f"no value for variable {e.name}") from None
        if isinstance(e, Add):
            return sum(self._eval(t, point) for t in e.terms)
        if isinstance(e, Mul):
            out = float(e.coeff)
            for b, ex in e.powers:
                out *= _float_pow(self._eval(b, point), ex)
            return out
        if isinstance(e, Pow):
            return _float_pow(self._eval(e.base, point), e.exponent)
        if isinstance(e, App):
            v = self._eval(e.arg, point)
            if e.fn == "exp":
                if v > 700.0:
                    raise EvalError("exp overflow")
                return math.exp(v)
            if e.fn == "ln":
                if v <= 0.0:
                    raise EvalError("ln of a non-positive value")
                return math.log(v)
            if e.fn == "abs":
                return abs(v)
            if e.fn == "sign":
                if v == 0.0:
                    raise EvalError("sign(0)")
                return 1.0 if v > 0.0 else -1.0
            if e.fn == "sin":
                return math.sin(v)
            if e.fn == "cos":
                return math.cos(v)
            raise EvalError(f"cannot evaluate {e.fn}")
        if isinstance(e, Func):
            if self.atom_values:
                v = self.atom_values.get(e)
                if v is not None:
                    return v
            return self._eval_func(e, point)
        if isinstance(e, Int):
            if self.atom_values:
                v = self.atom_values.get(e)
                if v is not None:
                    return v
            return self._eval_int(e, point)
        raise EvalError(f"cannot evaluate {type(e).__name__}")

    def _eval_func(self, e: Func, point: Dict[str, float]) -> float:
        binding = self.bindings.get(e.name)
        if binding is None:
            raise EvalError(f"no binding for function symbol {e.name}")
        key = (e.name, e.didx)
        deriv = self._deriv_cache.get(key)
        if deriv is None:
            deriv = binding
            for argname, count in zip(e.argnames, e.didx):
                for _ in range(count):
                    deriv = differentiate(deriv, argname)
            self._deriv_cache[key] = deriv
        if e.args is None:
            argvals = []
            for an in e.argnames:
                if an not in point:
                    raise EvalError(f"no value for {an} applying {e.name}")
                argvals.append(point[an])
        else:
            argvals = [self._eval(a, point) for a in e.args]
        return self._eval(deriv, dict(zip(e.argnames, argvals)))

    def _eval_int(self, e: Int, point: Dict[str, float]) -> float:
        if e.var not in point:
            raise EvalError(f"no value for integration variable {e.var}")
        upper = point[e.var]

        def f(s: float) -> float:
            inner = dict(point)
            inner[e.var] = s
            return self._eval(e.body, inner)

        value, _ = quad(
            f, self.base_point, upper, epsabs=self.quad_tol, epsrel=self.quad_tol,
            limit=200,
        )
        return value


def _float_pow(base: float, exponent: Fraction) -> float:
    if exponent.denominator == 1:
        n = int(exponent)
        if base == 0.0 and n < 0:
            raise EvalError("division by zero")
        return base**n
    if base < 0.0:
        if exponent.denominator % 2 == 1:
            mag = abs(base) ** float(exponent)
            return mag if exponent.numerator % 2 == 0 else -mag
        raise EvalError(f"negative base {base} under even root")
    if base == 0.0 and exponent < 0:
        raise EvalError("division by zero")
    return base ** float(exponent)


def evaluate(
    e: Expr,
    point: Mapping[str, float],
    bindings: Optional[Mapping[str, Expr]] = None,
    base_point: float = 0.0,
) -> float:
    """One-shot evaluation; see Evaluator for the conventions."""
    return Evaluator(bindings, base_point)(e, point)
