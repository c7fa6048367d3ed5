"""Numeric construction of admissible (T, X0) pairs in the degenerate case.

When the diffusivity of a GBE_DIV member is quadratic in x,

    f = f2(t) x^2 + f1(t) x + f0(t),

maps with nonconstant T_t become admissible provided (T, X0) solve

    (ODE 1)   4 T_t T_tt f2 + 2 T_t T_ttt - 3 T_tt^2 = 0
    (ODE 2)   (kappa/2) |T_t|^(1/2) T_tt f1 + T_t X0_tt - T_tt X0_t = 0

(the x-linear and x-free parts of the classifying residual).  Both have
quadrature solutions:

    T_t = sigma (C2 I2 + C1)^(-2),   I2 = int exp(-2 int f2),
    X0  = -(kappa/2) int T_t int (|T_t|^(1/2) T_tt / T_t^2) f1 + C3 T + C4.

This module realises those quadratures with Chebyshev series on a
finite t-interval and reports ODE residuals through plain central
finite differences, so the check does not reuse the spectral
derivatives that built the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple

import numpy as np
from numpy.polynomial import chebyshev as C

from .expr import Expr, Evaluator, as_expr, contains_var, format_expr
from .report import VerificationReport

__all__ = ["DegDivSolution", "DegDivQuadrature", "DegDivError", "solve_deg_div"]


class DegDivError(Exception):
    """Raised for bad parameters or a quadrature that degenerates."""


def _central_weights(half_width: int, order: int) -> np.ndarray:
    """Finite-difference weights on offsets -half_width..half_width.

    Solved from the moment conditions sum w_k k^m = m! [m == order],
    which pins the stencil to its maximal order of accuracy.
    """
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    moments = np.vander(offsets, increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[order] = float(math.factorial(order))
    return np.linalg.solve(moments, rhs)


# 9-point central stencils, O(h^6)
_D1 = _central_weights(4, 1)
_D2 = _central_weights(4, 2)
_D3 = _central_weights(4, 3)
_MARGIN = 4


def _fd(values: np.ndarray, h: float, weights: np.ndarray, order: int) -> np.ndarray:
    """Apply a central stencil along the interior of a uniform grid."""
    out = np.convolve(values, weights[::-1], mode="valid") / h**order
    return out


def _eval_grid(e: Expr, ts: np.ndarray) -> np.ndarray:
    ev = Evaluator()
    return np.array([ev(e, {"t": float(tv)}) for tv in ts])


def _fit(values: np.ndarray, ts: np.ndarray, degree: int) -> C.Chebyshev:
    return C.Chebyshev.fit(ts, values, deg=degree, domain=[ts[0], ts[-1]])


@dataclass(frozen=True)
class DegDivSolution:
    """Parameters of one quadrature solution of the degenerate-case ODEs.

    f1 and f2 are the x-linear and x-quadratic diffusivity
    coefficients (expressions in t alone); kappa is the x-scaling of
    the underlying transform; constants = (C0, C1, C2, C3, C4), where
    C0 shifts T, (C1, C2) select the T branch, and C3, C4 shift X0 by
    C3 T + C4; sigma is the sign of T_t.
    """

    f1: Expr
    f2: Expr
    kappa: Fraction = Fraction(1)
    constants: Tuple[float, float, float, float, float] = (0.0, 1.0, 1.0, 0.0, 0.0)
    sigma: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "f1", as_expr(self.f1))
        object.__setattr__(self, "f2", as_expr(self.f2))
        object.__setattr__(self, "kappa", Fraction(self.kappa))
        object.__setattr__(
            self, "constants", tuple(float(c) for c in self.constants)
        )
        for name in ("f1", "f2"):
            e = getattr(self, name)
            if contains_var(e, "x"):
                raise DegDivError(f"{name} must not involve x: {format_expr(e)}")
        if self.sigma not in (1, -1):
            raise DegDivError("sigma must be +1 or -1")
        if self.kappa == 0:
            raise DegDivError("kappa must be nonzero")
        if len(self.constants) != 5:
            raise DegDivError("constants must be (C0, C1, C2, C3, C4)")
        if self.constants[1] == 0 and self.constants[2] == 0:
            raise DegDivError("C1 and C2 must not both vanish")


@dataclass
class DegDivQuadrature:
    """A solved (T, X0) pair, with callables and a residual check."""

    solution: DegDivSolution
    t_lo: float
    t_hi: float
    T_series: C.Chebyshev = field(repr=False)
    X0_series: C.Chebyshev = field(repr=False)

    def T(self, tv: float) -> float:
        return float(self.T_series(tv))

    def X0(self, tv: float) -> float:
        return float(self.X0_series(tv))

    def grid(self, n: int = 201) -> np.ndarray:
        return np.linspace(self.t_lo, self.t_hi, n)

    def ode_residuals(self, n: int = 201) -> Tuple[float, float]:
        """Max abs residual of each ODE, via finite differences only.

        Derivatives of T and X0 are rebuilt from pointwise samples
        with central stencils; nothing is reused from the spectral
        construction except the sampled values themselves.
        """
        ts = self.grid(n)
        h = float(ts[1] - ts[0])
        Tv = np.array([self.T(tv) for tv in ts])
        Xv = np.array([self.X0(tv) for tv in ts])
        T_t = _fd(Tv, h, _D1, 1)
        T_tt = _fd(Tv, h, _D2, 2)
        T_ttt = _fd(Tv, h, _D3, 3)
        X0_t = _fd(Xv, h, _D1, 1)
        X0_tt = _fd(Xv, h, _D2, 2)
        interior = ts[_MARGIN:-_MARGIN]
        f1v = _eval_grid(self.solution.f1, interior)
        f2v = _eval_grid(self.solution.f2, interior)
        r1 = 4.0 * T_t * T_tt * f2v + 2.0 * T_t * T_ttt - 3.0 * T_tt**2
        r2 = (
            0.5 * float(self.solution.kappa) * np.sqrt(np.abs(T_t)) * T_tt * f1v
            + T_t * X0_tt
            - T_tt * X0_t
        )
        return float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))

    def report(self, tol: float = 1e-6, n: int = 201) -> VerificationReport:
        r1, r2 = self.ode_residuals(n)
        ok = r1 <= tol and r2 <= tol
        return VerificationReport(
            verdict="NUMERIC_ZERO" if ok else "NONZERO",
            residual_text=(
                "finite-difference residuals of the two classifying ODEs"
            ),
            tolerance=tol,
            seed=0,
            summary=(
                f"max |ODE1| = {r1:.3e}, max |ODE2| = {r2:.3e} "
                f"on [{self.t_lo}, {self.t_hi}] ({n} points)"
            ),
            samples=[({"ode": 1.0}, r1), ({"ode": 2.0}, r2)],
        )


def solve_deg_div(
    sol: DegDivSolution,
    t_span: Tuple[float, float] = (0.1, 1.0),
    degree: int = 64,
) -> DegDivQuadrature:
    """Build the (T, X0) pair sol describes, on t_span.

    All antiderivatives are anchored at the left endpoint, so the
    constants parametrise solutions relative to t_span[0].  Raises
    DegDivError when the T branch has a pole inside the interval.
    """
    C0, C1, C2, C3, C4 = sol.constants
    t_lo, t_hi = float(t_span[0]), float(t_span[1])
    if not t_hi > t_lo:
        raise DegDivError("t_span must be increasing")

    ts = np.linspace(t_lo, t_hi, 4 * degree + 1)

    # T_t = sigma (C2 I2 + C1)^(-2), I2 = int exp(-2 int f2)
    f2_fit = _fit(_eval_grid(sol.f2, ts), ts, degree)
    I1 = f2_fit.integ(lbnd=t_lo)
    E = _fit(np.exp(-2.0 * I1(ts)), ts, degree)
    I2 = E.integ(lbnd=t_lo)
    denom = C2 * I2(ts) + C1
    crosses = float(np.min(denom)) < 0.0 < float(np.max(denom))
    if crosses or np.min(np.abs(denom)) < 1e-9:
        raise DegDivError(
            "C2 int exp(-2 int f2) + C1 vanishes inside t_span; "
            "the T branch has a pole here"
        )
    T_t_vals = float(sol.sigma) * denom**-2
    T_t_fit = _fit(T_t_vals, ts, degree)
    T_fit = T_t_fit.integ(lbnd=t_lo) + C0

    # X0 = -(kappa/2) int T_t int (|T_t|^(1/2) T_tt / T_t^2) f1 + C3 T + C4
    T_tt_vals = T_t_fit.deriv()(ts)
    f1_vals = _eval_grid(sol.f1, ts)
    J = np.sqrt(np.abs(T_t_vals)) * T_tt_vals / T_t_vals**2 * f1_vals
    I_inner = _fit(J, ts, degree).integ(lbnd=t_lo)
    K = _fit(T_t_vals * I_inner(ts), ts, degree)
    X0_fit = -0.5 * float(sol.kappa) * K.integ(lbnd=t_lo) + C3 * T_fit + C4

    return DegDivQuadrature(
        solution=sol,
        t_lo=t_lo,
        t_hi=t_hi,
        T_series=T_fit,
        X0_series=X0_fit,
    )
