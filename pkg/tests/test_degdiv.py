"""Quadrature solver for the degenerate divergence-form reduction."""

from fractions import Fraction

import pytest

from gbeq.degdiv import DegDivError, DegDivSolution, solve_deg_div
from gbeq.expr import parse, rat, var, Context


def tctx():
    c = Context()
    c.add_var("t")
    return c


def test_trivial_coefficients_give_linear_time():
    sol = DegDivSolution(f1=rat(0), f2=rat(0))
    quad = solve_deg_div(sol)
    # f2 = 0 and C2 = 1 make T_t = (t - t0 + 1)^(-2)
    rep = quad.report()
    assert rep.verdict in ("NUMERIC_ZERO", "SYMBOLIC_ZERO")
    r1, r2 = quad.ode_residuals()
    assert r1 <= 1e-6
    assert r2 <= 1e-6


def test_closed_form_time_reparametrisation():
    # with f2 = 0: W = C2 (t - t0) + C1 and T = 2 / W - 2 / W(t0)
    sol = DegDivSolution(
        f1=rat(0), f2=rat(0), constants=(0.0, 1.0, -0.5, 0.0, 0.0)
    )
    quad = solve_deg_div(sol)
    for tv in (0.3, 0.55, 1.0):
        w = 1.0 - (tv - 0.1) / 2.0
        assert quad.T(tv) == pytest.approx(2.0 / w - 2.0, abs=1e-8)


def test_nonzero_forcing_term():
    c = tctx()
    sol = DegDivSolution(f1=parse("t", c), f2=rat(0), constants=(0.0, 1.0, -0.5, 0.0, 0.0))
    quad = solve_deg_div(sol)
    rep = quad.report()
    assert rep.ok
    ts = quad.grid(n=11)
    assert len(ts) == 11
    assert ts[0] == pytest.approx(0.1)
    assert ts[-1] == pytest.approx(1.0)


def test_exponential_weight():
    c = tctx()
    sol = DegDivSolution(f1=rat(0), f2=rat(1), constants=(0.0, 1.0, 1.0, 0.0, 0.0))
    quad = solve_deg_div(sol)
    rep = quad.report()
    assert rep.ok
    r1, r2 = quad.ode_residuals()
    assert r1 <= 1e-6
    assert r2 <= 1e-6


def test_negative_sigma_decreasing_time():
    sol = DegDivSolution(f1=rat(0), f2=rat(0), sigma=-1)
    quad = solve_deg_div(sol)
    assert quad.T(1.0) < quad.T(0.1)
    assert quad.report().ok


def test_pole_inside_span_is_rejected():
    # W = (t - 0.1) - 0.4 crosses zero at t = 0.5
    sol = DegDivSolution(
        f1=rat(0), f2=rat(0), constants=(0.0, -0.4, 1.0, 0.0, 0.0)
    )
    with pytest.raises(DegDivError, match="vanishes inside"):
        solve_deg_div(sol)


def test_solution_validation():
    c = Context()
    c.add_var("t")
    c.add_var("x")
    with pytest.raises(DegDivError):
        DegDivSolution(f1=parse("x", c), f2=rat(0))
    with pytest.raises(DegDivError):
        DegDivSolution(f1=rat(0), f2=rat(0), kappa=Fraction(0))
    with pytest.raises(DegDivError):
        DegDivSolution(f1=rat(0), f2=rat(0), constants=(0.0, 0.0, 0.0, 0.0, 0.0))
    with pytest.raises(DegDivError):
        DegDivSolution(f1=rat(0), f2=rat(0), constants=(0.0, 1.0))
    with pytest.raises(DegDivError):
        DegDivSolution(f1=rat(0), f2=rat(0), sigma=2)


def test_report_carries_tolerance_and_samples():
    sol = DegDivSolution(f1=rat(0), f2=rat(0))
    quad = solve_deg_div(sol)
    rep = quad.report(tol=1e-6, n=51)
    assert rep.tolerance == 1e-6
    assert rep.ok
