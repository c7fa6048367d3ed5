"""Residual checks for concrete members and transport of solutions.

residual substitutes a candidate solution into the member's PDE and
grades the outcome: SYMBOLIC_ZERO when the residual reduces to zero
exactly, NUMERIC_ZERO when it merely stays within tolerance on a
sampled domain, NONZERO with a witness point otherwise.

transport_check ties a transform, a source member, a claimed target
member, and a source solution together: the transformed elements must
match the claimed ones, and the pushed solution must satisfy the
target PDE.  A transform whose own admissibility constraint fails
(the divergence-form or linear families) is REJECTED_PRECONDITION
before anything else runs.

Sampling is governed by a SampleDomain: per-variable interval unions,
named exclusion predicates (poles of a solution, say), a sample
count, and a seed.  Identical inputs and seed give identical reports.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .classes import CLASS_SPECS, EquationInstance, build_pde
from .expr import (
    Add,
    App,
    Context,
    EvalError,
    Evaluator,
    Expr,
    Func,
    Int,
    Mul,
    NONZERO,
    NUMERIC_ZERO,
    Pow,
    Rat,
    SYMBOLIC_ZERO,
    Var,
    ZERO,
    atoms_of,
    format_expr,
    is_zero,
    normal_form,
    simplify,
    substitute,
)
from .report import ConditionReport, REJECTED, VerificationReport
from .transforms import (
    ApplyResult,
    ImplicitInverseOf,
    Transform,
    TransformError,
    _merged_context,
    apply_transform,
)

DEFAULT_PIECES = ((-2.0, -0.1), (0.1, 2.0))


class VerifyError(Exception):
    """Raised when sampling cannot produce the requested points."""


@dataclass(frozen=True)
class Exclusion:
    """A named predicate accepted points must satisfy."""

    name: str
    predicate: Callable[[Dict[str, float]], bool]

    def holds(self, point: Dict[str, float]) -> bool:
        try:
            return bool(self.predicate(point))
        except (ArithmeticError, EvalError):
            return False


def magnitude_exclusion(
    e: Expr, threshold: float = 0.1, name: str = ""
) -> Exclusion:
    """Keep only points where |e| >= threshold (a tube around poles)."""
    ev = Evaluator()

    def predicate(point: Dict[str, float]) -> bool:
        return abs(ev(e, point)) >= threshold

    return Exclusion(
        name=name or f"|{format_expr(e)}| >= {threshold:g}",
        predicate=predicate,
    )


@dataclass(frozen=True)
class SampleDomain:
    """Where and how densely residuals are sampled.

    intervals maps a variable name to a union of closed intervals;
    variables not listed use the default pieces, which keep every
    coordinate away from zero.  Every accepted point satisfies all
    exclusions.
    """

    intervals: Mapping[str, Tuple[Tuple[float, float], ...]] = field(
        default_factory=dict
    )
    exclusions: Tuple[Exclusion, ...] = ()
    count: int = 30
    seed: int = 42

    def pieces(self, name: str) -> Tuple[Tuple[float, float], ...]:
        return tuple(self.intervals.get(name, DEFAULT_PIECES))

    def draw(self, names: Sequence[str], rng: random.Random) -> Dict[str, float]:
        """One point inside the intervals; exclusions are not consulted."""
        point = {}
        for name in names:
            lo, hi = rng.choice(self.pieces(name))
            point[name] = rng.uniform(lo, hi)
        return point

    def contains(self, point: Dict[str, float]) -> bool:
        for name, value in point.items():
            if not any(lo <= value <= hi for lo, hi in self.pieces(name)):
                return False
        return all(ex.holds(point) for ex in self.exclusions)

    def sample(self, names: Sequence[str]) -> List[Dict[str, float]]:
        """count points satisfying the intervals and all exclusions."""
        rng = random.Random(self.seed)
        out: List[Dict[str, float]] = []
        attempts = 0
        while len(out) < self.count:
            attempts += 1
            if attempts > max(1, self.count) * 50:
                raise VerifyError(
                    "could not draw enough points satisfying the exclusions"
                )
            point = self.draw(names, rng)
            if all(ex.holds(point) for ex in self.exclusions):
                out.append(point)
        return out


def default_domain(count: int = 30, seed: int = 42) -> SampleDomain:
    return SampleDomain(count=count, seed=seed)


def _has_opaque_symbols(e: Expr) -> bool:
    return any(isinstance(a, (Func, Int)) for a in atoms_of(e)) or _has_apps(e)


def _has_apps(e: Expr) -> bool:
    if isinstance(e, (Rat, Var, Func)):
        return isinstance(e, Func) and e.args is not None
    if isinstance(e, App):
        return True
    if isinstance(e, Int):
        return True
    if isinstance(e, Pow):
        return _has_apps(e.base)
    if isinstance(e, Add):
        return any(_has_apps(t) for t in e.terms)
    if isinstance(e, Mul):
        return any(_has_apps(b) for b, _ in e.powers)
    return False


def _var_names(e: Expr) -> List[str]:
    return sorted({a.name for a in atoms_of(e) if isinstance(a, Var)})


def _sample_residual(
    res_expr: Expr,
    domain: SampleDomain,
    tol: float,
    seed: int,
) -> VerificationReport:
    """Grade a function-free residual by its sampled values."""
    names = _var_names(res_expr)
    terms = res_expr.terms if isinstance(res_expr, Add) else (res_expr,)
    ev = Evaluator()
    rng = random.Random(seed)
    samples: List[Tuple[Dict[str, float], float]] = []
    max_abs = 0.0
    attempts = 0
    while len(samples) < domain.count:
        attempts += 1
        if attempts > max(1, domain.count) * 50:
            raise VerifyError(
                "could not draw enough valid points for the residual"
            )
        point = domain.draw(names, rng)
        if not all(ex.holds(point) for ex in domain.exclusions):
            continue
        try:
            values = [ev(term, point) for term in terms]
        except EvalError:
            continue
        total = sum(values)
        scale = max([1.0] + [abs(v) for v in values])
        samples.append((point, total))
        max_abs = max(max_abs, abs(total))
        if abs(total) > tol * scale:
            return VerificationReport(
                verdict=NONZERO,
                residual_text=format_expr(res_expr),
                tolerance=tol,
                seed=seed,
                summary=(
                    f"residual nonzero: |{total:.6g}| at "
                    + ", ".join(f"{k} = {v:.6g}" for k, v in sorted(point.items()))
                ),
                samples=samples,
            )
    return VerificationReport(
        verdict=NUMERIC_ZERO,
        residual_text=format_expr(res_expr),
        tolerance=tol,
        seed=seed,
        summary=(
            f"residual within tolerance on {len(samples)} points "
            f"(max |value| {max_abs:.3g})"
        ),
        samples=samples,
    )


def residual(
    inst: EquationInstance,
    candidate: Expr,
    tol: float = 1e-9,
    seed: Optional[int] = None,
    domain: Optional[SampleDomain] = None,
    assumptions: Sequence[Tuple[str, str]] = (),
) -> VerificationReport:
    """Does the candidate solve the member's PDE?

    The residual is judged by its sampled values, so approximate
    (float-contaminated) candidates that track a true solution to
    within tolerance still earn NUMERIC_ZERO.  When the member's
    elements are opaque symbols the domain cannot steer the sampler
    and the stand-in machinery of is_zero takes over; (name, flag)
    assumptions constrain how those symbols simplify and sample.
    """
    if domain is None:
        domain = default_domain()
    eff_seed = domain.seed if seed is None else seed
    ctx = inst.context()
    for name, flag in assumptions:
        ctx.assume_name(name, flag)
    pde = build_pde(inst, ctx)
    res_expr = simplify(
        substitute(pde, {inst.dependent: candidate}, ctx), ctx
    )
    if normal_form(res_expr, ctx) == ZERO:
        return VerificationReport(
            verdict=SYMBOLIC_ZERO,
            residual_text="0",
            tolerance=tol,
            seed=eff_seed,
            summary="residual reduced to 0 symbolically",
        )
    if _has_opaque_symbols(res_expr):
        zr = is_zero(
            res_expr, ctx, tol=tol, n_samples=domain.count, seed=eff_seed,
            normalize=False,
        )
        return VerificationReport(
            verdict=zr.verdict,
            residual_text=format_expr(res_expr),
            tolerance=tol,
            seed=eff_seed,
            summary="opaque symbols present; " + zr.summary(),
            samples=list(zr.samples),
        )
    return _sample_residual(res_expr, domain, tol, eff_seed)


def push_solution(
    res: ApplyResult, solution: Expr, ctx: Optional[Context] = None
) -> Optional[Expr]:
    """A source solution rewritten in target coordinates, or None.

    None means the coordinate change has no closed-form inverse, so
    the image exists only parametrically.
    """
    if res.inverse is None:
        return None
    if ctx is None:
        ctx = res.source.context()
    at_source = substitute(res.map.u, {res.source.dependent: solution}, ctx)
    return simplify(
        substitute(at_source, {"t": res.inverse.t, "x": res.inverse.x}, ctx),
        ctx,
    )


def _rejected(
    reason: str, tol: float, seed: int, conditions: List[ConditionReport]
) -> VerificationReport:
    return VerificationReport(
        verdict=REJECTED,
        residual_text=reason,
        tolerance=tol,
        seed=seed,
        summary="transform rejected: " + reason,
        conditions=conditions,
    )


def transport_check(
    tr: Union[Transform, ImplicitInverseOf],
    source: EquationInstance,
    target: EquationInstance,
    solution: Expr,
    tol: float = 1e-9,
    seed: int = 42,
    domain: Optional[SampleDomain] = None,
    assumptions: Sequence[Tuple[str, str]] = (),
) -> VerificationReport:
    """apply(tr, source) = target, and the pushed solution solves it.

    Element equalities are checked without inverting: each claimed
    target element is composed with the forward maps and compared to
    the pullback.  A mismatch short-circuits before any solution work.
    The solution condition then pushes the given solution into target
    coordinates and grades its residual; when the coordinate change
    has no closed-form inverse this condition is skipped with a note,
    since nothing independent can be evaluated.
    """
    conditions: List[ConditionReport] = []
    if isinstance(tr, ImplicitInverseOf):
        return _rejected(
            "an implicit inverse cannot be applied; verify its forward "
            "transform instead",
            tol, seed, conditions,
        )
    try:
        res = apply_transform(tr, source, tol=tol, seed=seed)
    except TransformError as exc:
        conditions.append(
            ConditionReport(
                description="transform is admissible for the source member",
                ok=False,
                verdict=REJECTED,
                detail=str(exc),
            )
        )
        return _rejected(str(exc), tol, seed, conditions)

    expected = set(res.pullback)
    claimed = set(CLASS_SPECS[target.class_id].elements)
    if expected != claimed:
        raise ValueError(
            f"target class {target.class_id} carries elements "
            f"{sorted(claimed)}, but the transform produces {sorted(expected)}"
        )

    sign = getattr(tr, "sign_Tt", 1)
    ctx = _merged_context(source, tr.family, sign)
    for name, flag in assumptions:
        ctx.assume_name(name, flag)
    mismatch = False
    # the dependent symbol joins the mapping because superclass-style
    # elements may carry it (H1 = u and friends)
    point = {"t": res.map.t, "x": res.map.x, target.dependent: res.map.u}
    for name in sorted(res.pullback):
        composed = substitute(target.elements[name], point, ctx)
        zr = is_zero(res.pullback[name] - composed, ctx, tol=tol, seed=seed)
        conditions.append(
            ConditionReport(
                description=f"element {name}: transform of source matches target",
                ok=bool(zr),
                verdict=zr.verdict,
                detail=zr.summary(),
            )
        )
        if not zr:
            mismatch = True
            break

    samples: List[Tuple[Dict[str, float], float]] = []
    note = ""
    if not mismatch:
        pushed = push_solution(res, solution)
        if pushed is None:
            note = "; solution condition skipped (no closed-form inverse)"
        else:
            # the target context only declares the class symbols, so
            # assumptions about transform parameters stay behind
            known = set(CLASS_SPECS[target.class_id].elements)
            known |= {"t", "x", target.dependent}
            rep = residual(
                target, pushed, tol=tol, seed=seed, domain=domain,
                assumptions=tuple(p for p in assumptions if p[0] in known),
            )
            samples = list(rep.samples)
            conditions.append(
                ConditionReport(
                    description="pushed solution satisfies the target member",
                    ok=rep.ok,
                    verdict=rep.verdict,
                    detail=rep.summary,
                )
            )

    all_ok = all(c.ok for c in conditions)
    worst = SYMBOLIC_ZERO
    for c in conditions:
        if c.verdict == NUMERIC_ZERO:
            worst = NUMERIC_ZERO
    return VerificationReport(
        verdict=worst if all_ok else NONZERO,
        residual_text="element agreement and pushed-solution residual",
        tolerance=tol,
        seed=seed,
        summary=(
            f"{sum(c.ok for c in conditions)}/{len(conditions)} transport "
            "conditions hold" + note
        ),
        samples=samples,
        conditions=conditions,
    )
