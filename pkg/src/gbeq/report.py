"""Report types shared by membership, residual, and transport checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .expr import Expr, ZeroResult, format_expr

REJECTED = "REJECTED_PRECONDITION"
OBSTRUCTION = "OBSTRUCTION"
MEMBER = "MEMBER"


@dataclass
class ConditionReport:
    """One named condition inside a larger verification."""

    description: str
    ok: bool
    verdict: str
    detail: str = ""

    def to_json(self) -> Dict:
        out = {
            "description": self.description,
            "ok": self.ok,
            "verdict": self.verdict,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class VerificationReport:
    """Outcome of a check, serializable to the JSON shape the CLI emits."""

    verdict: str
    residual_text: str
    tolerance: float
    seed: int
    summary: str
    samples: List[Tuple[Dict[str, float], float]] = field(default_factory=list)
    conditions: List[ConditionReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        from .expr import NUMERIC_ZERO, SYMBOLIC_ZERO

        if self.conditions:
            return all(c.ok for c in self.conditions) and self.verdict not in (
                REJECTED,
                OBSTRUCTION,
            )
        return self.verdict in (SYMBOLIC_ZERO, NUMERIC_ZERO, MEMBER)

    def to_json(self) -> Dict:
        out = {
            "verdict": self.verdict,
            "residual_text": self.residual_text,
            "samples": [
                {"point": point, "value": value} for point, value in self.samples
            ],
            "tolerance": self.tolerance,
            "seed": self.seed,
            "summary": self.summary,
        }
        if self.conditions:
            out["conditions"] = [c.to_json() for c in self.conditions]
        return out


def report_from_zero(result: ZeroResult, summary: str = "") -> VerificationReport:
    """Wrap a ZeroResult in a report."""
    return VerificationReport(
        verdict=result.verdict,
        residual_text=format_expr(result.residual),
        tolerance=result.tolerance,
        seed=result.seed,
        summary=summary or result.summary(),
        samples=list(result.samples),
    )
