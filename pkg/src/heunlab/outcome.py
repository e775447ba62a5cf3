"""Structured verdicts shared by the symbolic and numeric verifiers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class VerificationOutcome:
    """One verified claim: identifier, verdict, and failure evidence.

    ``witness`` carries a concrete counterexample (an evaluation point and the
    offending value or coefficient difference) when the claim fails;
    ``residual`` carries the measured number for numeric claims.
    """

    case_id: str
    claim: str
    mode: str  # "exact" | "randomized" | "numeric"
    passed: bool
    witness: dict | None = None
    residual: float | None = None
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def verdict(self, *, expect_failure: bool = False) -> str:
        if expect_failure:
            return "fail-as-predicted" if not self.passed else "fail"
        return "pass" if self.passed else "fail"
