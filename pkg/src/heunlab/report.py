"""Machine-readable verification reports.

A report is a list of per-case records, one per verified claim, sorted by
case identifier so that equal runs produce byte-identical JSON.  Records hold
the verdict plus optional failure evidence (a witness point or coefficient
difference) and, for numeric cases, the measured residual.

The verdict ``fail-as-predicted`` marks checks whose *claim* is that a
printed-source variant fails: the check passes as a prediction, so it counts
as success for the exit status.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__
from .outcome import VerificationOutcome

PASSING_VERDICTS = ("pass", "fail-as-predicted", "not-applicable")


@dataclass(frozen=True)
class CaseRecord:
    case: str
    claim: str
    mode: str  # "exact" | "randomized" | "numeric"
    verdict: str  # "pass" | "fail" | "fail-as-predicted" | "not-applicable"
    witness: dict | None = None
    residual: float | None = None
    wall_time: float | None = None

    @staticmethod
    def from_outcome(out: VerificationOutcome, *, expect_failure: bool = False,
                     keep_time: bool = False) -> "CaseRecord":
        return CaseRecord(
            case=out.case_id,
            claim=out.claim,
            mode=out.mode,
            verdict=out.verdict(expect_failure=expect_failure),
            witness=out.witness,
            residual=out.residual,
            wall_time=out.wall_time if keep_time else None,
        )

    def ok(self) -> bool:
        return self.verdict in PASSING_VERDICTS


@dataclass
class Report:
    suite: str
    seed: int = 0
    records: list[CaseRecord] = field(default_factory=list)
    tool: str = "heunlab"
    version: str = __version__

    def add(self, record: CaseRecord) -> None:
        self.records.append(record)

    def sorted_records(self) -> list[CaseRecord]:
        return sorted(self.records, key=lambda r: r.case)

    def all_pass(self) -> bool:
        return all(r.ok() for r in self.records)

    def exit_status(self) -> int:
        return 0 if self.all_pass() else 1

    def to_json(self, *, timings: bool = False) -> str:
        records = []
        for r in self.sorted_records():
            item = {
                "case": r.case,
                "claim": r.claim,
                "mode": r.mode,
                "verdict": r.verdict,
                "witness": r.witness,
                "residual": r.residual,
            }
            if timings:
                item["wall_time"] = r.wall_time
            records.append(item)
        return json.dumps({
            "tool": self.tool,
            "version": self.version,
            "suite": self.suite,
            "seed": self.seed,
            "all_pass": self.all_pass(),
            "records": records,
        }, indent=1)

    @staticmethod
    def from_json(text: str) -> "Report":
        data = json.loads(text)
        report = Report(suite=data["suite"], seed=data["seed"],
                        tool=data["tool"], version=data["version"])
        for item in data["records"]:
            report.add(CaseRecord(
                case=item["case"],
                claim=item["claim"],
                mode=item["mode"],
                verdict=item["verdict"],
                witness=item.get("witness"),
                residual=item.get("residual"),
                wall_time=item.get("wall_time"),
            ))
        return report

    def to_text(self, *, timings: bool = False) -> str:
        lines = [f"{self.tool} {self.version} - suite: {self.suite}"]
        width = max((len(r.case) for r in self.records), default=4)
        for r in self.sorted_records():
            mark = "ok " if r.ok() else "FAIL"
            extra = ""
            if r.residual is not None:
                extra += f"  residual={r.residual:.3e}"
            if timings and r.wall_time is not None:
                extra += f"  {r.wall_time:.3f}s"
            lines.append(f"  [{mark}] {r.case.ljust(width)}  {r.verdict}{extra}")
            if r.witness and not r.ok():
                lines.append(f"         witness: {r.witness}")
        lines.append("all pass" if self.all_pass() else "FAILURES PRESENT")
        return "\n".join(lines) + "\n"
