"""Audit report container shared by the audit and experiment modules."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class AuditReport:
    """Outcome of one named inequality check.

    Margins are signed as RHS - LHS, so the audited inequality holds at a
    sample exactly when its margin is >= 0. The report passes iff
    worst_margin >= -tolerance.
    """

    name: str
    samples: int
    worst_margin: float
    tolerance: float
    params: dict = field(default_factory=dict)
    details: list | None = None

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -self.tolerance

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "params": dict(self.params),
            "samples": self.samples,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.details is not None:
            doc["details"] = self.details
        return doc
