"""
Certificate ledger for averaging traces.

Grades every recorded iterate against the convergence inequalities that hold
for near representations, keeping one entry per (inequality, iterate).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from ..reps.iteration import ConvergenceTrace, quadratic_bound

logger = logging.getLogger(__name__)

DEFAULT_SLACK = 1e-9

# Inequalities checked per iterate, in report order.
CERTIFICATES = (
    "quadratic_step",    # r_{i+1} <= 2 (b_i/(1-r_i))^2 r_i^2
    "norm_step",         # b_{i+1} <= b_i/(1-r_i)
    "doubly_exponential",  # r_i <= eps^(2^i) / (6 b0^2)
    "norm_ceiling",      # b_i/(1-r_i) <= sqrt(3) b0
    "step_size",         # step_i <= b_i r_i/(1-r_i)
    "geometric_norm",    # b_i <= (4/3)^i b0
    "geometric_defect",  # r_i <= 2^-i r0
    "geometric_step",    # step_i <= (2/3)^i b0/3
)


def _doubly_exponential(eps: float, i: int) -> float:
    try:
        return eps ** (2 ** i)
    except OverflowError:
        return math.inf


@dataclass
class CertificateCheck:
    name: str
    i: int
    lhs: float
    rhs: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "i": self.i, "lhs": self.lhs, "rhs": self.rhs, "passed": self.passed}


@dataclass
class LedgerReport:
    """All checks of one trace. Uncertified traces are graded but never fail."""
    certified: bool
    checks: List[CertificateCheck] = field(default_factory=list)

    @property
    def violations(self) -> List[CertificateCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def ok(self) -> bool:
        return not self.certified or not self.violations

    def by_name(self, name: str) -> List[CertificateCheck]:
        return [c for c in self.checks if c.name == name]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "certified": self.certified,
            "ok": self.ok,
            "n_checks": len(self.checks),
            "violations": [c.to_dict() for c in self.violations],
            "per_certificate": {
                name: all(c.passed for c in self.by_name(name)) for name in CERTIFICATES
            },
        }


class CertificateLedger:
    """Grades convergence traces against the near-representation inequalities."""

    def __init__(self, slack: float = DEFAULT_SLACK):
        """
        Args:
            slack: relative tolerance; lhs <= rhs + slack * max(1, |rhs|) passes
        """
        self.slack = slack

    def _check(self, report: LedgerReport, name: str, i: int, lhs: Optional[float],
               rhs: Optional[float]) -> None:
        if lhs is None or rhs is None:
            return
        passed = lhs <= rhs + self.slack * max(1.0, abs(rhs)) if math.isfinite(lhs) else False
        report.checks.append(CertificateCheck(name=name, i=i, lhs=lhs, rhs=rhs, passed=passed))

    def grade(self, trace: ConvergenceTrace) -> LedgerReport:
        report = LedgerReport(certified=trace.certified)
        b0, eps = trace.b0, trace.epsilon
        records = trace.records
        for k, rec in enumerate(records):
            nxt = records[k + 1] if k + 1 < len(records) else None
            i, b, r = rec.i, rec.b, rec.r
            contracting = r < 1
            if nxt is not None and contracting:
                self._check(report, "quadratic_step", i, nxt.r, quadratic_bound(b, r))
                self._check(report, "norm_step", i, nxt.b, b / (1 - r))
            if b0 > 0:
                self._check(report, "doubly_exponential", i, r, _doubly_exponential(eps, i) / (6 * b0 * b0))
            if contracting:
                self._check(report, "norm_ceiling", i, b / (1 - r), math.sqrt(3) * b0)
                if rec.step is not None:
                    self._check(report, "step_size", i, rec.step, b * r / (1 - r))
            self._check(report, "geometric_norm", i, b, (4 / 3) ** i * b0)
            self._check(report, "geometric_defect", i, r, 0.5 ** i * trace.r0)
            if rec.step is not None:
                self._check(report, "geometric_step", i, rec.step, (2 / 3) ** i * b0 / 3)

        if report.certified and report.violations:
            first = report.violations[0]
            logger.warning("Certificate %s violated at iterate %d: %.6g > %.6g",
                           first.name, first.i, first.lhs, first.rhs)
        return report

    def recovery_bound(self, trace: ConvergenceTrace) -> float:
        """Bound 2 sqrt(3) b0 r0 on the distance from the start to the limit."""
        return 2 * math.sqrt(3) * trace.b0 * trace.r0
