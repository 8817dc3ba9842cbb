"""
PMP Report Data Structures

This module defines the data structures used to report PMP-condition checks, the
endpoint/time-optimal equivalence check and the transversality decomposition. Verdicts are
data: a failing condition becomes a PmpIssue inside the report, never an exception.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np


class IssueSeverity(Enum):
    """
    Severity levels for PMP issues.

    - ERROR: a condition fails at the requested tolerance
    - WARNING: the condition holds but close to the tolerance, or the check was degenerate
    - INFO: informational note
    """
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass
class PmpIssue:
    """
    A single PMP-condition finding.

    Attributes:
        code: identifier of the issue type (e.g. "POINTWISE_MAX_VIOLATED")
        message: human-readable description
        severity: ERROR, WARNING or INFO
        condition: the PMP condition concerned (pointwise_max, hamiltonian_constancy, ...)
        residual: the measured residual
        tolerance: the tolerance it was compared against
        time: arc length of the worst sample, when the condition is pointwise in time
        explanation: what the failure means for the candidate
    """
    code: str
    message: str
    severity: IssueSeverity
    condition: Optional[str] = None
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    time: Optional[float] = None
    explanation: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "code": self.code,
            "message": self.message,
            "severity": self.severity.value,
            "condition": self.condition,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "time": self.time,
            "explanation": self.explanation,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PmpIssue":
        return cls(
            code=data["code"],
            message=data["message"],
            severity=IssueSeverity(data["severity"]),
            condition=data.get("condition"),
            residual=data.get("residual"),
            tolerance=data.get("tolerance"),
            time=data.get("time"),
            explanation=data.get("explanation"),
        )

    def __str__(self) -> str:
        parts = [f"[{self.severity.value.upper()}] {self.code}: {self.message}"]
        if self.condition:
            parts.append(f"  Condition: {self.condition}")
        if self.residual is not None:
            parts.append(f"  Residual: {self.residual:.3e} (tolerance {self.tolerance:.1e})")
        if self.time is not None:
            parts.append(f"  At s = {self.time:.6g}")
        if self.explanation:
            parts.append(f"  Explanation: {self.explanation}")
        return "\n".join(parts)


@dataclass
class PmpReport:
    """
    Residuals and verdicts of the PMP conditions checked on one path/costate pair.

    Attributes:
        max_pointwise_gap: worst Hamiltonian suboptimality of the used control over the control grid
        singular_arc_residual: worst violation of the convexity condition on singular (straight) arcs
        hamiltonian_drift: max |H(t) - H(0)|
        hamiltonian_level: H(0)
        transversality_residual: |p(t_f) - p0 grad Phi|
        p0: transversality multiplier
        tolerance: tolerance of the verdicts
        verdicts: condition name -> pass
        issues: findings, one per failing or borderline condition
        metadata: path and costate descriptors
    """
    max_pointwise_gap: float = 0.0
    singular_arc_residual: float = 0.0
    hamiltonian_drift: float = 0.0
    hamiltonian_level: float = 0.0
    transversality_residual: float = 0.0
    p0: Optional[float] = None
    tolerance: float = 0.0
    verdicts: Dict[str, bool] = field(default_factory=dict)
    issues: List[PmpIssue] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(self.verdicts.values())

    @property
    def error_count(self) -> int:
        return sum(1 for issue in self.issues if issue.severity == IssueSeverity.ERROR)

    @property
    def warning_count(self) -> int:
        return sum(1 for issue in self.issues if issue.severity == IssueSeverity.WARNING)

    def add_issue(self, issue: PmpIssue) -> None:
        self.issues.append(issue)
        if issue.severity == IssueSeverity.ERROR and issue.condition:
            self.verdicts[issue.condition] = False

    def merge(self, other: "PmpReport") -> "PmpReport":
        """Combines the residuals of two partial reports (the larger residual wins)."""
        self.max_pointwise_gap = max(self.max_pointwise_gap, other.max_pointwise_gap)
        self.singular_arc_residual = max(self.singular_arc_residual, other.singular_arc_residual)
        self.hamiltonian_drift = max(self.hamiltonian_drift, other.hamiltonian_drift)
        self.transversality_residual = max(self.transversality_residual, other.transversality_residual)
        if other.p0 is not None:
            self.p0 = other.p0
        if "hamiltonian_constancy" in other.verdicts:
            self.hamiltonian_level = other.hamiltonian_level
        self.tolerance = max(self.tolerance, other.tolerance)
        for condition, passed in other.verdicts.items():
            self.verdicts[condition] = self.verdicts.get(condition, True) and passed
        self.issues.extend(other.issues)
        self.metadata.update(other.metadata)
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "valid": self.valid,
            "max_pointwise_gap": self.max_pointwise_gap,
            "singular_arc_residual": self.singular_arc_residual,
            "hamiltonian_drift": self.hamiltonian_drift,
            "hamiltonian_level": self.hamiltonian_level,
            "transversality_residual": self.transversality_residual,
            "p0": self.p0,
            "tolerance": self.tolerance,
            "verdicts": dict(self.verdicts),
            "error_count": self.error_count,
            "warning_count": self.warning_count,
            "issues": [issue.to_dict() for issue in self.issues],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PmpReport":
        return cls(
            max_pointwise_gap=float(data["max_pointwise_gap"]),
            singular_arc_residual=float(data.get("singular_arc_residual", 0.0)),
            hamiltonian_drift=float(data["hamiltonian_drift"]),
            hamiltonian_level=float(data["hamiltonian_level"]),
            transversality_residual=float(data["transversality_residual"]),
            p0=None if data.get("p0") is None else float(data["p0"]),
            tolerance=float(data["tolerance"]),
            verdicts={str(k): bool(v) for k, v in data["verdicts"].items()},
            issues=[PmpIssue.from_dict(item) for item in data.get("issues", [])],
            metadata=dict(data.get("metadata", {})),
        )

    def __str__(self) -> str:
        lines = [
            "=" * 60,
            "PMP REPORT",
            "=" * 60,
            f"Valid: {'YES' if self.valid else 'NO'}",
            f"Tolerance: {self.tolerance:.1e}",
            f"Max pointwise gap: {self.max_pointwise_gap:.3e}",
            f"Singular arc residual: {self.singular_arc_residual:.3e}",
            f"Hamiltonian level: {self.hamiltonian_level:.6g} (drift {self.hamiltonian_drift:.3e})",
            f"Transversality residual: {self.transversality_residual:.3e}",
        ]
        if self.p0 is not None:
            lines.append(f"p0: {self.p0:.6g}")
        lines.append("-" * 60)
        for condition, passed in self.verdicts.items():
            lines.append(f"  {condition}: {'pass' if passed else 'FAIL'}")
        lines.extend([
            "-" * 60,
            f"Issues: {len(self.issues)} total ({self.error_count} errors, {self.warning_count} warnings)",
            "-" * 60,
        ])
        if self.issues:
            for issue in self.issues:
                lines.append(str(issue))
                lines.append("")
        else:
            lines.append("No issues detected.")
        lines.append("=" * 60)
        return "\n".join(lines)


@dataclass
class EquivalenceReport:
    """
    Outcome of checking one path as an endpoint-optimization extremal and, re-tagged, as a
    minimum/maximum-time extremal.

    Attributes:
        direction: the linear functional c
        reach_report: conditions of the endpoint-optimization form (p(t_f) = c)
        time_optimal_report: conditions of the free-final-time form (p0 phi = -H(0))
        p0: multiplier of the time-optimal form
        phi: running cost, -1 minimum time, +1 maximum time, 0 abnormal
        branch: "min_time", "max_time" or "abnormal"
        max_abs_hamiltonian: max_t |H(t) + p0 phi| of the time-optimal form
        round_trip: the time-optimal costate passes the endpoint form again with p(t_f) as gradient
        tolerance: tolerance of every verdict
    """
    direction: List[float]
    reach_report: PmpReport
    time_optimal_report: PmpReport
    p0: float
    phi: float
    branch: str
    max_abs_hamiltonian: float
    round_trip: bool
    tolerance: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def reach_pass(self) -> bool:
        return self.reach_report.valid

    @property
    def time_optimal_pass(self) -> bool:
        return self.time_optimal_report.valid

    @property
    def valid(self) -> bool:
        return self.reach_pass and self.time_optimal_pass

    def to_dict(self) -> Dict[str, Any]:
        return {
            "valid": self.valid,
            "direction": list(self.direction),
            "reach_pass": self.reach_pass,
            "time_optimal_pass": self.time_optimal_pass,
            "p0": self.p0,
            "phi": self.phi,
            "branch": self.branch,
            "max_abs_hamiltonian": self.max_abs_hamiltonian,
            "round_trip": self.round_trip,
            "tolerance": self.tolerance,
            "reach_report": self.reach_report.to_dict(),
            "time_optimal_report": self.time_optimal_report.to_dict(),
            "metadata": self.metadata,
        }

    def __str__(self) -> str:
        lines = [
            "=" * 60,
            "EQUIVALENCE REPORT",
            "=" * 60,
            f"Direction: {np.round(self.direction, 6).tolist()}",
            f"Endpoint form: {'pass' if self.reach_pass else 'FAIL'}",
            f"Time-optimal form: {'pass' if self.time_optimal_pass else 'FAIL'} "
            f"(branch {self.branch}, p0={self.p0:.6g}, phi={self.phi:+.0f})",
            f"max |H + p0 phi|: {self.max_abs_hamiltonian:.3e}",
            f"Round trip: {'pass' if self.round_trip else 'FAIL'}",
            "=" * 60,
        ]
        return "\n".join(lines)


@dataclass
class TransversalityDecomposition:
    """
    p(t_f) = p0 gradPhi_I + beta embedded on the complement of I.

    Attributes:
        p0: |p(t_f) restricted to I|
        grad_phi: unit vector supported on I (None when degenerate)
        beta: p(t_f) restricted to the complement of I
        index_set: I (0-based coordinates)
        complement: the complement of I
        degenerate: p(t_f) vanishes on I; nontriviality is carried by beta alone
        residual: max-norm reconstruction error
    """
    p0: float
    grad_phi: Optional[np.ndarray]
    beta: np.ndarray
    index_set: List[int]
    complement: List[int]
    degenerate: bool
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p0": self.p0,
            "grad_phi": None if self.grad_phi is None else self.grad_phi.tolist(),
            "beta": self.beta.tolist(),
            "index_set": list(self.index_set),
            "complement": list(self.complement),
            "degenerate": self.degenerate,
            "residual": self.residual,
        }
