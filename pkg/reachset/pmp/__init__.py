"""
PMP condition checking for the planar and spatial curvature-bounded systems.
"""

from reachset.pmp.checker import PmpChecker, StrictnessLevel
from reachset.pmp.conditions import (
    check_extremal,
    check_hamiltonian_constancy,
    check_pointwise_max,
    check_transversality_reach,
    classify_branch,
    decompose_transversality,
    equivalence_check,
    hamiltonian_values,
)
from reachset.pmp.costate import CostateTraj, costate_transition, hamiltonian, integrate_costate
from reachset.pmp.dynamics import Dynamics, PlanarDynamics, SpatialDynamics, dynamics_for
from reachset.pmp.report import (
    EquivalenceReport,
    IssueSeverity,
    PmpIssue,
    PmpReport,
    TransversalityDecomposition,
)
from reachset.pmp.screening import ScreeningResult, screen_costate

__all__ = [
    "PmpChecker",
    "StrictnessLevel",
    "check_extremal",
    "check_hamiltonian_constancy",
    "check_pointwise_max",
    "check_transversality_reach",
    "classify_branch",
    "decompose_transversality",
    "equivalence_check",
    "hamiltonian_values",
    "CostateTraj",
    "costate_transition",
    "hamiltonian",
    "integrate_costate",
    "Dynamics",
    "PlanarDynamics",
    "SpatialDynamics",
    "dynamics_for",
    "EquivalenceReport",
    "IssueSeverity",
    "PmpIssue",
    "PmpReport",
    "TransversalityDecomposition",
    "ScreeningResult",
    "screen_costate",
]
