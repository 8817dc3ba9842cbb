"""
Curvature Reachset

Sampled reachable-set boundaries of curvature-bounded paths in the plane and in space, built
from the extremal families H, CSC, CCC, CS and CC, with numerical checks of the Pontryagin
conditions and of the equivalence between endpoint-optimization and time-optimal extremals.
"""

# Import configuration and constants
from reachset.config import (
    logger,
    default_kappa_max,
    family_templates,
)

# Import the error hierarchy
from reachset.exceptions import (
    ReachsetError,
    InvalidInput,
    InvalidFrame,
    OutOfRange,
    InvalidGrid,
    InvalidConfig,
    TorsionSingularity,
)

# Import geometry
from reachset.geometry import (
    Config2,
    Config3,
    Frame3,
    Segment,
    SegmentKind,
    PathSpec,
    segment_endpoint,
    path_evaluate,
    embed_2d,
    frenet_integrate,
    helix_frame,
    sample_path,
)

# Import torsion equation and helicoidal arcs
from reachset.torsion import (
    Branch,
    BranchSelector,
    HParams,
    TorsionState,
    torsion_rhs,
    integrate_torsion,
    helical_segment,
)

# Import candidate families
from reachset.families import (
    CandidateGrid,
    CandidateTable,
    FamilyKind,
    candidate_table,
    enumerate_2d,
    enumerate_3d,
)

# Import PMP checks
from reachset.pmp import (
    PmpChecker,
    StrictnessLevel,
    PmpReport,
    PmpIssue,
    IssueSeverity,
    EquivalenceReport,
    TransversalityDecomposition,
    CostateTraj,
    hamiltonian,
    integrate_costate,
    check_pointwise_max,
    check_hamiltonian_constancy,
    check_transversality_reach,
    decompose_transversality,
    equivalence_check,
    screen_costate,
)

# Import reachability
from reachset.reach import (
    Mode,
    BoundaryCloud,
    OracleCloud,
    OracleSettings,
    build_boundary,
    containment_check,
    mc_oracle,
    support_point,
    support_sweep,
)

__all__ = [
    # Errors
    "ReachsetError",
    "InvalidInput",
    "InvalidFrame",
    "OutOfRange",
    "InvalidGrid",
    "InvalidConfig",
    "TorsionSingularity",
    # Geometry
    "Config2",
    "Config3",
    "Frame3",
    "Segment",
    "SegmentKind",
    "PathSpec",
    "segment_endpoint",
    "path_evaluate",
    "embed_2d",
    "frenet_integrate",
    "helix_frame",
    "sample_path",
    # Torsion
    "Branch",
    "BranchSelector",
    "HParams",
    "TorsionState",
    "torsion_rhs",
    "integrate_torsion",
    "helical_segment",
    # Families
    "CandidateGrid",
    "CandidateTable",
    "FamilyKind",
    "candidate_table",
    "enumerate_2d",
    "enumerate_3d",
    # PMP
    "PmpChecker",
    "StrictnessLevel",
    "PmpReport",
    "PmpIssue",
    "IssueSeverity",
    "EquivalenceReport",
    "TransversalityDecomposition",
    "CostateTraj",
    "hamiltonian",
    "integrate_costate",
    "check_pointwise_max",
    "check_hamiltonian_constancy",
    "check_transversality_reach",
    "decompose_transversality",
    "equivalence_check",
    "screen_costate",
    # Reachability
    "Mode",
    "BoundaryCloud",
    "OracleCloud",
    "OracleSettings",
    "build_boundary",
    "containment_check",
    "mc_oracle",
    "support_point",
    "support_sweep",
    # Configuration
    "default_kappa_max",
    "family_templates",
    "logger",
]

__version__ = "0.1.0"
