"""
Reachable-set boundaries, support points and the Monte Carlo oracle.
"""

from reachset.reach.boundary import (
    build_boundary,
    containment_check,
    dominance_filter,
    hausdorff_distance,
    outside_mask,
    planar_loops,
    region_contains,
    revolve_profile,
    screen_table,
    winding_numbers,
)
from reachset.reach.cloud import BoundaryCloud, BoundaryPoint, Mode, OracleCloud, OracleSettings
from reachset.reach.oracle import integrate_piecewise_controls, mc_oracle
from reachset.reach.support import SupportResult, sample_directions, support_point, support_sweep

__all__ = [
    "build_boundary",
    "containment_check",
    "dominance_filter",
    "hausdorff_distance",
    "outside_mask",
    "planar_loops",
    "region_contains",
    "revolve_profile",
    "screen_table",
    "winding_numbers",
    "BoundaryCloud",
    "BoundaryPoint",
    "Mode",
    "OracleCloud",
    "OracleSettings",
    "integrate_piecewise_controls",
    "mc_oracle",
    "SupportResult",
    "sample_directions",
    "support_point",
    "support_sweep",
]
