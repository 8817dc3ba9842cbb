"""
Reachset configuration module.

This module contains the logging setup, the numerical constants and tolerances, and the
candidate family template mapping used by the reachset package.
"""
import logging

import numpy as np

logging.basicConfig(encoding='utf-8', level=logging.INFO)
logger = logging.getLogger(__name__)

# ************************************************************************************************************
#                                           Geometry & Integration
# ************************************************************************************************************
default_kappa_max = 1.0
# default integration step is min(max_default_step, length / default_step_divisions)
max_default_step = 1e-3
default_step_divisions = 100
unit_tolerance = 1e-9
frame_tolerance = 1e-6
length_tolerance = 1e-12

# torsion band: |tau| < tau_min is the singular set of the torsion equation, |tau| > tau_max is a blow-up
tau_min = 1e-6
tau_max = 1e3

# ************************************************************************************************************
#                                           Candidate Grids
# ************************************************************************************************************
default_arc_resolution = 64
default_psi_resolution = 32
default_zeta_values = (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0)
_tau_magnitudes = np.logspace(-2, 1, 13)
default_tau0_values = tuple(float(v) for v in np.concatenate([_tau_magnitudes, -_tau_magnitudes]))
default_taudot0_values = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
dedup_tolerance = 1e-9

# ************************************************************************************************************
#                                           PMP Checks
# ************************************************************************************************************
closed_form_tolerance = 1e-6
integrated_tolerance = 1e-4
nontriviality_tolerance = 1e-10
control_grid_2d = 257
control_angles_3d = 64
control_magnitude_fractions_3d = (0.0, 0.5, 1.0)
screening_step = 1e-2
screening_null_rcond = 1e-7
screening_max_attempts = 8

# ************************************************************************************************************
#                                           Reachability & Oracle
# ************************************************************************************************************
eps_dom_factor = 1e-6
eps_in_factor = 1e-2
oracle_chunk_size = 4096
default_oracle_samples = 10_000
default_oracle_pieces = 20
default_equiv_directions = 200
support_probe_directions = 64
threads_env_var = "REACHSET_THREADS"

# ************************************************************************************************************
#                                           Family Templates
# ************************************************************************************************************
# turn signs: +1 left (towards the plane normal), -1 right, 0 straight / helicoidal
family_templates = {
    # terminal direction relevant
    "CSC": {
        "segments": ("C", "S", "C"),
        "with_direction": True,
        "planar": True,
        "branch_gated": False,
        "sign_patterns": ((1, 0, 1), (1, 0, -1), (-1, 0, 1), (-1, 0, -1)),
    },
    "CCC": {
        "segments": ("C", "C", "C"),
        "with_direction": True,
        "planar": True,
        "branch_gated": True,
        "sign_patterns": ((1, -1, 1), (-1, 1, -1)),
    },
    "H": {
        "segments": ("H",),
        "with_direction": True,
        "planar": False,
        "branch_gated": True,
        "sign_patterns": ((0,),),
    },
    # terminal direction not relevant
    "CS": {
        "segments": ("C", "S"),
        "with_direction": False,
        "planar": True,
        "branch_gated": False,
        "sign_patterns": ((1, 0), (-1, 0)),
    },
    "CC": {
        "segments": ("C", "C"),
        "with_direction": False,
        "planar": True,
        "branch_gated": False,
        "sign_patterns": ((1, -1), (-1, 1)),
    },
}
