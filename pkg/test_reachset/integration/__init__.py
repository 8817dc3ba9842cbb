# small grids shared by the boundary and support tests; every run is serial (jobs=1)

from reachset.families import CandidateGrid
from reachset.reach import OracleSettings

planar_grid = CandidateGrid(t_f=1.0, arc_resolution=12)
planar_dir_grid = CandidateGrid(t_f=1.0, arc_resolution=10)
spatial_grid = CandidateGrid(t_f=1.0, arc_resolution=10, psi_resolution=8)
spatial_dir_grid = CandidateGrid(t_f=1.0, arc_resolution=4, psi_resolution=4, zeta_values=(0.0, 1.0),
                                 tau0_values=(0.5, 1.0), taudot0_values=(0.0,))

validation = OracleSettings(n_samples=2000, n_pieces=20, seed=3)

# (angle of c, t_f): CS maximizers for |angle| < t_f, single arcs beyond
planar_support_cases = [
    (0.0, 1.0),
    (0.4, 1.0),
    (-0.7, 1.0),
    (1.3, 1.0),
    (-2.0, 1.0),
]

# 3D-dir grid with planar families dense enough for the refined winner to sit in the right family
spatial_dir_support_grid = CandidateGrid(t_f=1.0, arc_resolution=12, psi_resolution=4, zeta_values=(0.0,),
                                         tau0_values=(1.0,), taudot0_values=(0.0,))
