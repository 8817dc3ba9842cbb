import math
import unittest

import numpy as np
from parameterized import parameterized

from reachset.exceptions import InvalidGrid, InvalidInput
from reachset.families import candidate_table
from reachset.geometry import plane_normal
from reachset.pmp import equivalence_check
from reachset.reach import Mode, mc_oracle, sample_directions, support_point, support_sweep
from test_reachset.integration import (
    planar_grid,
    planar_support_cases,
    spatial_dir_grid,
    spatial_dir_support_grid,
    spatial_grid,
)


class TestSupport(unittest.TestCase):
    def setUp(self):
        self.planar_table = candidate_table(planar_grid, False, 2)

    def tearDown(self):
        pass

    def test_straight_ahead(self):
        result = support_point(Mode.PLANAR_NODIR, [1.0, 0.0], table=self.planar_table)
        self.assertAlmostEqual(result.value, 1.0, places=12)
        self.assertEqual(result.family.tag, "S")
        self.assertFalse(result.refined)
        np.testing.assert_allclose(result.endpoint, [1.0, 0.0], atol=1e-12)

    @parameterized.expand(planar_support_cases)
    def test_support_generators_pass_equivalence(self, angle, t_f):
        c = np.array([math.cos(angle), math.sin(angle)])
        result = support_point(Mode.PLANAR_NODIR, c, table=self.planar_table)
        self.assertAlmostEqual(result.generator.total_length, t_f, delta=1e-12)
        self.assertLessEqual(result.value, t_f + 1e-12)
        report = equivalence_check(result.generator, c)
        self.assertTrue(report.reach_pass, str(report.reach_report))
        self.assertTrue(report.time_optimal_pass, str(report.time_optimal_report))
        self.assertEqual(report.branch, "min_time")

    def test_refinement_does_not_lose_value(self):
        c = np.array([math.cos(0.4), math.sin(0.4)])
        coarse = support_point(Mode.PLANAR_NODIR, c, table=self.planar_table, refine=False)
        refined = support_point(Mode.PLANAR_NODIR, c, table=self.planar_table)
        self.assertGreaterEqual(refined.value, coarse.value)
        # the best CS path turns by the angle of c, then goes straight
        self.assertAlmostEqual(refined.params["lengths"][0], 0.4, delta=1e-5)

    def test_oracle_never_exceeds_support(self):
        directions = sample_directions(Mode.PLANAR_NODIR, 16, seed=1)
        values = np.array([r.value for r in support_sweep(Mode.PLANAR_NODIR, directions, table=self.planar_table)])
        oracle = mc_oracle(Mode.PLANAR_NODIR, 1.0, n_samples=2000, seed=6, jobs=1)
        self.assertTrue(np.all((oracle.points @ directions.T).max(axis=0) <= values + 1e-3))

    def test_spatial_support_is_rotation_invariant(self):
        table = candidate_table(spatial_grid, False, 3)
        delta = 2.0 * math.pi / spatial_grid.psi_resolution * 3
        c = np.array([0.3, 0.8, -0.2])
        rotated = np.array([c[0], math.cos(delta) * c[1] - math.sin(delta) * c[2],
                            math.sin(delta) * c[1] + math.cos(delta) * c[2]])
        value = support_point(Mode.SPATIAL_NODIR, c, table=table, refine=False).value
        rotated_value = support_point(Mode.SPATIAL_NODIR, rotated, table=table, refine=False).value
        self.assertAlmostEqual(value, rotated_value, delta=1e-8)

    def test_spatial_dir_support_is_bounded(self):
        table = candidate_table(spatial_dir_grid, True, 3)
        for c in sample_directions(Mode.SPATIAL_DIR, 8, seed=2):
            result = support_point(Mode.SPATIAL_DIR, c, table=table, refine=False)
            bound = spatial_dir_grid.t_f * np.linalg.norm(c[0:3]) + np.linalg.norm(c[3:6])
            self.assertLessEqual(result.value, bound + 1e-9)
            self.assertAlmostEqual(result.generator.total_length, spatial_dir_grid.t_f, delta=1e-12)

    @parameterized.expand([(index,) for index in range(6)])
    def test_spatial_dir_winners_pass_equivalence(self, index):
        table = candidate_table(spatial_dir_support_grid, True, 3)
        # seeded directions pulled into a plane through the initial tangent, where the maximizer is planar
        axis = np.asarray(table.base.e, dtype=float)
        psi = spatial_dir_support_grid.psi_values()[index % spatial_dir_support_grid.psi_resolution]
        basis = np.vstack([axis, plane_normal(axis, psi)])
        raw = sample_directions(Mode.SPATIAL_DIR, 6, seed=21)[index]
        c = np.concatenate([basis.T @ (basis @ raw[0:3]), basis.T @ (basis @ raw[3:6])])
        c /= np.linalg.norm(c)

        result = support_point(Mode.SPATIAL_DIR, c, table=table)
        self.assertIn(result.family.template, ("CSC", "CCC"))
        self.assertAlmostEqual(result.generator.total_length, spatial_dir_support_grid.t_f, delta=1e-12)
        report = equivalence_check(result.generator, c, 1e-4)
        self.assertTrue(report.reach_pass, str(report.reach_report))
        self.assertTrue(report.time_optimal_pass, str(report.time_optimal_report))

    def test_invalid_queries(self):
        with self.assertRaises(InvalidGrid):
            support_point(Mode.PLANAR_NODIR, [1.0, 0.0], table=self.planar_table.subset(np.array([], dtype=int)))
        with self.assertRaises(InvalidInput):
            support_point(Mode.PLANAR_DIR, [1.0, 0.0, 0.0], table=self.planar_table)
        with self.assertRaises(InvalidInput):
            support_point(Mode.PLANAR_NODIR, [0.0, 0.0], table=self.planar_table)
        with self.assertRaises(InvalidInput):
            support_point(Mode.PLANAR_NODIR, [1.0, 0.0, 0.0], table=self.planar_table)
