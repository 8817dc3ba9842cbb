import math
import unittest

import numpy as np
from parameterized import parameterized

from reachset.exceptions import InvalidInput, TorsionSingularity
from reachset.geometry import Config3, Frame3, helix_frame
from reachset.torsion import (
    Branch,
    BranchSelector,
    HParams,
    TorsionState,
    h_param_grid,
    helical_endpoints,
    helical_segment,
    integrate_torsion,
    torsion_first_integral,
    torsion_rhs,
)


class TestTorsion(unittest.TestCase):
    def setUp(self):
        self.base = Config3(np.zeros(3), np.array([1.0, 0.0, 0.0]))

    def tearDown(self):
        pass

    @parameterized.expand([
        (1.0, 0.0, 0.0, 0.0),
        (-1.0, 0.0, 0.0, 0.0),
        (1.0, 0.0, 2.0, -2.0),
        (4.0, 0.0, 0.0, -120.0),
        (0.5, 1.0, 0.0, 3.75),
    ])
    def test_torsion_rhs(self, tau, taudot, zeta, expected):
        self.assertAlmostEqual(torsion_rhs(TorsionState(tau, taudot), zeta), expected, places=12)

    def test_torsion_rhs_is_singular_at_zero(self):
        with self.assertRaises(TorsionSingularity):
            torsion_rhs(TorsionState(0.0, 1.0), 0.0)

    @parameterized.expand([
        (1.0,),
        (-1.0,),
    ])
    def test_equilibrium_is_preserved(self, tau0):
        trajectory = integrate_torsion(HParams(0.0, tau0, 0.0), 10.0, step=1e-3)
        self.assertAlmostEqual(trajectory[-1][0], 10.0, places=12)
        worst = max(abs(state.tau - tau0) for _, state in trajectory)
        self.assertLessEqual(worst, 1e-8)

    def test_first_integral_is_conserved(self):
        h = HParams(0.0, 1.1, 0.0)
        trajectory = integrate_torsion(h, 10.0, step=1e-3)
        taus = np.array([state.tau for _, state in trajectory])
        energies = np.array([torsion_first_integral(state, h.zeta) for _, state in trajectory])
        self.assertLessEqual(float(np.max(np.abs(energies - energies[0]))), 1e-6)
        # bounded oscillation about the equilibrium
        self.assertGreater(taus.max(), 1.0)
        self.assertLess(taus.min(), 1.0)
        coarse = integrate_torsion(h, 10.0, step=1e-2)
        fine = integrate_torsion(h, 10.0, step=1e-2 / 16.0)
        self.assertAlmostEqual(coarse[-1][1].tau, fine[-1][1].tau, delta=1e-6)

    def test_singularity_is_reported(self):
        with self.assertRaises(TorsionSingularity) as context:
            integrate_torsion(HParams(0.0, 1e-5, -1.0), 1.0, step=1e-3)
        self.assertLess(context.exception.arc_length, 1.0)

    def test_truncated_helical_segment(self):
        arc = helical_segment(self.base, 0.0, HParams(0.0, 1e-5, -1.0), 1.0, 1.0, step=1e-3, truncate=True)
        self.assertTrue(arc.truncated)
        self.assertLess(arc.truncated_at, 1.0)

    @parameterized.expand([
        (-1.0, Branch.MIN_TIME),
        (1.0, Branch.MAX_TIME),
    ])
    def test_branch_sign_is_enforced(self, zeta, branch):
        with self.assertRaises(InvalidInput):
            HParams(zeta, 1.0, 0.0, branch)

    def test_small_initial_torsion_is_rejected(self):
        with self.assertRaises(InvalidInput):
            HParams(0.0, 1e-8, 0.0)

    @parameterized.expand([
        (0.0,),
        (0.9,),
    ])
    def test_constant_torsion_matches_helix(self, psi):
        arc = helical_segment(self.base, psi, HParams(0.0, 1.0, 0.0), 1.0, 2.0 * math.pi)
        expected = helix_frame(Frame3.from_config(self.base, psi), 1.0, 1.0, 2.0 * math.pi)
        np.testing.assert_allclose(arc.endpoint.r, expected.r, atol=1e-6)
        np.testing.assert_allclose(arc.endpoint.e, expected.T, atol=1e-6)
        self.assertFalse(arc.truncated)

    def test_zero_length_returns_start(self):
        arc = helical_segment(self.base, 0.4, HParams(1.0, 0.3, 0.5), 1.0, 0.0)
        self.assertTrue(arc.endpoint.allclose(self.base, atol=0.0))

    def test_similarity_scaling(self):
        h = HParams(0.0, 1.0, 0.0)
        start = Config3(np.array([0.5, -1.0, 2.0]), np.array([0.0, 0.0, 1.0]))
        scaled = helical_segment(start, 0.3, h, 2.0, 1.0).endpoint
        unit = helical_segment(start, 0.3, h, 1.0, 2.0).endpoint
        np.testing.assert_allclose(scaled.r - start.r, 0.5 * (unit.r - start.r), atol=1e-9)
        np.testing.assert_allclose(scaled.e, unit.e, atol=1e-9)

    def test_batch_matches_single_arcs(self):
        params = [HParams(0.0, 1.0, 0.0), HParams(0.5, 0.4, -0.5), HParams(-1.0, -2.0, 1.0, Branch.MAX_TIME)]
        batch = helical_endpoints(params, 1.0, 1.5)
        self.assertTrue(batch.complete.all())
        for j, h in enumerate(params):
            single = helical_segment(self.base, 0.0, h, 1.0, 1.5).endpoint
            np.testing.assert_allclose(batch.positions[j], single.r, atol=1e-9)
            np.testing.assert_allclose(batch.frames[j][:, 0], single.e, atol=1e-9)

    @parameterized.expand([
        (BranchSelector.BOTH, 3),
        (BranchSelector.MIN_TIME, 2),
        (BranchSelector.MAX_TIME, 2),
    ])
    def test_zero_zeta_is_emitted_once(self, selector, expected):
        grid = h_param_grid([0.0, 1.0, -1.0], [1.0], [0.0], selector)
        self.assertEqual(len(grid), expected)
        self.assertEqual(sum(1 for h in grid if h.zeta == 0.0), 1)
        for h in grid:
            self.assertTrue(h.branch.admits(h.zeta))
