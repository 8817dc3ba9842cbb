import math
import unittest

import numpy as np
from parameterized import parameterized

from reachset.exceptions import InvalidInput
from reachset.geometry import Config2, Config3, PathSpec, Segment, embed_path_2d
from reachset.pmp import (
    PmpChecker,
    PmpReport,
    check_extremal,
    check_hamiltonian_constancy,
    check_pointwise_max,
    check_transversality_reach,
    classify_branch,
    decompose_transversality,
    equivalence_check,
    hamiltonian,
    integrate_costate,
    screen_costate,
)
from reachset.pmp.conditions import transversality_report


def planar(*segments: Segment) -> PathSpec:
    return PathSpec(Config2(0.0, 0.0, 0.0), segments)


class TestPmp(unittest.TestCase):
    def setUp(self):
        self.base = Config3(np.zeros(3), np.array([1.0, 0.0, 0.0]))

    def tearDown(self):
        pass

    # ****   Hamiltonian & costate   ****

    @parameterized.expand([
        ("running_cost_only", [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0], 1.0, -1.0, -1.0),
        ("planar_velocity", [1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.3], 0.0, 0.0, 1.0),
        ("planar_turn", [0.0, 0.0, 2.0], [0.0, 0.0, 1.0], [-0.5], 0.0, 0.0, -1.0),
        ("spatial_velocity", [1.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0, 0.0, 0.0], [0.0, 0.5, 0.0],
         0.0, 0.0, 1.0),
    ])
    def test_hamiltonian(self, _, p, x, u, p0, phi, expected):
        self.assertAlmostEqual(hamiltonian(p, x, u, p0, phi), expected, places=12)

    def test_hamiltonian_rejects_mismatched_sizes(self):
        with self.assertRaises(InvalidInput):
            hamiltonian([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0])
        with self.assertRaises(InvalidInput):
            hamiltonian([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0])

    @parameterized.expand([
        ("tangent",),
        ("ambient",),
    ])
    def test_spatial_costate_on_straight(self, adjoint):
        path = PathSpec(self.base, (Segment.straight(2.0),))
        costate = integrate_costate(path, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0], adjoint=adjoint)
        np.testing.assert_allclose(costate.p[0, 3:6], [2.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(costate.p[:, 0:3], np.tile([1.0, 0.0, 0.0], (len(costate.t), 1)))

    @parameterized.expand([
        ("closed-form",),
        ("rk4",),
    ])
    def test_planar_costate_on_straight(self, method):
        costate = integrate_costate(planar(Segment.straight(1.0)), [0.0, 1.0, 0.0], method=method)
        self.assertAlmostEqual(costate.p[0, 2], 1.0, places=12)
        self.assertAlmostEqual(costate.p[-1, 2], 0.0, places=12)

    def test_integration_methods_agree_on_arcs(self):
        path = planar(Segment.arc(1.0, 1.0), Segment.straight(0.5), Segment.arc(0.7, -1.0))
        closed = integrate_costate(path, [0.3, -0.4, 0.5])
        integrated = integrate_costate(path, [0.3, -0.4, 0.5], method="rk4")
        np.testing.assert_allclose(closed.p, integrated.p, atol=1e-8)

    def test_trivial_costate_is_rejected(self):
        with self.assertRaises(InvalidInput):
            integrate_costate(planar(Segment.straight(1.0)), [0.0, 0.0, 0.0], p0=0.0)
        with self.assertRaises(InvalidInput):
            integrate_costate(planar(Segment.straight(1.0)), [1.0, 0.0])

    # ****   Pointwise maximum & constancy   ****

    def test_pointwise_max_on_spatial_straight(self):
        path = PathSpec(self.base, (Segment.straight(2.0),))
        costate = integrate_costate(path, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0], p0=1.0, phi=-1.0)
        report = check_pointwise_max(path, costate)
        self.assertTrue(report.valid)
        self.assertLessEqual(report.max_pointwise_gap, 1e-9)

    def test_full_circle_fails_pointwise_max(self):
        path = planar(Segment.arc(2.0 * math.pi, 1.0))
        report = check_pointwise_max(path, integrate_costate(path, [0.0, 1.0, 0.0]))
        self.assertFalse(report.valid)
        self.assertEqual(report.issues[0].code, "POINTWISE_MAX_VIOLATED")
        self.assertGreater(report.max_pointwise_gap, 1.0)

    def test_suboptimal_controls_fail_pointwise_max(self):
        path = planar(Segment.arc(1.0, 1.0))
        costate = integrate_costate(path, [0.0, 0.0, 1.0])
        self.assertTrue(check_pointwise_max(path, costate).valid)
        halved = 0.5 * costate.path_samples.controls
        report = check_pointwise_max(path, costate, controls=halved)
        self.assertFalse(report.valid)
        self.assertAlmostEqual(report.max_pointwise_gap, 0.5, places=9)

    def test_singular_arc_convexity(self):
        path = planar(Segment.straight(1.0))
        report = check_pointwise_max(path, integrate_costate(path, [-1.0, 0.0, 0.0]))
        self.assertFalse(report.valid)
        self.assertIn("SINGULAR_ARC_CONVEXITY", [issue.code for issue in report.issues])
        self.assertAlmostEqual(report.singular_arc_residual, 1.0, places=12)

    def test_hamiltonian_constancy(self):
        straight = planar(Segment.straight(1.0))
        self.assertLessEqual(check_hamiltonian_constancy(straight, integrate_costate(straight, [1.0, 0.0, 0.0])), 1e-9)
        arc = planar(Segment.arc(2.0, 1.0))
        costate = integrate_costate(arc, [0.3, -0.4, 0.5])
        self.assertLessEqual(check_hamiltonian_constancy(arc, costate), 1e-6)
        halved = 0.5 * costate.path_samples.controls
        self.assertGreater(check_hamiltonian_constancy(arc, costate, controls=halved), 1e-3)

    # ****   Transversality   ****

    def test_transversality_reach(self):
        g = np.array([1.0, 2.0, 3.0])
        residual, p0 = check_transversality_reach(2.0 * g, g)
        self.assertAlmostEqual(residual, 0.0, places=12)
        self.assertAlmostEqual(p0, 2.0, places=12)
        residual, p0 = check_transversality_reach([2.0, -1.0, 0.0], [1.0, 2.0, 0.0])
        self.assertAlmostEqual(residual, math.sqrt(5.0), places=12)
        self.assertAlmostEqual(p0, 0.0, places=12)

    def test_transversality_sign(self):
        g = np.array([0.0, 1.0, 1.0])
        residual, p0 = check_transversality_reach(-g, g)
        self.assertAlmostEqual(p0, -1.0, places=12)
        report = transversality_report(-g, g)
        self.assertFalse(report.valid)
        self.assertEqual(report.issues[0].code, "TRANSVERSALITY_SIGN")

    def test_transversality_needs_gradient(self):
        with self.assertRaises(InvalidInput):
            check_transversality_reach([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])

    def test_decomposition(self):
        decomposition = decompose_transversality([3.0, 0.0, 0.0], [0])
        self.assertAlmostEqual(decomposition.p0, 3.0, places=12)
        np.testing.assert_allclose(decomposition.grad_phi, [1.0, 0.0, 0.0])
        self.assertFalse(decomposition.degenerate)

        degenerate = decompose_transversality([0.0, 5.0, 0.0], [0])
        self.assertTrue(degenerate.degenerate)
        self.assertIsNone(degenerate.grad_phi)
        np.testing.assert_allclose(degenerate.beta, [5.0, 0.0])

    def test_decomposition_reconstructs_random_costates(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            size = int(rng.choice([3, 6]))
            p = rng.normal(size=size)
            count = int(rng.integers(1, size))
            index_set = rng.choice(size, count, replace=False)
            self.assertLessEqual(decompose_transversality(p, index_set).residual, 1e-12)

    @parameterized.expand([
        ([],),
        ([0, 1, 2],),
        ([3],),
    ])
    def test_decomposition_rejects_index_sets(self, index_set):
        with self.assertRaises(InvalidInput):
            decompose_transversality([1.0, 2.0, 3.0], index_set)

    # ****   Equivalence, screening & reports   ****

    @parameterized.expand([
        (1.0, -1.0, "min_time"),
        (1.0, 1.0, "max_time"),
        (0.0, -1.0, "abnormal"),
        (1.0, 0.0, "abnormal"),
    ])
    def test_classify_branch(self, p0, phi, expected):
        self.assertEqual(classify_branch(p0, phi), expected)

    def test_equivalence_on_straight(self):
        report = equivalence_check(planar(Segment.straight(1.0)), [1.0, 0.0])
        self.assertTrue(report.reach_pass)
        self.assertTrue(report.time_optimal_pass)
        self.assertEqual(report.branch, "min_time")
        self.assertAlmostEqual(report.p0, 1.0, places=9)
        self.assertLessEqual(report.max_abs_hamiltonian, 1e-9)
        self.assertTrue(report.round_trip)

    def test_equivalence_fails_for_opposite_direction(self):
        report = equivalence_check(planar(Segment.straight(1.0)), [-1.0, 0.0])
        self.assertFalse(report.reach_pass)
        self.assertFalse(report.valid)

    def test_screening_rejects_non_extremal(self):
        path = planar(Segment.arc(0.3, 1.0), Segment.straight(0.3), Segment.arc(0.4, 1.0))
        self.assertFalse(screen_costate(path, with_direction=False).passed)

    def test_screening_finds_outward_normal(self):
        path = planar(Segment.arc(0.5, 1.0), Segment.straight(0.5))
        result = screen_costate(path, with_direction=False)
        self.assertTrue(result.passed)
        heading = path.endpoint().theta
        np.testing.assert_allclose(result.p_tf, [math.cos(heading), math.sin(heading), 0.0], atol=1e-6)

    @parameterized.expand([
        ("equal_arcs", 0.5, 0.5, 1.0),
        ("equal_arcs_right_first", 0.5, 0.5, -1.0),
        ("short_first_arc", 0.3, 0.7, 1.0),
        ("short_first_arc_right_first", 0.2, 1.1, -1.0),
    ])
    def test_screening_keeps_two_arc_extremals(self, _, first, second, sign):
        head = planar(Segment.arc(first, sign))
        path = planar(Segment.arc(first, sign), Segment.arc(second, -sign))
        result = screen_costate(path, with_direction=False)
        self.assertTrue(result.passed, result.reason)
        # the switching function vanishes at the switch and at the end: p is along minus the last chord
        chord = path.endpoint().as_array()[0:2] - head.endpoint().as_array()[0:2]
        np.testing.assert_allclose(result.p_tf, [*(-chord / np.linalg.norm(chord)), 0.0], atol=1e-6)

    def test_screening_rejects_long_first_arc(self):
        path = planar(Segment.arc(0.7, 1.0), Segment.arc(0.3, -1.0))
        self.assertFalse(screen_costate(path, with_direction=False).passed)

    def test_screening_keeps_embedded_two_arc_extremal(self):
        path = embed_path_2d(planar(Segment.arc(0.5, 1.0), Segment.arc(0.5, -1.0)), 0.7, self.base)
        result = screen_costate(path, with_direction=False)
        self.assertTrue(result.passed, result.reason)
        chord = path.endpoint().r
        np.testing.assert_allclose(result.p_tf[0:3], -chord / np.linalg.norm(chord), atol=1e-6)

    def test_checker(self):
        checker = PmpChecker()
        straight = planar(Segment.straight(1.0))
        self.assertTrue(checker.check(straight, [1.0, 0.0, 0.0], grad_phi=[1.0, 0.0, 0.0]).valid)
        helical = PathSpec(self.base, (Segment.helix(1.0, 0.0, 1.0, 0.0),))
        self.assertEqual(checker.tolerance_for(straight), 1e-6)
        self.assertEqual(checker.tolerance_for(helical), 1e-4)
        self.assertEqual(PmpChecker(tolerance_override=0.5).tolerance_for(helical), 0.5)

    def test_report_round_trip(self):
        path = planar(Segment.arc(2.0 * math.pi, 1.0))
        report = check_extremal(path, integrate_costate(path, [0.0, 1.0, 0.0]), grad_phi=[0.0, 1.0, 0.0])
        again = PmpReport.from_dict(report.to_dict())
        self.assertEqual(again.to_dict(), report.to_dict())
        self.assertIn("PMP REPORT", str(report))
        self.assertIn("POINTWISE_MAX_VIOLATED", str(report))
