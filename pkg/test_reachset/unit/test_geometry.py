import math
import unittest

import numpy as np
from parameterized import parameterized
from scipy.spatial.transform import Rotation

from reachset.exceptions import InvalidFrame, InvalidInput, OutOfRange
from reachset.geometry import (
    Config2,
    Config3,
    Frame3,
    PathSpec,
    Segment,
    embed_2d,
    embed_path_2d,
    frenet_integrate,
    helix_frame,
    orthonormality_error,
    path_evaluate,
    plane_normal,
    reference_normal,
    sample_path,
    segment_endpoint,
)


def canonical_frame() -> Frame3:
    return Frame3(np.zeros(3), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]))


class TestGeometry(unittest.TestCase):
    def setUp(self):
        self.base = Config3(np.zeros(3), np.array([1.0, 0.0, 0.0]))

    def tearDown(self):
        pass

    def test_straight_segment_3d(self):
        end = segment_endpoint(self.base, Segment.straight(5.0))
        np.testing.assert_allclose(end.r, [5.0, 0.0, 0.0])
        np.testing.assert_allclose(end.e, [1.0, 0.0, 0.0])

    @parameterized.expand([
        (2.0 * math.pi, (0.0, 0.0, 0.0)),
        (math.pi / 2.0, (1.0, 1.0, math.pi / 2.0)),
        (math.pi, (0.0, 2.0, math.pi)),
    ])
    def test_left_arc_2d(self, length, expected):
        end = segment_endpoint(Config2(0.0, 0.0, 0.0), Segment.arc(length, 1.0), 1.0)
        self.assertAlmostEqual(end.x, expected[0], places=9)
        self.assertAlmostEqual(end.y, expected[1], places=9)
        self.assertAlmostEqual(math.cos(end.theta), math.cos(expected[2]), places=9)
        self.assertAlmostEqual(math.sin(end.theta), math.sin(expected[2]), places=9)

    def test_arc_scales_with_kappa_max(self):
        end = segment_endpoint(Config2(0.0, 0.0, 0.0), Segment.arc(math.pi / 4.0, -2.0), 2.0)
        self.assertAlmostEqual(end.x, 0.5, places=12)
        self.assertAlmostEqual(end.y, -0.5, places=12)
        self.assertAlmostEqual(end.theta, -math.pi / 2.0, places=12)

    def test_arc_3d_matches_planar_arc(self):
        end = segment_endpoint(self.base, Segment.arc(math.pi / 2.0, 1.0, normal=(0.0, 0.0, 1.0)))
        np.testing.assert_allclose(end.r, [1.0, 1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(end.e, [0.0, 1.0, 0.0], atol=1e-12)

    def test_isometry_equivariance(self):
        rotation = Rotation.from_rotvec([0.3, -1.1, 0.7])
        shift = np.array([1.0, -2.0, 0.5])
        e0 = np.array([0.0, 0.6, 0.8])
        normal = np.array([1.0, 0.0, 0.0])
        c0 = Config3(np.array([0.2, 0.1, -0.4]), e0)
        moved = Config3(rotation.apply(c0.r) + shift, rotation.apply(e0))
        end = segment_endpoint(c0, Segment.arc(1.3, 1.0, normal=normal))
        moved_end = segment_endpoint(moved, Segment.arc(1.3, 1.0, normal=rotation.apply(normal)))
        np.testing.assert_allclose(moved_end.r, rotation.apply(end.r) + shift, atol=1e-9)
        np.testing.assert_allclose(moved_end.e, rotation.apply(end.e), atol=1e-9)

    def test_frenet_straight_line(self):
        frames = frenet_integrate(canonical_frame(), 0.0, 0.0, 3.0)
        np.testing.assert_allclose(frames[-1].r, [3.0, 0.0, 0.0], atol=1e-12)
        self.assertEqual(frames[0].r.tolist(), [0.0, 0.0, 0.0])

    def test_frenet_unit_circle_closes(self):
        frames = frenet_integrate(canonical_frame(), 1.0, 0.0, 2.0 * math.pi)
        np.testing.assert_allclose(frames[-1].r, [0.0, 0.0, 0.0], atol=1e-6)
        np.testing.assert_allclose(frames[-1].T, [1.0, 0.0, 0.0], atol=1e-6)

    def test_frenet_matches_closed_form_helix(self):
        frames = frenet_integrate(canonical_frame(), 1.0, 1.0, 4.0)
        expected = helix_frame(canonical_frame(), 1.0, 1.0, 4.0)
        np.testing.assert_allclose(frames[-1].r, expected.r, atol=1e-6)
        np.testing.assert_allclose(frames[-1].T, expected.T, atol=1e-6)
        np.testing.assert_allclose(frames[-1].B, expected.B, atol=1e-6)

    def test_frenet_frames_stay_orthonormal(self):
        frames = frenet_integrate(canonical_frame(), lambda s: 1.0 + 0.5 * np.sin(s), lambda s: np.cos(3.0 * s), 5.0,
                                  step=1e-3)
        worst = max(orthonormality_error(frame.T, frame.N, frame.B) for frame in frames)
        self.assertLessEqual(worst, 1e-6)

    def test_frenet_converges_at_fourth_order(self):
        exact = helix_frame(canonical_frame(), 1.0, 1.0, 4.0).r
        coarse = np.linalg.norm(frenet_integrate(canonical_frame(), 1.0, 1.0, 4.0, step=0.2)[-1].r - exact)
        fine = np.linalg.norm(frenet_integrate(canonical_frame(), 1.0, 1.0, 4.0, step=0.1)[-1].r - exact)
        self.assertGreaterEqual(coarse / fine, 8.0)

    def test_frenet_rejects_bad_frame(self):
        with self.assertRaises(InvalidFrame):
            Frame3(np.zeros(3), np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]))
        with self.assertRaises(InvalidFrame):
            frenet_integrate(self.base, 1.0, 0.0, 1.0)

    def test_path_evaluate_start(self):
        path = PathSpec(Config2(0.5, -1.0, 0.3), (Segment.arc(1.0, 1.0), Segment.straight(2.0)))
        self.assertIs(path_evaluate(path, 0.0), path.start)

    def test_path_evaluate_concatenated_straights(self):
        path = PathSpec(self.base, (Segment.straight(2.0), Segment.straight(3.0)))
        np.testing.assert_allclose(path_evaluate(path, 4.0).r, [4.0, 0.0, 0.0], atol=1e-12)

    def test_path_evaluate_quarter_circle_then_straight(self):
        path = PathSpec(Config2(0.0, 0.0, 0.0), (Segment.arc(math.pi / 2.0, 1.0), Segment.straight(1.0)))
        end = path_evaluate(path, math.pi / 2.0 + 1.0)
        self.assertAlmostEqual(end.x, 1.0, places=12)
        self.assertAlmostEqual(end.y, 2.0, places=12)
        self.assertAlmostEqual(end.theta, math.pi / 2.0, places=12)

    @parameterized.expand([
        (-0.5,),
        (3.5,),
        (float("nan"),),
    ])
    def test_path_evaluate_out_of_range(self, s):
        path = PathSpec(Config2(0.0, 0.0, 0.0), (Segment.straight(3.0),))
        with self.assertRaises(OutOfRange):
            path_evaluate(path, s)

    @parameterized.expand([
        (0.0,),
        (1.3,),
        (-2.9,),
    ])
    def test_embed_origin_maps_to_base(self, psi):
        base = Config3(np.array([1.0, 2.0, 3.0]), np.array([0.0, 0.6, 0.8]))
        embedded = embed_2d(Config2(0.0, 0.0, 0.0), psi, base)
        self.assertTrue(embedded.allclose(base, atol=1e-12))

    @parameterized.expand([
        ((1.0, 0.0, 0.0), 0.0, (1.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
        ((0.0, 1.0, math.pi / 2.0), math.pi / 2.0, (0.0, 0.0, 1.0), (0.0, 0.0, 1.0)),
        ((0.0, 1.0, math.pi / 2.0), 0.0, (0.0, 1.0, 0.0), (0.0, 1.0, 0.0)),
    ])
    def test_embed_2d(self, config, psi, expected_r, expected_e):
        embedded = embed_2d(Config2(*config), psi, self.base)
        np.testing.assert_allclose(embedded.r, expected_r, atol=1e-12)
        np.testing.assert_allclose(embedded.e, expected_e, atol=1e-12)

    @parameterized.expand([
        (0.0,),
        (1.1,),
        (-2.5,),
    ])
    def test_embedding_commutes_with_endpoint(self, psi):
        base = Config3(np.array([1.0, 2.0, 3.0]), np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0))
        path = PathSpec(Config2(0.0, 0.0, 0.0),
                        (Segment.arc(0.7, 1.0), Segment.straight(0.5), Segment.arc(0.4, -1.0)))
        lifted = embed_path_2d(path, psi, base).endpoint()
        expected = embed_2d(path.endpoint(), psi, base)
        self.assertTrue(lifted.allclose(expected, atol=1e-9))

    def test_junctions_are_continuous(self):
        path = PathSpec(self.base, (Segment.arc(0.8, 1.0, normal=(0.0, 0.0, 1.0)), Segment.straight(0.4)))
        junctions = path.junctions()
        middle = path_evaluate(path, 0.8)
        self.assertTrue(junctions[1].allclose(middle, atol=1e-9))

    def test_heading_wraps_to_half_open_interval(self):
        self.assertEqual(Config2(0.0, 0.0, -math.pi).theta, math.pi)
        self.assertAlmostEqual(Config2(0.0, 0.0, 3.0 * math.pi / 2.0).theta, -math.pi / 2.0, places=12)

    def test_invalid_inputs(self):
        with self.assertRaises(InvalidInput):
            Config3(np.zeros(3), np.array([2.0, 0.0, 0.0]))
        with self.assertRaises(InvalidInput):
            Config2(float("inf"), 0.0, 0.0)
        with self.assertRaises(InvalidInput):
            PathSpec(Config2(0.0, 0.0, 0.0), (Segment.arc(1.0, 0.5),), 1.0)
        with self.assertRaises(InvalidInput):
            PathSpec(self.base, (Segment.arc(1.0, 1.0),))
        with self.assertRaises(InvalidInput):
            Segment.straight(-1.0)

    def test_path_dict_round_trip(self):
        path = PathSpec(self.base, (Segment.arc(0.8, 1.0, normal=(0.0, 0.0, 1.0)), Segment.straight(0.4),
                                    Segment.helix(0.5, 0.0, 1.0, 0.0, 0.3)))
        again = PathSpec.from_dict(path.to_dict())
        self.assertEqual(again.segments, path.segments)
        self.assertTrue(again.start.allclose(path.start, atol=0.0))
        self.assertEqual(again.tag, "CSH")

    @parameterized.expand([
        ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
        ((0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
        ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0)),
        ((0.0, 0.6, 0.8), (0.0, 0.8, -0.6)),
    ])
    def test_reference_normal(self, e, expected):
        np.testing.assert_allclose(reference_normal(e), expected, atol=1e-15)

    def test_plane_normal_turns_about_the_tangent(self):
        e = np.array([1.0, 0.0, 0.0])
        np.testing.assert_allclose(plane_normal(e, 0.0), [0.0, 1.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(plane_normal(e, math.pi / 2), [0.0, 0.0, 1.0], atol=1e-15)
        tilted = np.array([0.3, -0.5, 0.8]) / np.linalg.norm([0.3, -0.5, 0.8])
        for psi in np.linspace(0.0, 2.0 * math.pi, 7):
            n = plane_normal(tilted, psi)
            self.assertAlmostEqual(float(n @ tilted), 0.0, delta=1e-14)
            self.assertAlmostEqual(float(np.linalg.norm(n)), 1.0, delta=1e-14)

    def test_sample_path(self):
        path = PathSpec(Config2(0.0, 0.0, 0.0), (Segment.arc(math.pi / 2, 1.0), Segment.straight(1.0)))
        samples = sample_path(path, 0.1)
        self.assertEqual(samples.t[0], 0.0)
        self.assertAlmostEqual(samples.t[-1], math.pi / 2 + 1.0, delta=1e-12)
        np.testing.assert_allclose(samples.states[-1], [1.0, 2.0, math.pi / 2], atol=1e-12)
        np.testing.assert_allclose(samples.controls[samples.segment_index == 0], 1.0)
        np.testing.assert_allclose(samples.controls[samples.segment_index == 1], 0.0)
        # both ends of both segments are flagged
        self.assertEqual(int(samples.boundary.sum()), 4)
        self.assertTrue(np.all(np.diff(samples.t) <= 0.1 + 1e-12))

        even = sample_path(path, 0.1, even=True)
        for index in (0, 1):
            self.assertEqual(int(np.sum(even.segment_index == index)) % 2, 1)
        with self.assertRaises(InvalidInput):
            sample_path(path, 0.0)
