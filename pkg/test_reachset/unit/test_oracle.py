import math
import os
import unittest
from unittest import mock

import numpy as np
from parameterized import parameterized

from reachset.config import threads_env_var
from reachset.exceptions import InvalidInput
from reachset.geometry import Config2, PathSpec, Segment
from reachset.reach import Mode, integrate_piecewise_controls, mc_oracle
from reachset.utils.workers import WorkerMap, worker_count


class TestOracle(unittest.TestCase):
    def setUp(self):
        pass

    def tearDown(self):
        pass

    def test_straight_control(self):
        np.testing.assert_allclose(integrate_piecewise_controls(Mode.PLANAR_DIR, [[0.0]], 1.0), [[1.0, 0.0, 0.0]])
        np.testing.assert_allclose(integrate_piecewise_controls("2d-nodir", [[0.0, 0.0]], 2.0), [[2.0, 0.0]])

    def test_quarter_turn(self):
        end = integrate_piecewise_controls(Mode.PLANAR_DIR, [[1.0]], math.pi / 2.0)
        np.testing.assert_allclose(end, [[1.0, 1.0, math.pi / 2.0]], atol=1e-12)

    @parameterized.expand([
        (0.0, [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]),
        (math.pi / 2.0, [1.0, 0.0, 1.0], [0.0, 0.0, 1.0]),
    ])
    def test_spatial_quarter_turn(self, angle, expected_r, expected_e):
        end = integrate_piecewise_controls(Mode.SPATIAL_DIR, [[[angle, 1.0]]], math.pi / 2.0)
        np.testing.assert_allclose(end[0, 0:3], expected_r, atol=1e-12)
        np.testing.assert_allclose(end[0, 3:6], expected_e, atol=1e-12)

    def test_pieces_match_path_endpoint(self):
        end = integrate_piecewise_controls(Mode.PLANAR_DIR, [[1.0, 0.0, -1.0, 1.0]], 2.0)[0]
        path = PathSpec(Config2(0.0, 0.0, 0.0), (Segment.arc(0.5, 1.0), Segment.straight(0.5),
                                                 Segment.arc(0.5, -1.0), Segment.arc(0.5, 1.0)))
        expected = path.endpoint()
        np.testing.assert_allclose(end, [expected.x, expected.y, 0.5], atol=1e-12)

    @parameterized.expand([
        (Mode.PLANAR_NODIR,),
        (Mode.PLANAR_DIR,),
        (Mode.SPATIAL_NODIR,),
        (Mode.SPATIAL_DIR,),
    ])
    def test_oracle_stays_within_budget(self, mode):
        t_f = 1.5
        cloud = mc_oracle(mode, t_f, n_samples=300, n_pieces=8, seed=3, jobs=1)
        self.assertEqual(cloud.points.shape, (300, mode.endpoint_size))
        positions = cloud.points[:, 0:mode.dim]
        self.assertTrue(np.all(np.linalg.norm(positions, axis=1) <= t_f + 1e-12))
        if mode is Mode.SPATIAL_DIR:
            np.testing.assert_allclose(np.linalg.norm(cloud.points[:, 3:6], axis=1), 1.0, atol=1e-12)

    def test_oracle_is_deterministic(self):
        first = mc_oracle(Mode.PLANAR_DIR, 2.0, n_samples=500, n_pieces=10, seed=11, jobs=1, chunk_size=128)
        again = mc_oracle(Mode.PLANAR_DIR, 2.0, n_samples=500, n_pieces=10, seed=11, jobs=1, chunk_size=128)
        other = mc_oracle(Mode.PLANAR_DIR, 2.0, n_samples=500, n_pieces=10, seed=12, jobs=1, chunk_size=128)
        self.assertEqual(first.points.tobytes(), again.points.tobytes())
        self.assertNotEqual(first.points.tobytes(), other.points.tobytes())

    def test_oracle_is_independent_of_workers(self):
        serial = mc_oracle(Mode.SPATIAL_NODIR, 1.0, n_samples=400, n_pieces=5, seed=5, jobs=1, chunk_size=100)
        parallel = mc_oracle(Mode.SPATIAL_NODIR, 1.0, n_samples=400, n_pieces=5, seed=5, jobs=2, chunk_size=100)
        self.assertEqual(serial.points.tobytes(), parallel.points.tobytes())

    def test_empty_oracle(self):
        cloud = mc_oracle(Mode.PLANAR_NODIR, 1.0, n_samples=0)
        self.assertEqual(len(cloud), 0)
        self.assertEqual(cloud.points.shape, (0, 2))
        self.assertEqual(list(cloud.to_frame().columns), ["x", "y"])

    @parameterized.expand([
        (0.0, 10, 5),
        (-1.0, 10, 5),
        (1.0, -1, 5),
        (1.0, 10, 0),
    ])
    def test_oracle_rejects_invalid_input(self, t_f, n_samples, n_pieces):
        with self.assertRaises(InvalidInput):
            mc_oracle(Mode.PLANAR_NODIR, t_f, n_samples=n_samples, n_pieces=n_pieces, jobs=1)

    def test_unknown_mode(self):
        with self.assertRaises(InvalidInput):
            Mode.parse("4d-dir")

    def test_worker_count(self):
        with mock.patch.dict(os.environ, {threads_env_var: ""}):
            self.assertEqual(worker_count(3), 3)
        with mock.patch.dict(os.environ, {threads_env_var: "2"}):
            self.assertEqual(worker_count(), 2)
        with mock.patch.dict(os.environ, {threads_env_var: "many"}):
            self.assertGreaterEqual(worker_count(), 1)

    @parameterized.expand([
        ("env_caps_request", 8, "2", 2),
        ("request_below_env", 1, "4", 1),
        ("env_unset", 5, "", 5),
        ("env_zero", 5, "0", 5),
        ("env_with_all_cpus", 0, "3", 3),
    ])
    def test_worker_count_takes_the_smaller(self, _, requested, env, expected):
        with mock.patch.dict(os.environ, {threads_env_var: env}):
            self.assertEqual(worker_count(requested), expected)

    def test_serial_worker_map_keeps_order(self):
        with WorkerMap(1) as map_function:
            self.assertEqual(map_function(abs, [-3, 2, -1]), [3, 2, 1])
