import unittest

from parameterized import parameterized

from reachset.exceptions import InvalidConfig
from reachset.reach import Mode
from reachset.scripts.run_config import RunConfig
from reachset.torsion import BranchSelector


class TestRunConfig(unittest.TestCase):
    def setUp(self):
        self.document = {
            "mode": "3d-dir",
            "t_f": 2,
            "seed": 7,
            "jobs": 1,
            "grid": {"arc_resolution": 16, "psi_resolution": 8, "branch": "min_time"},
            "h_grid": {"zeta_values": [0.0, 1.0], "tau0_values": [1.0], "taudot0_values": [0.0]},
            "oracle": {"n_samples": 1000, "n_pieces": 10},
            "tolerances": {"pmp": 1e-5},
            "equiv": {"directions": [[1.0, 0.0, 0.0]]},
        }

    def tearDown(self):
        pass

    def test_defaults(self):
        config = RunConfig()
        self.assertEqual(config.run_mode, Mode.PLANAR_NODIR)
        self.assertIsNone(config.tolerances.pmp)
        self.assertEqual(config.screening.adjoint, "tangent")
        self.assertTrue(config.screening.keep_unverified)

    def test_document_is_parsed(self):
        config = RunConfig.from_dict(self.document)
        self.assertEqual(config.run_mode, Mode.SPATIAL_DIR)
        self.assertEqual(config.t_f, 2.0)
        self.assertEqual(config.grid.arc_resolution, 16)
        self.assertEqual(config.oracle.n_pieces, 10)
        grid = config.candidate_grid()
        self.assertEqual(grid.branch, BranchSelector.MIN_TIME)
        self.assertEqual(grid.zeta_values, (0.0, 1.0))
        self.assertEqual(config.oracle_settings().seed, 7)

    def test_round_trip(self):
        config = RunConfig.from_dict(self.document)
        self.assertEqual(RunConfig.from_dict(config.to_dict()), config)

    def test_hash_is_stable(self):
        first = RunConfig.from_dict(self.document)
        second = RunConfig.from_dict(dict(reversed(list(self.document.items()))))
        self.assertEqual(first.config_hash(), second.config_hash())
        self.assertEqual(len(first.config_hash()), 64)
        self.assertNotEqual(first.config_hash(), RunConfig.from_dict({**self.document, "seed": 8}).config_hash())

    @parameterized.expand([
        ("unknown_top_level", {"colour": "red"}),
        ("unknown_nested", {"grid": {"foo": 1}}),
        ("zero_budget", {"t_f": 0.0}),
        ("negative_budget", {"t_f": -1.0}),
        ("string_budget", {"t_f": "1.0"}),
        ("bad_mode", {"mode": "4d-dir"}),
        ("bad_branch", {"grid": {"branch": "sometimes"}}),
        ("zero_resolution", {"grid": {"arc_resolution": 0}}),
        ("negative_seed", {"seed": -1}),
        ("empty_h_grid", {"h_grid": {"zeta_values": []}}),
        ("bad_adjoint", {"screening": {"adjoint": "cotangent"}}),
        ("section_not_object", {"oracle": 5}),
    ])
    def test_invalid_documents(self, _, document):
        with self.assertRaises(InvalidConfig):
            RunConfig.from_dict(document)

    def test_document_must_be_an_object(self):
        with self.assertRaises(InvalidConfig):
            RunConfig.from_dict([1, 2])
