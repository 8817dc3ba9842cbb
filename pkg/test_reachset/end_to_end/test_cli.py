import io
import json
import tempfile
import unittest
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pandas as pd
from parameterized import parameterized

from reachset.geometry import Config2, PathSpec, Segment
from reachset.pmp import PmpReport
from reachset.scripts.cli import EXIT_INVALID, EXIT_OK, main


class TestCli(unittest.TestCase):
    def setUp(self):
        self.workdir = tempfile.TemporaryDirectory()
        self.root = Path(self.workdir.name)

    def tearDown(self):
        self.workdir.cleanup()

    def write_json(self, name: str, data) -> str:
        path = self.root / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    def run_command(self, command: str, config: dict, *extra: str) -> int:
        return main([command, "--config", self.write_json("run.json", config), *extra])

    def test_boundary(self):
        config = {"mode": "2d-nodir", "t_f": 1.0, "seed": 5, "jobs": 1, "grid": {"arc_resolution": 8},
                  "oracle": {"n_samples": 300, "n_pieces": 10}}
        out = self.root / "boundary.csv"
        self.assertEqual(self.run_command("boundary", config, "--out", str(out)), EXIT_OK)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["x", "y", "family", "pmp_pass", "gen_params_json"])
        self.assertGreaterEqual(len(frame), 8)
        self.assertTrue(frame["pmp_pass"].any())
        self.assertFalse(frame["pmp_pass"].all())
        for generator in frame["gen_params_json"]:
            self.assertAlmostEqual(PathSpec.from_dict(json.loads(generator)).total_length, 1.0, delta=1e-12)

        sidecar = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
        self.assertEqual(sidecar["seed"], 5)
        self.assertEqual(len(sidecar["config_hash"]), 64)
        self.assertLessEqual(sidecar["containment"]["fraction_outside"], 1e-2)

        first = out.read_bytes(), out.with_suffix(".json").read_bytes()
        self.assertEqual(self.run_command("boundary", config, "--out", str(out)), EXIT_OK)
        self.assertEqual((out.read_bytes(), out.with_suffix(".json").read_bytes()), first)

    def test_boundary_drops_unverified_on_request(self):
        config = {"mode": "2d-nodir", "t_f": 1.0, "jobs": 1, "grid": {"arc_resolution": 8},
                  "oracle": {"n_samples": 300, "n_pieces": 10}, "screening": {"keep_unverified": False}}
        out = self.root / "boundary.csv"
        self.assertEqual(self.run_command("boundary", config, "--out", str(out)), EXIT_OK)
        self.assertTrue(pd.read_csv(out)["pmp_pass"].all())

    def test_oracle(self):
        config = {"mode": "2d-dir", "t_f": 2.0, "jobs": 1, "oracle": {"n_samples": 10, "n_pieces": 4}}
        out = self.root / "oracle.csv"
        self.assertEqual(self.run_command("oracle", config, "--seed", "7", "--out", str(out)), EXIT_OK)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["x", "y", "theta"])
        self.assertEqual(len(frame), 10)
        self.assertTrue(np.all(np.hypot(frame["x"], frame["y"]) <= 2.0 + 1e-12))
        first = out.read_bytes()

        self.assertEqual(self.run_command("oracle", config, "--seed", "7", "--out", str(out)), EXIT_OK)
        self.assertEqual(out.read_bytes(), first)
        self.assertEqual(self.run_command("oracle", config, "--seed", "8", "--out", str(out)), EXIT_OK)
        self.assertNotEqual(out.read_bytes(), first)
        self.assertEqual(json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))["seed"], 8)

    def test_pmp_check(self):
        path = PathSpec(Config2(0.0, 0.0, 0.0), (Segment.straight(1.0),)).to_dict()
        path["costate"] = {"p_tf": [1.0, 0.0, 0.0], "p0": 0.0, "phi": 0.0, "grad_phi": [1.0, 0.0, 0.0]}
        out = self.root / "report.json"
        code = self.run_command("pmp-check", {"jobs": 1}, "--path", self.write_json("path.json", path),
                                "--out", str(out))
        self.assertEqual(code, EXIT_OK)
        result = json.loads(out.read_text(encoding="utf-8"))
        self.assertEqual(result["costate_source"], "given")
        self.assertTrue(result["report"]["valid"])
        self.assertEqual(PmpReport.from_dict(result["report"]).to_dict(), result["report"])

    def test_pmp_check_screens_without_costate(self):
        path = PathSpec(Config2(0.0, 0.0, 0.0), (Segment.arc(0.5, 1.0), Segment.straight(0.5))).to_dict()
        out = self.root / "report.json"
        code = self.run_command("pmp-check", {"mode": "2d-nodir"}, "--path", self.write_json("path.json", path),
                                "--out", str(out))
        self.assertEqual(code, EXIT_OK)
        result = json.loads(out.read_text(encoding="utf-8"))
        self.assertEqual(result["costate_source"], "screened")
        self.assertTrue(result["report"]["valid"])

    def test_equiv(self):
        config = {"mode": "2d-nodir", "t_f": 1.0, "grid": {"arc_resolution": 12},
                  "equiv": {"directions": [[1.0, 0.0], [0.9, 0.3]]}}
        out = self.root / "equiv.csv"
        self.assertEqual(self.run_command("equiv", config, "--out", str(out)), EXIT_OK)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["c_x", "c_y", "support_value", "family", "reach_pass",
                                               "time_optimal_pass", "max_pointwise_gap", "max_abs_hamiltonian",
                                               "branch"])
        self.assertTrue(frame["reach_pass"].all())
        self.assertTrue(frame["time_optimal_pass"].all())
        sidecar = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
        self.assertEqual(sidecar["pass_rate"], 1.0)
        self.assertEqual(sidecar["branches"], {"min_time": 2})

    def test_equiv_with_zero_tolerance(self):
        config = {"mode": "2d-nodir", "t_f": 1.0, "grid": {"arc_resolution": 12}, "tolerances": {"equivalence": 0.0},
                  "equiv": {"directions": [[0.9, 0.3], [0.6, -0.8]]}}
        out = self.root / "equiv.csv"
        self.assertEqual(self.run_command("equiv", config, "--out", str(out)), EXIT_OK)
        sidecar = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
        self.assertLess(sidecar["pass_rate"], 1.0)

    @parameterized.expand([
        ("zero_budget", "boundary", {"mode": "2d-nodir"}, ("--t-f", "0")),
        ("unknown_key", "oracle", {"oracle": {"samples": 10}}, ()),
        ("empty_directions", "equiv", {"equiv": {"directions": []}}, ()),
        ("wrong_direction_size", "equiv", {"equiv": {"directions": [[1.0, 0.0, 0.0]]}}, ()),
        ("missing_path", "pmp-check", {}, ()),
    ])
    def test_invalid_runs(self, _, command, config, extra):
        out = self.root / "out.csv"
        self.assertEqual(self.run_command(command, config, "--out", str(out), *extra), EXIT_INVALID)
        self.assertFalse(out.exists())

    def test_malformed_path_file(self):
        bad = self.root / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        code = self.run_command("pmp-check", {}, "--path", str(bad), "--out", str(self.root / "report.json"))
        self.assertEqual(code, EXIT_INVALID)
        malformed = self.write_json("malformed.json", {"start": {"x": 0.0}, "segments": "none"})
        code = self.run_command("pmp-check", {}, "--path", malformed, "--out", str(self.root / "report.json"))
        self.assertEqual(code, EXIT_INVALID)

    def test_version(self):
        self.assertEqual(main(["version"]), EXIT_OK)

    @parameterized.expand([
        ("top_level", ()),
        ("boundary", ("boundary",)),
        ("equiv", ("equiv",)),
        ("pmp_check", ("pmp-check",)),
    ])
    def test_help_states_the_adjoint_default(self, _, command):
        buffer = io.StringIO()
        with self.assertRaises(SystemExit), redirect_stdout(buffer):
            main([*command, "--help"])
        text = " ".join(buffer.getvalue().split())
        self.assertIn('screening.adjoint="tangent" by default', text)
        self.assertIn('screening.adjoint="ambient"', text)
