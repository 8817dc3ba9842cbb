"""
Command-line interface.

    reachset boundary  --config run.json [--t-f T] [--seed S] [--mode M] [--out FILE]
    reachset oracle    --config run.json ...
    reachset pmp-check --config run.json --path path.json [--out report.json]
    reachset equiv     --config run.json ...
    reachset version

Every run writes its table as CSV (17 significant digits, '\\n' line endings) plus a JSON
sidecar next to it (same stem) with the version, the configuration, its hash, the seed and
the run counts. Exit codes: 0 success, 2 invalid configuration or input, 3 runtime failure.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from reachset.config import logger
from reachset.exceptions import InvalidConfig, InvalidGrid, InvalidInput, OutOfRange
from reachset.families import candidate_table
from reachset.geometry import PathSpec
from reachset.pmp.checker import PmpChecker, StrictnessLevel
from reachset.pmp.conditions import equivalence_check
from reachset.pmp.report import IssueSeverity, PmpIssue, PmpReport
from reachset.reach.boundary import build_boundary, containment_check
from reachset.reach.oracle import mc_oracle
from reachset.reach.support import sample_directions, support_direction, support_point
from reachset.scripts.run_config import RunConfig
from reachset.utils.helper_functions import NumpyEncoder

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILURE = 3

_CSV_FLOAT_FORMAT = "%.17g"


# ************************************************************************************************************
#                                           Output
# ************************************************************************************************************


def write_csv(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=_CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"wrote {len(frame)} rows to {path}")


def write_json(data: Dict[str, Any], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, cls=NumpyEncoder) + "\n", encoding="utf-8")
    logger.info(f"wrote {path}")


def sidecar_path(out: Path) -> Path:
    return out.with_suffix(".json")


def run_header(command: str, config: RunConfig) -> Dict[str, Any]:
    from reachset import __version__
    return {
        "command": command,
        "version": __version__,
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "seed": config.seed,
    }


# ************************************************************************************************************
#                                           Commands
# ************************************************************************************************************


def cmd_boundary(config: RunConfig) -> int:
    """Builds the sampled boundary and writes it with its oracle containment summary."""
    mode = config.run_mode
    grid = config.candidate_grid()
    oracle = None
    if config.oracle.validate:
        oracle = mc_oracle(mode, grid.t_f, config.oracle.n_samples, config.oracle.n_pieces, config.seed,
                           grid.kappa_max, config.jobs, config.oracle.chunk_size, progress=True)
    boundary = build_boundary(mode, grid, config.oracle_settings() if oracle is not None else None,
                              config.screening.keep_unverified, oracle, config.screening.step,
                              config.tolerances.pmp, config.screening.adjoint, config.jobs, progress=True)
    out = Path(config.out)
    write_csv(boundary.to_frame(), out)
    sidecar = run_header("boundary", config)
    sidecar["counts"] = {"points": len(boundary), "pmp_pass": sum(1 for p in boundary.points if p.pmp_verdict)}
    sidecar["metadata"] = boundary.metadata
    if oracle is not None:
        eps = config.oracle.eps_in_factor * grid.t_f
        sidecar["containment"] = {"eps_in": eps, "fraction_outside": containment_check(boundary, oracle, eps)}
    write_json(sidecar, sidecar_path(out))
    return EXIT_OK


def cmd_oracle(config: RunConfig) -> int:
    """Samples the Monte Carlo oracle."""
    oracle = mc_oracle(config.run_mode, float(config.t_f), config.oracle.n_samples, config.oracle.n_pieces,
                       config.seed, float(config.kappa_max), config.jobs, config.oracle.chunk_size, progress=True)
    out = Path(config.out)
    write_csv(oracle.to_frame(), out)
    sidecar = run_header("oracle", config)
    sidecar["counts"] = {"samples": len(oracle)}
    sidecar["metadata"] = oracle.metadata()
    write_json(sidecar, sidecar_path(out))
    return EXIT_OK


def load_path_file(path_file: str) -> Dict[str, Any]:
    """
    Reads a path specification: a PathSpec object (start, segments, kappa_max, optional dim)
    with an optional "costate" block {"p_tf": [...], "p0": 0, "phi": 0, "grad_phi": [...]}.
    """
    data = json.loads(Path(path_file).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise InvalidInput("path file must hold a JSON object")
    costate = data.pop("costate", None)
    if costate is not None and (not isinstance(costate, dict) or "p_tf" not in costate):
        raise InvalidInput("costate block must be an object with a p_tf entry")
    return {"path": PathSpec.from_dict(data), "costate": costate}


def cmd_pmp_check(config: RunConfig) -> int:
    """Checks one path; with no costate in the path file one is screened. The verdict is data, not the exit code."""
    if not config.path_file:
        raise InvalidConfig("pmp-check needs a path file (--path or path_file)")
    loaded = load_path_file(config.path_file)
    path: PathSpec = loaded["path"]
    checker = PmpChecker(StrictnessLevel.MODERATE, adjoint=config.screening.adjoint,
                         tolerance_override=config.tolerances.pmp)
    costate = loaded["costate"]
    if costate is not None:
        p_tf = np.asarray(costate["p_tf"], dtype=float)
        report = checker.check(path, p_tf, float(costate.get("p0", 0.0)), float(costate.get("phi", 0.0)),
                               costate.get("grad_phi"))
        source = "given"
    else:
        screening = checker.screen(path, config.run_mode.with_direction)
        p_tf = screening.p_tf
        report = screening.report
        source = "screened"
        if report is None:
            report = PmpReport(tolerance=checker.tolerance_for(path), verdicts={"costate_found": True})
            report.add_issue(PmpIssue(
                code="NO_COSTATE",
                message=screening.reason,
                severity=IssueSeverity.ERROR,
                condition="costate_found",
                explanation="no nontrivial terminal costate makes the path an extremal",
            ))
    result = run_header("pmp-check", config)
    result.update({
        "path": path.to_dict(),
        "costate_source": source,
        "p_tf": None if p_tf is None else np.asarray(p_tf).tolist(),
        "report": report.to_dict(),
    })
    write_json(result, Path(config.out))
    print(report)
    return EXIT_OK


def equiv_directions(config: RunConfig) -> np.ndarray:
    mode = config.run_mode
    if config.equiv.directions is not None:
        if not config.equiv.directions:
            raise InvalidConfig("equiv.directions is empty")
        return np.vstack([support_direction(mode, c) for c in config.equiv.directions])
    if config.equiv.n_directions < 1:
        raise InvalidConfig("equiv needs at least one direction")
    return sample_directions(mode, config.equiv.n_directions, config.seed)


def cmd_equiv(config: RunConfig) -> int:
    """Support winners along random directions, each checked in both optimization forms."""
    mode = config.run_mode
    directions = equiv_directions(config)
    table = candidate_table(config.candidate_grid(), mode.with_direction, mode.dim)
    rows: List[Dict[str, Any]] = []
    for c in tqdm(directions, desc="equivalence"):
        support = support_point(mode, c, table=table, refine=config.equiv.refine)
        report = equivalence_check(support.generator, c, config.tolerances.equivalence,
                                   adjoint=config.screening.adjoint)
        row: Dict[str, Any] = {f"c_{name}": float(value) for name, value in zip(mode.columns, c)}
        row.update({
            "support_value": support.value,
            "family": str(support.family),
            "reach_pass": report.reach_pass,
            "time_optimal_pass": report.time_optimal_pass,
            "max_pointwise_gap": report.reach_report.max_pointwise_gap,
            "max_abs_hamiltonian": report.max_abs_hamiltonian,
            "branch": report.branch,
        })
        rows.append(row)
    frame = pd.DataFrame(rows)
    out = Path(config.out)
    write_csv(frame, out)
    passed = int((frame["reach_pass"] & frame["time_optimal_pass"]).sum())
    sidecar = run_header("equiv", config)
    sidecar["counts"] = {"directions": len(frame), "passed": passed}
    sidecar["pass_rate"] = passed / len(frame)
    sidecar["branches"] = {str(k): int(v) for k, v in frame["branch"].value_counts().sort_index().items()}
    write_json(sidecar, sidecar_path(out))
    logger.info(f"equivalence holds for {passed} of {len(frame)} support winners")
    return EXIT_OK


commands: Dict[str, Callable[[RunConfig], int]] = {
    "boundary": cmd_boundary,
    "oracle": cmd_oracle,
    "pmp-check": cmd_pmp_check,
    "equiv": cmd_equiv,
}


# ************************************************************************************************************
#                                           Arguments
# ************************************************************************************************************


ADJOINT_NOTE = (
    "3D costates use screening.adjoint=\"tangent\" by default: the adjoint of the sphere-preserving extension "
    "of the dynamics, under which H is constant along arcs. Set screening.adjoint=\"ambient\" in the run "
    "configuration for the closed form p_e(t) = p_e(t_f) + p_r (t_f - t) in ambient coordinates."
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reachset",
        description="Sampled reachable-set boundaries of curvature-bounded paths and PMP checks.",
        epilog=ADJOINT_NOTE,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("boundary", "build the sampled boundary of the reachable set"),
                            ("oracle", "sample endpoints of random admissible controls"),
                            ("pmp-check", "check the PMP conditions on one path"),
                            ("equiv", "check support winners in both optimization forms")):
        sub = subparsers.add_parser(name, help=help_text, epilog=ADJOINT_NOTE)
        sub.add_argument("--config", type=str, default=None, help="JSON run configuration")
        sub.add_argument("--t-f", dest="t_f", type=float, default=None, help="arc-length budget")
        sub.add_argument("--seed", type=int, default=None, help="root seed")
        sub.add_argument("--mode", type=str, default=None, help="2d-dir, 2d-nodir, 3d-dir or 3d-nodir")
        sub.add_argument("--out", type=str, default=None, help="output file")
        sub.add_argument("--jobs", type=int, default=None, help="worker processes, capped by REACHSET_THREADS when set")
        if name == "pmp-check":
            sub.add_argument("--path", dest="path_file", type=str, default=None, help="path specification JSON")
    subparsers.add_parser("version", help="print the package version")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Reads --config and applies the top-level flag overrides."""
    data: Dict[str, Any] = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise InvalidConfig("configuration must be a JSON object")
    for name in ("t_f", "seed", "mode", "out", "jobs", "path_file"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return RunConfig.from_dict(data)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "version":
        from reachset import __version__
        print(__version__)
        return EXIT_OK
    try:
        config = load_config(args)
        logger.info(f"{args.command}: mode={config.mode} t_f={config.t_f} seed={config.seed} "
                    f"config_hash={config.config_hash()[:12]}")
        return commands[args.command](config)
    except (InvalidConfig, InvalidInput, InvalidGrid, OutOfRange, json.JSONDecodeError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        print(f"runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
