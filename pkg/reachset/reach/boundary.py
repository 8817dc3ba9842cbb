"""
Sampled reachable-set boundaries and their validation against the Monte Carlo oracle.

build_boundary runs three stages over the candidate table of a mode:

1. costate screening: a candidate stays when some nontrivial terminal costate makes it an
   extremal; its normalized costate is the outward normal of the point;
2. dominance filter (needs an oracle): a point is dropped when a nearby oracle sample lies
   beyond it along its normal by more than eps_dom plus a curvature allowance;
3. ordering: the 2D-nodir points follow the closed curve LS, RL, RS reversed, then LR.

Containment uses the closed curves through the verified boundary points (2D-nodir, and
through the (axial, radial) profile in 3D-nodir) and support directions in the modes with
direction. planar_loops gives the same curves in closed form for reference.
"""
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import directed_hausdorff
from tqdm import tqdm

from reachset.config import logger, screening_step, support_probe_directions
from reachset.exceptions import InvalidInput
from reachset.families import CandidateGrid, CandidateTable, candidate_table, planar_endpoints
from reachset.geometry import Config3, PathSpec, embed_2d_batch, reference_normal
from reachset.pmp.screening import screen_costate
from reachset.reach.cloud import BoundaryCloud, BoundaryPoint, Mode, OracleCloud, OracleSettings
from reachset.reach.oracle import mc_oracle
from reachset.reach.support import sample_directions, support_sweep
from reachset.utils.workers import WorkerMap, worker_count

_WALK_ORDER = {"LS": 0, "RL": 1, "RS": 2, "LR": 3}
_POINT_CHUNK = 2048


# ************************************************************************************************************
#                                           Closed Curves
# ************************************************************************************************************


def planar_loops(t_f: float, kappa_max: float = 1.0, resolution: int = 512) -> List[np.ndarray]:
    """
    The two closed curves walked by the position-only planar families:
    LS ascending, then RL ascending or LR descending, then RS descending.
    """
    first = np.linspace(0.0, t_f, resolution)
    lengths = np.column_stack([first, t_f - first])

    def curve(signs: Tuple[int, int]) -> np.ndarray:
        x, y, _ = planar_endpoints(signs, lengths, kappa_max)
        return np.column_stack([x, y])

    ls, rs, lr, rl = curve((1, 0)), curve((-1, 0)), curve((1, -1)), curve((-1, 1))
    return [np.vstack([ls, rl[1:], rs[::-1][1:]]),
            np.vstack([ls, lr[::-1][1:], rs[::-1][1:]])]


def winding_numbers(loop: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Winding number of a closed polygon around each point (crossing rule)."""
    a = loop
    b = np.roll(loop, -1, axis=0)
    result = np.zeros(len(points), dtype=int)
    for start in range(0, len(points), _POINT_CHUNK):
        p = points[start:start + _POINT_CHUNK]
        px, py = p[:, 0:1], p[:, 1:2]
        cross = (b[:, 0] - a[:, 0]) * (py - a[:, 1]) - (px - a[:, 0]) * (b[:, 1] - a[:, 1])
        upward = (a[:, 1] <= py) & (b[:, 1] > py) & (cross > 0.0)
        downward = (a[:, 1] > py) & (b[:, 1] <= py) & (cross < 0.0)
        result[start:start + _POINT_CHUNK] = upward.sum(axis=1) - downward.sum(axis=1)
    return result


def distance_to_loop(loop: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the closed polygon."""
    a = loop
    edges = np.roll(loop, -1, axis=0) - a
    squared = np.maximum(np.einsum("ij,ij->i", edges, edges), 1e-300)
    result = np.empty(len(points))
    for start in range(0, len(points), _POINT_CHUNK):
        p = points[start:start + _POINT_CHUNK]
        offset = p[:, None, :] - a[None, :, :]
        along = np.clip(np.einsum("nvj,vj->nv", offset, edges) / squared, 0.0, 1.0)
        gap = offset - along[:, :, None] * edges[None, :, :]
        result[start:start + _POINT_CHUNK] = np.sqrt(np.einsum("nvj,nvj->nv", gap, gap).min(axis=1))
    return result


def region_contains(loops: List[np.ndarray], points: np.ndarray, eps: float = 0.0) -> np.ndarray:
    """Inside the union of the loops (nonzero winding) or within eps of one of them."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    inside = np.zeros(len(points), dtype=bool)
    for loop in loops:
        inside |= winding_numbers(loop, points) != 0
    if eps > 0.0:
        for loop in loops:
            pending = ~inside
            if not pending.any():
                break
            inside[pending] = distance_to_loop(loop, points[pending]) <= eps
    return inside


def revolve_profile(profile: np.ndarray, psi_values: np.ndarray, base: Optional[Config3] = None) -> np.ndarray:
    """
    Surface of revolution of a planar (x, y) profile about the initial tangent of base.
    :return: (len(profile) * len(psi_values), 3) positions, profile-major
    """
    base = Config3(np.zeros(3), np.array([1.0, 0.0, 0.0])) if base is None else base
    profile = np.asarray(profile, dtype=float).reshape(-1, 2)
    psi_values = np.asarray(psi_values, dtype=float)
    r, _ = embed_2d_batch(profile[:, 0:1], profile[:, 1:2], np.zeros((len(profile), 1)), psi_values[None, :], base)
    return r.reshape(-1, 3)


def profile_coordinates(positions: np.ndarray, origin: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """(axial, radial) coordinates of 3D positions about the axis through origin."""
    relative = np.asarray(positions, dtype=float).reshape(-1, 3) - origin
    axial = relative @ axis
    radial = np.linalg.norm(relative - axial[:, None] * axis, axis=1)
    return np.column_stack([axial, radial])


def hausdorff_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point sets of equal dimension."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise InvalidInput(f"point sets differ in dimension: {a.shape[1]} and {b.shape[1]}")
    if not len(a) or not len(b):
        raise InvalidInput("Hausdorff distance of an empty point set")
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


# ************************************************************************************************************
#                                           Screening
# ************************************************************************************************************


def _screen_task(task) -> Tuple[bool, Optional[np.ndarray], str]:
    path, with_direction, step, tol, adjoint = task
    result = screen_costate(path, with_direction, step, tol, adjoint)
    return result.passed, result.p_tf, result.reason


def _screening_jobs(table: CandidateTable) -> Tuple[List[Tuple[Any, PathSpec]], np.ndarray]:
    """
    Unique screening problems and the job of every row. 3D planar rows share the job of
    their planar path (the verdict does not depend on the plane angle); H rows share the
    job of their torsion parameters at plane angle 0.
    """
    keys: Dict[Any, int] = {}
    jobs: List[Tuple[Any, PathSpec]] = []
    row_job = np.empty(len(table), dtype=int)
    for i in range(len(table)):
        template = table.template_of(i)
        if table.dim == 2:
            key: Any = ("row", i)
        elif template.family == "H":
            key = ("h", int(table.h_index[i]))
        else:
            key = ("planar", int(table.template_index[i]), tuple(table.row_lengths(i).tolist()))
        if key not in keys:
            keys[key] = len(jobs)
            if table.dim == 2 or key[0] == "planar":
                path = template.path_2d(table.row_lengths(i), table.grid.kappa_max) if table.dim == 3 else table.path(i)
            else:
                path = table.path(i, psi=0.0)
            jobs.append((key, path))
        row_job[i] = keys[key]
    return jobs, row_job


def _row_normal(table: CandidateTable, i: int, p_tf: np.ndarray, with_direction: bool) -> np.ndarray:
    """Endpoint-space normal of row i from the terminal costate of its screening job."""
    if table.dim == 2:
        return p_tf[0:3] if with_direction else p_tf[0:2]
    base = table.base
    n_ref = reference_normal(base.e)
    m_ref = np.cross(base.e, n_ref)
    psi = float(table.psi[i])
    n = math.cos(psi) * n_ref + math.sin(psi) * m_ref
    b = math.cos(psi) * m_ref - math.sin(psi) * n_ref
    if table.template_of(i).family == "H":
        # screened at psi = 0: rotate the (e, n, b) coordinates into the plane of row i
        p_r = (p_tf[0:3] @ base.e) * base.e + (p_tf[0:3] @ n_ref) * n + (p_tf[0:3] @ m_ref) * b
        p_e = (p_tf[3:6] @ base.e) * base.e + (p_tf[3:6] @ n_ref) * n + (p_tf[3:6] @ m_ref) * b
    else:
        p_r = p_tf[0] * base.e + p_tf[1] * n
        theta = float(table.heading[i])
        p_e = (p_tf[2] if with_direction else 0.0) * (-math.sin(theta) * base.e + math.cos(theta) * n)
    return np.concatenate([p_r, p_e]) if with_direction else p_r


def screen_table(table: CandidateTable, step: float = screening_step, tol: Optional[float] = None,
                 adjoint: str = "tangent", jobs: Optional[int] = None,
                 progress: bool = False) -> Tuple[np.ndarray, List[Optional[np.ndarray]], List[str]]:
    """
    Screens every row of a candidate table.
    :return: (verdicts, unit endpoint-space normals of verified rows or None, failure reasons) per row
    """
    problems, row_job = _screening_jobs(table)
    tasks = [(path, table.with_direction, step, tol, adjoint) for _, path in problems]
    workers = min(worker_count(jobs), max(len(tasks), 1))
    logger.info(f"screening {len(table)} candidates through {len(tasks)} costate problems on {workers} workers")
    with WorkerMap(workers) as map_function:
        results = map_function(_screen_task, tqdm(tasks, desc="screening", disable=not progress))
    verdicts = np.zeros(len(table), dtype=bool)
    normals: List[Optional[np.ndarray]] = []
    reasons: List[str] = []
    for i in range(len(table)):
        passed, p_tf, reason = results[row_job[i]]
        verdicts[i] = passed
        reasons.append(reason)
        if p_tf is None or not passed:
            normals.append(None)
            continue
        normal = _row_normal(table, i, np.asarray(p_tf, dtype=float), table.with_direction)
        norm = float(np.linalg.norm(normal))
        normals.append(normal / norm if norm > 1e-12 else None)
    return verdicts, normals, reasons


# ************************************************************************************************************
#                                           Dominance & Ordering
# ************************************************************************************************************


def dominance_filter(endpoints: np.ndarray, normals: List[Optional[np.ndarray]], oracle_points: np.ndarray,
                     eps_dom: float, radius: float, kappa_max: float = 1.0) -> np.ndarray:
    """
    Keep-mask of boundary points: a point is dominated when an oracle sample o within radius
    satisfies <o - x, n> > eps_dom + kappa_max |o - x|^2. Points without a normal are kept.
    """
    keep = np.ones(len(endpoints), dtype=bool)
    if not len(oracle_points) or not len(endpoints):
        return keep
    tree = cKDTree(oracle_points)
    neighbours = tree.query_ball_point(endpoints, r=radius)
    for i, found in enumerate(neighbours):
        if normals[i] is None or not found:
            continue
        offsets = oracle_points[found] - endpoints[i]
        gain = offsets @ normals[i] - kappa_max * np.einsum("ij,ij->i", offsets, offsets)
        keep[i] = not bool(np.any(gain > eps_dom))
    return keep


def _walk_key(point: BoundaryPoint) -> Tuple[int, float]:
    label = point.params["template"]
    first = point.params["lengths"][0]
    order = _WALK_ORDER.get(label, len(_WALK_ORDER))
    return order, first if order < 2 else -first


# ************************************************************************************************************
#                                           Boundary
# ************************************************************************************************************


def build_boundary(mode: Mode, grid: CandidateGrid, validation: Optional[OracleSettings] = None,
                   keep_unverified: bool = True, oracle: Optional[OracleCloud] = None,
                   step: float = screening_step, tol: Optional[float] = None, adjoint: str = "tangent",
                   jobs: Optional[int] = None, base: Optional[Config3] = None, progress: bool = False) -> BoundaryCloud:
    """
    Builds the sampled boundary of the reachable set at grid.t_f.
    :param mode: problem mode
    :param grid: candidate grid
    :param validation: oracle and filter settings; None skips the dominance filter
    :param keep_unverified: keep candidates whose screening failed, marked pmp_verdict False; False drops them
    :param oracle: precomputed oracle for the dominance filter (drawn from validation when None)
    :param step: screening sample spacing
    :param tol: screening tolerance (default by path content)
    :param adjoint: 3D adjoint variant
    :param jobs: worker processes
    :param base: 3D start configuration
    :param progress: progress bars
    :return: the BoundaryCloud
    """
    mode = Mode.parse(mode)
    table = candidate_table(grid, mode.with_direction, mode.dim, base)
    base = table.base if mode.dim == 3 else Config3(np.zeros(3), np.array([1.0, 0.0, 0.0]))
    verdicts, normals, reasons = screen_table(table, step, tol, adjoint, jobs, progress)
    endpoints = table.endpoints
    keep = verdicts.copy() if not keep_unverified else np.ones(len(table), dtype=bool)
    metadata: Dict[str, Any] = {
        "mode": mode.value,
        "grid": grid.to_dict(),
        "enumerated": table.metadata.get("enumerated", len(table)),
        "deduplicated": table.metadata.get("deduplicated", 0),
        "dropped_singular": table.metadata.get("dropped_singular", 0),
        "screened": len(table),
        "screening_failed": int((~verdicts).sum()),
        "keep_unverified": keep_unverified,
        "h_grid_heuristic": bool(table.metadata.get("h_grid_heuristic", False)),
        "dominance_filter_empirical": True,
        "dominated": 0,
    }
    if not verdicts.all():
        failures: Dict[str, int] = {}
        for i in np.flatnonzero(~verdicts):
            failures[reasons[i] or "unknown"] = failures.get(reasons[i] or "unknown", 0) + 1
        metadata["screening_failures"] = failures

    if validation is not None or oracle is not None:
        validation = OracleSettings() if validation is None else validation
        if oracle is None:
            oracle = mc_oracle(mode, grid.t_f, validation.n_samples, validation.n_pieces, validation.seed,
                               grid.kappa_max, jobs, base=base if mode.dim == 3 else None, progress=progress)
        _check_oracle(mode, grid.t_f, oracle)
        eps_dom = validation.eps_dom_factor * grid.t_f
        radius = validation.eps_in_factor * grid.t_f
        survivors = np.flatnonzero(keep)
        undominated = dominance_filter(endpoints[survivors], [normals[i] for i in survivors], oracle.points,
                                       eps_dom, radius, grid.kappa_max)
        keep[survivors[~undominated]] = False
        metadata.update({"dominated": int((~undominated).sum()), "eps_dom": eps_dom, "dominance_radius": radius,
                         "oracle": oracle.metadata()})
    else:
        metadata["dominance_filter"] = "skipped"

    points = []
    for i in np.flatnonzero(keep):
        candidate = table.candidate(int(i))
        points.append(BoundaryPoint(candidate.endpoint, candidate.path, candidate.family, bool(verdicts[i]),
                                    normals[i], None, candidate.params))
    if mode is Mode.PLANAR_NODIR:
        points.sort(key=_walk_key)
    metadata["kept"] = len(points)

    if mode.with_direction:
        seed = 0 if validation is None else validation.seed
        directions = sample_directions(mode, support_probe_directions, seed)
        probes = support_sweep(mode, directions, table=table, refine=True, progress=progress)
        metadata["support_directions"] = directions.tolist()
        metadata["support_values"] = [probe.value for probe in probes]

    logger.info(f"{mode.value} boundary at t_f={grid.t_f:g}: kept {len(points)} of {len(table)} candidates "
                f"({metadata['screening_failed']} failed screening, {metadata['dominated']} dominated)")
    return BoundaryCloud(points, grid.t_f, mode, grid.kappa_max, np.array(base.r), np.array(base.e), metadata)


def _check_oracle(mode: Mode, t_f: float, oracle: OracleCloud) -> None:
    if oracle.mode is not mode:
        raise InvalidInput(f"oracle mode {oracle.mode.value} does not match {mode.value}")
    if abs(oracle.t_f - t_f) > 1e-12 * max(1.0, t_f):
        raise InvalidInput(f"oracle t_f={oracle.t_f} does not match t_f={t_f}")


def outside_mask(boundary: BoundaryCloud, points: np.ndarray, eps: float) -> np.ndarray:
    """Points of endpoint space outside the eps-band of the region bounded by the cloud."""
    points = np.asarray(points, dtype=float).reshape(-1, boundary.mode.endpoint_size)
    mode = boundary.mode
    if not mode.with_direction:
        planar = points if mode.dim == 2 else profile_coordinates(points, boundary.origin, boundary.axis)
        return ~region_contains(boundary.loops, planar, eps)
    directions = np.asarray(boundary.metadata.get("support_directions", []), dtype=float)
    if not len(directions):
        raise InvalidInput("boundary carries no support directions for containment")
    values = np.asarray(boundary.metadata["support_values"], dtype=float)
    slack = eps * np.linalg.norm(directions, axis=1)
    return np.any(points @ directions.T > values + slack, axis=1)


def containment_check(boundary: BoundaryCloud, oracle: OracleCloud, eps: Optional[float] = None) -> float:
    """
    Fraction of oracle samples outside the eps-band of the region bounded by the cloud.
    :param boundary: the sampled boundary
    :param oracle: oracle of the same mode and budget
    :param eps: band width (default eps_in_factor * t_f)
    :return: fraction in [0, 1]; 0 for an empty oracle
    """
    _check_oracle(boundary.mode, boundary.t_f, oracle)
    if not len(oracle):
        return 0.0
    if eps is None:
        eps = OracleSettings().eps_in_factor * boundary.t_f
    outside = outside_mask(boundary, oracle.points, eps)
    fraction = float(outside.mean())
    logger.info(f"{boundary.mode.value} containment: {int(outside.sum())} of {len(oracle)} samples outside "
                f"(eps={eps:.3g})")
    return fraction
