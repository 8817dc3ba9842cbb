"""
Costate screening of candidate paths.

A candidate is kept on the boundary when some nontrivial terminal costate makes it an
extremal. The costate is linear in p(t_f), so the switching structure of the candidate turns
into linear conditions on p(t_f):

- straight samples: the switching function vanishes (equality) and p.f >= 0 (inequality);
- circular and helicoidal samples: the switching function points along the used curvature
  (equality on the out-of-plane part, inequality on the in-plane part);
- switches between two circular arcs: the switching function vanishes at the switch.

Equalities are solved through their null space, inequalities by linear programs. Each
feasible direction is verified with the pointwise-maximum and constancy checks until one
passes.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from reachset.config import screening_max_attempts, screening_null_rcond, screening_step
from reachset.geometry import PathSamples, PathSpec, reference_normal, sample_path
from reachset.pmp.conditions import check_extremal, default_tolerance, junction_mask
from reachset.pmp.costate import CostateTraj, costate_transition
from reachset.pmp.report import PmpReport


@dataclass
class ScreeningResult:
    """
    Attributes:
        passed: a verified costate exists
        p_tf: unit terminal costate (None when none was found)
        report: verification report of the found costate
        reason: why screening failed
    """
    passed: bool
    p_tf: Optional[np.ndarray] = None
    report: Optional[PmpReport] = None
    reason: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "p_tf": None if self.p_tf is None else self.p_tf.tolist(),
            "reason": self.reason,
            "report": None if self.report is None else self.report.to_dict(),
        }


def unknown_basis(path: PathSpec, with_direction: bool) -> np.ndarray:
    """
    Columns spanning the admissible terminal costates: the direction block is zero when the
    terminal direction is free, and in 3D it is restricted to the tangent plane of e(t_f).
    """
    if path.dim == 2:
        return np.eye(3) if with_direction else np.eye(3)[:, 0:2]
    basis = np.zeros((6, 5 if with_direction else 3))
    basis[0:3, 0:3] = np.eye(3)
    if with_direction:
        e_f = path.endpoint().e
        n1 = reference_normal(e_f)
        basis[3:6, 3] = n1
        basis[3:6, 4] = np.cross(e_f, n1)
    return basis


def _unit_rows(rows: List[np.ndarray]) -> np.ndarray:
    if not rows:
        return np.zeros((0, 0))
    matrix = np.vstack(rows)
    norms = np.linalg.norm(matrix, axis=1)
    matrix = matrix[norms > 1e-12]
    return matrix / np.linalg.norm(matrix, axis=1, keepdims=True)


def feasible_directions(inequalities: np.ndarray, rcond: float = screening_null_rcond) -> Iterator[np.ndarray]:
    """
    Nonzero y with inequalities @ y >= 0, most interior first: the max-slack LP solution,
    the normalized LP solution, then every signed null-space direction and unit axis that
    satisfies the inequalities.
    """
    rows, size = inequalities.shape
    if rows == 0:
        yield from np.eye(size)
        return
    for y in _lp_directions(inequalities):
        yield y
    kernel = null_space(inequalities, rcond=rcond)
    for y in np.vstack([kernel.T, -kernel.T, np.eye(size), -np.eye(size)]):
        if np.all(inequalities @ y >= -rcond):
            yield y


def feasible_direction(inequalities: np.ndarray, rcond: float = screening_null_rcond) -> Optional[np.ndarray]:
    """
    A nonzero y with inequalities @ y >= 0, preferring the most interior one.
    :return: y or None when only y = 0 is feasible
    """
    return next(feasible_directions(inequalities, rcond), None)


def _lp_directions(inequalities: np.ndarray) -> Iterator[np.ndarray]:
    rows, size = inequalities.shape
    # maximize the smallest slack t subject to G y >= t, |y| <= 1
    objective = np.zeros(size + 1)
    objective[-1] = -1.0
    result = linprog(objective, A_ub=np.hstack([-inequalities, np.ones((rows, 1))]), b_ub=np.zeros(rows),
                     bounds=[(-1.0, 1.0)] * size + [(0.0, 1.0)], method="highs")
    if result.status == 0 and -result.fun > 1e-12:
        yield result.x[:size]
    # some rows are active for every solution: G y >= 0 with a normalization
    result = linprog(np.zeros(size), A_ub=-inequalities, b_ub=np.zeros(rows),
                     A_eq=inequalities.sum(axis=0)[None, :], b_eq=np.ones(1),
                     bounds=[(None, None)] * size, method="highs")
    if result.status == 0 and np.any(result.x):
        yield result.x


def switch_rows(samples: PathSamples, maps: np.ndarray, dim: int) -> List[np.ndarray]:
    """
    Equalities at the switch between two circular arcs of different controls: the maximizing
    control is only ambiguous where the switching function vanishes.
    """
    rows: List[np.ndarray] = []
    for k in np.flatnonzero(samples.boundary[:-1]):
        if samples.segment_index[k + 1] == samples.segment_index[k]:
            continue
        before, after = np.atleast_1d(samples.controls[k]), np.atleast_1d(samples.controls[k + 1])
        if not np.any(before) or not np.any(after) or np.allclose(before, after):
            continue
        if dim == 2:
            rows.append(maps[k, 2])
        else:
            p_e = maps[k, 3:6]
            rows.extend([samples.normals[k] @ p_e, samples.binormals[k] @ p_e])
    return rows


def screen_costate(path: PathSpec, with_direction: bool, step: float = screening_step, tol: Optional[float] = None,
                   adjoint: str = "tangent", control_grid_resolution: Optional[int] = None) -> ScreeningResult:
    """
    Searches a terminal costate for which the path is an extremal.
    :param path: the candidate
    :param with_direction: terminal direction relevant (full-state transversality) or not
    :param step: sample spacing of the conditions
    :param tol: verification tolerance (default by path content)
    :param adjoint: 3D adjoint variant
    :param control_grid_resolution: control grid of the verification
    :return: a ScreeningResult; p_tf is the unit outward normal in endpoint space when passed
    """
    tol = default_tolerance(path) if tol is None else tol
    step = min(step, max(path.total_length, 1e-9) / 4.0)
    samples = sample_path(path, step, even=True)
    transition = costate_transition(samples, path.dim, "closed-form", adjoint)
    basis = unknown_basis(path, with_direction)
    maps = transition @ basis
    keep = ~junction_mask(samples)
    equalities: List[np.ndarray] = []
    inequalities: List[np.ndarray] = []
    if path.dim == 2:
        theta = samples.states[:, 2]
        for k in np.flatnonzero(keep):
            switching = maps[k, 2]
            if samples.controls[k] == 0.0:
                equalities.append(switching)
                inequalities.append(np.cos(theta[k]) * maps[k, 0] + np.sin(theta[k]) * maps[k, 1])
            else:
                inequalities.append(np.sign(samples.controls[k]) * switching)
    else:
        e = samples.states[:, 3:6]
        for k in np.flatnonzero(keep):
            p_e = maps[k, 3:6]
            binormal_row = samples.binormals[k] @ p_e
            if not np.any(samples.controls[k]):
                equalities.extend([samples.normals[k] @ p_e, binormal_row])
                inequalities.append(e[k] @ maps[k, 0:3])
            else:
                equalities.append(binormal_row)
                inequalities.append(samples.normals[k] @ p_e)
    equalities.extend(switch_rows(samples, maps, path.dim))

    equality_matrix = _unit_rows(equalities)
    kernel = null_space(equality_matrix, rcond=screening_null_rcond) if len(equality_matrix) else np.eye(basis.shape[1])
    if kernel.shape[1] == 0:
        return ScreeningResult(False, reason="no costate satisfies the switching equalities")
    inequality_matrix = _unit_rows(inequalities)
    reduced = inequality_matrix @ kernel if len(inequality_matrix) else np.zeros((0, kernel.shape[1]))
    metadata = {"null_dimension": int(kernel.shape[1])}
    tried: List[np.ndarray] = []
    first: Optional[ScreeningResult] = None
    for y in feasible_directions(reduced):
        p_tf = basis @ (kernel @ y)
        norm = np.linalg.norm(p_tf)
        if norm < 1e-12 or any(np.allclose(p_tf / norm, q, atol=1e-9) for q in tried):
            continue
        p_tf = p_tf / norm
        tried.append(p_tf)
        costate = CostateTraj(samples.t, transition @ p_tf, 0.0, 0.0, samples, adjoint)
        report = check_extremal(path, costate, tol=tol, control_grid_resolution=control_grid_resolution)
        if report.valid:
            return ScreeningResult(True, p_tf, report, "", {**metadata, "attempts": len(tried)})
        if first is None:
            first = ScreeningResult(False, p_tf, report, "; ".join(issue.code for issue in report.issues), metadata)
        if len(tried) >= screening_max_attempts:
            break
    if first is None:
        return ScreeningResult(False, reason="switching inequalities admit only the zero costate")
    first.metadata["attempts"] = len(tried)
    return first
