"""
PMP condition checks.

Pointwise maximum, Hamiltonian constancy and transversality of a path/costate pair, the
transversality decomposition over a coordinate index set, and the check that an
endpoint-optimization extremal is, re-tagged, a minimum- or maximum-time extremal.

Samples at interior segment junctions are ignored by the pointwise checks: the conditions
hold for almost every t.
"""
from typing import Any, Optional, Sequence, Tuple

import numpy as np

from reachset.config import closed_form_tolerance, integrated_tolerance, nontriviality_tolerance
from reachset.exceptions import InvalidInput
from reachset.geometry import PathSamples, PathSpec, SegmentKind
from reachset.pmp.costate import CostateTraj, integrate_costate
from reachset.pmp.dynamics import Dynamics, dynamics_for
from reachset.pmp.report import (
    EquivalenceReport,
    IssueSeverity,
    PmpIssue,
    PmpReport,
    TransversalityDecomposition,
)


def default_tolerance(path: PathSpec) -> float:
    """1e-6 for closed-form paths, 1e-4 when a helicoidal segment is integrated."""
    if any(segment.kind is SegmentKind.H and segment.length > 0.0 for segment in path.segments):
        return integrated_tolerance
    return closed_form_tolerance


def junction_mask(samples: PathSamples) -> np.ndarray:
    """True on samples at interior segment junctions."""
    if len(samples) < 2:
        return np.zeros(len(samples), dtype=bool)
    interior = (samples.t > samples.t[0] + 1e-12) & (samples.t < samples.t[-1] - 1e-12)
    return samples.boundary & interior


def _samples_of(costate: CostateTraj) -> PathSamples:
    if costate.path_samples is None:
        raise InvalidInput("costate carries no path samples; build it with integrate_costate")
    return costate.path_samples


def _controls(samples: PathSamples, dynamics: Dynamics, controls: Optional[Any]) -> np.ndarray:
    if controls is None:
        return samples.controls
    controls = np.asarray(controls, dtype=float)
    if controls.shape != samples.controls.shape:
        raise InvalidInput(f"controls of shape {controls.shape} do not match samples {samples.controls.shape}")
    return controls


def check_pointwise_max(path: PathSpec, costate: CostateTraj, control_grid_resolution: Optional[int] = None,
                        tol: float = closed_form_tolerance, controls: Optional[Any] = None) -> PmpReport:
    """
    Checks that the used control maximizes the Hamiltonian over the control set at almost
    every sample, and that singular (straight) arcs satisfy the convexity condition
    p.f >= 0 (turning would otherwise increase the Hamiltonian at second order).
    :param path: the path the costate was integrated along
    :param costate: costate from integrate_costate
    :param control_grid_resolution: 2D grid points / 3D tangent-circle angles (defaults 257 / 64)
    :param tol: tolerance of the verdict
    :param controls: replacement controls per sample (negative controls in tests)
    :return: a PmpReport with the pointwise_max verdict
    """
    samples = _samples_of(costate)
    dynamics = dynamics_for(path.dim, path.kappa_max)
    used = _controls(samples, dynamics, controls)
    keep = ~junction_mask(samples)
    p, states = costate.p, samples.states
    report = PmpReport(tolerance=tol, verdicts={"pointwise_max": True})

    gaps = np.maximum(dynamics.grid_max_control_term(p, states, control_grid_resolution)
                      - dynamics.control_term(p, states, used), 0.0)
    gaps = np.where(keep, gaps, 0.0)
    worst = int(np.argmax(gaps))
    report.max_pointwise_gap = float(gaps[worst])
    if report.max_pointwise_gap > tol:
        report.add_issue(PmpIssue(
            code="POINTWISE_MAX_VIOLATED",
            message=f"used control is suboptimal by {report.max_pointwise_gap:.3e}",
            severity=IssueSeverity.ERROR,
            condition="pointwise_max",
            residual=report.max_pointwise_gap,
            tolerance=tol,
            time=float(samples.t[worst]),
            explanation="another admissible curvature yields a larger Hamiltonian at this instant",
        ))

    norms = dynamics.control_norm(used)
    excess = float(np.max(norms - path.kappa_max, initial=0.0))
    if excess > 1e-9 * max(1.0, path.kappa_max):
        report.add_issue(PmpIssue(
            code="CONTROL_NOT_ADMISSIBLE",
            message=f"control exceeds the curvature bound by {excess:.3e}",
            severity=IssueSeverity.ERROR,
            condition="pointwise_max",
            residual=excess,
            tolerance=0.0,
        ))

    singular = keep & (norms <= 1e-12)
    if np.any(singular):
        violation = np.maximum(-dynamics.velocity_term(p, states), 0.0)
        violation = np.where(singular, violation, 0.0)
        worst = int(np.argmax(violation))
        report.singular_arc_residual = float(violation[worst])
        if report.singular_arc_residual > tol:
            report.add_issue(PmpIssue(
                code="SINGULAR_ARC_CONVEXITY",
                message=f"straight arc with p.f = {-report.singular_arc_residual:.3e} < 0",
                severity=IssueSeverity.ERROR,
                condition="pointwise_max",
                residual=report.singular_arc_residual,
                tolerance=tol,
                time=float(samples.t[worst]),
                explanation="turning off the straight arc increases the Hamiltonian at second order",
            ))
    return report


def hamiltonian_values(path: PathSpec, costate: CostateTraj, controls: Optional[Any] = None) -> np.ndarray:
    """H(t) = p.f + p0 phi at every sample."""
    samples = _samples_of(costate)
    dynamics = dynamics_for(path.dim, path.kappa_max)
    used = _controls(samples, dynamics, controls)
    return dynamics.hamiltonian(costate.p, samples.states, used, costate.p0, costate.phi)


def check_hamiltonian_constancy(path: PathSpec, costate: CostateTraj, tol: float = closed_form_tolerance,
                                controls: Optional[Any] = None) -> float:
    """
    Drift max_t |H(t) - H(0)| of the Hamiltonian along the path; the condition passes iff
    the drift is <= tol.
    """
    values = hamiltonian_values(path, costate, controls)
    return float(np.max(np.abs(values - values[0])))


def constancy_report(path: PathSpec, costate: CostateTraj, tol: float = closed_form_tolerance,
                     controls: Optional[Any] = None) -> PmpReport:
    values = hamiltonian_values(path, costate, controls)
    drift = float(np.max(np.abs(values - values[0])))
    report = PmpReport(hamiltonian_drift=drift, hamiltonian_level=float(values[0]), tolerance=tol,
                       verdicts={"hamiltonian_constancy": True})
    if drift > tol:
        report.add_issue(PmpIssue(
            code="HAMILTONIAN_DRIFT",
            message=f"Hamiltonian drifts by {drift:.3e} from H(0) = {values[0]:.6g}",
            severity=IssueSeverity.ERROR,
            condition="hamiltonian_constancy",
            residual=drift,
            tolerance=tol,
            time=float(costate.t[int(np.argmax(np.abs(values - values[0])))]),
            explanation="the system is autonomous, so the Hamiltonian of an extremal is constant",
        ))
    return report


def check_transversality_reach(p_tf: Any, grad_phi: Any, tol: float = closed_form_tolerance) -> Tuple[float, float]:
    """
    Transversality p(t_f) = p0 grad Phi with p0 >= 0.
    :param p_tf: terminal costate
    :param grad_phi: nonzero gradient of the terminal cost
    :param tol: unused by the computation, kept for the verdict helper
    :return: (residual |p_tf - p0 grad_phi|, p0 = <p_tf, grad_phi> / |grad_phi|^2)
    """
    p_tf = np.asarray(p_tf, dtype=float).reshape(-1)
    grad_phi = np.asarray(grad_phi, dtype=float).reshape(-1)
    if p_tf.shape != grad_phi.shape:
        raise InvalidInput(f"costate of size {p_tf.size} does not match gradient of size {grad_phi.size}")
    norm2 = float(grad_phi @ grad_phi)
    if norm2 == 0.0 or not np.isfinite(norm2):
        raise InvalidInput("transversality needs a nonzero finite gradient")
    p0 = float(p_tf @ grad_phi) / norm2
    residual = float(np.linalg.norm(p_tf - p0 * grad_phi))
    return residual, p0


def transversality_report(p_tf: Any, grad_phi: Any, tol: float = closed_form_tolerance) -> PmpReport:
    residual, p0 = check_transversality_reach(p_tf, grad_phi, tol)
    report = PmpReport(transversality_residual=residual, p0=p0, tolerance=tol, verdicts={"transversality": True})
    if residual > tol:
        report.add_issue(PmpIssue(
            code="TRANSVERSALITY_RESIDUAL",
            message=f"terminal costate is {residual:.3e} away from the gradient line",
            severity=IssueSeverity.ERROR,
            condition="transversality",
            residual=residual,
            tolerance=tol,
        ))
    if p0 < -tol:
        report.add_issue(PmpIssue(
            code="TRANSVERSALITY_SIGN",
            message=f"multiplier p0 = {p0:.6g} is negative",
            severity=IssueSeverity.ERROR,
            condition="transversality",
            residual=-p0,
            tolerance=tol,
            explanation="the terminal costate points against the gradient of the terminal cost",
        ))
    return report


def decompose_transversality(p_tf: Any, index_set: Sequence[int],
                             tol: float = nontriviality_tolerance) -> TransversalityDecomposition:
    """
    Splits p(t_f) into p0 gradPhi_I (supported on I) plus beta on the complement of I.
    :param p_tf: terminal costate
    :param index_set: I, 0-based coordinates, neither empty nor all coordinates
    :param tol: |p_I| at or below which the decomposition is degenerate
    """
    p = np.asarray(p_tf, dtype=float).reshape(-1)
    size = p.size
    index_set = sorted({int(i) for i in index_set})
    if not index_set or len(index_set) == size:
        raise InvalidInput(f"index set must be a nonempty proper subset of {size} coordinates")
    if index_set[0] < 0 or index_set[-1] >= size:
        raise InvalidInput(f"index set {index_set} out of range for {size} coordinates")
    complement = [i for i in range(size) if i not in index_set]
    restricted = p[index_set]
    beta = p[complement].copy()
    norm = float(np.linalg.norm(restricted))
    reconstruction = np.zeros(size)
    reconstruction[complement] = beta
    if norm <= tol:
        residual = float(np.max(np.abs(reconstruction - p)))
        return TransversalityDecomposition(0.0, None, beta, index_set, complement, True, residual)
    grad_phi = np.zeros(size)
    grad_phi[index_set] = restricted / norm
    reconstruction += norm * grad_phi
    residual = float(np.max(np.abs(reconstruction - p)))
    return TransversalityDecomposition(norm, grad_phi, beta, index_set, complement, False, residual)


def check_extremal(path: PathSpec, costate: CostateTraj, grad_phi: Optional[Any] = None,
                   tol: Optional[float] = None, control_grid_resolution: Optional[int] = None,
                   controls: Optional[Any] = None) -> PmpReport:
    """Pointwise maximum, Hamiltonian constancy and, given grad_phi, transversality in one report."""
    tol = default_tolerance(path) if tol is None else tol
    report = check_pointwise_max(path, costate, control_grid_resolution, tol, controls)
    report.merge(constancy_report(path, costate, tol, controls))
    if grad_phi is not None:
        report.merge(transversality_report(costate.p_tf, grad_phi, tol))
    report.metadata.update({
        "dim": path.dim,
        "tag": path.tag,
        "total_length": path.total_length,
        "costate": costate.to_dict(),
    })
    return report


def terminal_costate(path: PathSpec, c: Any) -> np.ndarray:
    """
    Pads a direction of endpoint space to a full terminal costate: position-only directions
    get a zero direction block.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    if not np.all(np.isfinite(c)) or not np.any(c):
        raise InvalidInput("direction must be a finite nonzero vector")
    sizes = (2, 3) if path.dim == 2 else (3, 6)
    if c.size not in sizes:
        raise InvalidInput(f"a {path.dim}D direction must have {sizes[0]} or {sizes[1]} components, got {c.size}")
    return np.pad(c, (0, sizes[1] - c.size))


def classify_branch(p0: float, phi: float) -> str:
    """min_time for p0 phi < 0, max_time for p0 phi > 0, abnormal otherwise."""
    if p0 <= 0.0 or phi == 0.0:
        return "abnormal"
    return "min_time" if phi < 0.0 else "max_time"


def equivalence_check(path: PathSpec, c: Any, tol: Optional[float] = None, step: Optional[float] = None,
                      adjoint: str = "tangent", control_grid_resolution: Optional[int] = None) -> EquivalenceReport:
    """
    Checks a candidate maximizing <c, endpoint> in both forms.

    (a) endpoint optimization with Phi = <c, x>: p(t_f) = c, H = p.f;
    (b) the same costate re-tagged with p0 phi = -H(0) as a free-final-time extremal, which
        must keep H + p0 phi = 0 along the whole path.
    :param path: the candidate
    :param c: direction in endpoint space (position only or full state)
    :param tol: tolerance (default by path content)
    :param step: costate sample spacing
    :param adjoint: 3D adjoint variant
    :param control_grid_resolution: control grid of the pointwise check
    """
    tol = default_tolerance(path) if tol is None else tol
    p_tf = terminal_costate(path, c)
    costate = integrate_costate(path, p_tf, 1.0, 0.0, step, adjoint=adjoint)
    reach = check_extremal(path, costate, p_tf, tol, control_grid_resolution)

    level = reach.hamiltonian_level
    if abs(level) <= tol:
        p0, phi = 0.0, 0.0
    else:
        p0, phi = abs(level), -float(np.sign(level))
    retagged = costate.retag(p0, phi)
    timed = check_pointwise_max(path, retagged, control_grid_resolution, tol)
    timed.merge(constancy_report(path, retagged, tol))
    values = hamiltonian_values(path, retagged)
    max_abs = float(np.max(np.abs(values)))
    timed.verdicts["hamiltonian_zero"] = True
    timed.hamiltonian_level = float(values[0])
    if max_abs > tol:
        timed.add_issue(PmpIssue(
            code="HAMILTONIAN_NOT_ZERO",
            message=f"max |H + p0 phi| = {max_abs:.3e}",
            severity=IssueSeverity.ERROR,
            condition="hamiltonian_zero",
            residual=max_abs,
            tolerance=tol,
            explanation="free final time requires the Hamiltonian including the running cost to vanish",
        ))
    timed.p0 = p0

    round_trip = False
    if timed.valid:
        again = check_extremal(path, retagged.retag(1.0, 0.0), retagged.p_tf, tol, control_grid_resolution)
        round_trip = again.valid

    return EquivalenceReport(
        direction=np.asarray(c, dtype=float).reshape(-1).tolist(),
        reach_report=reach,
        time_optimal_report=timed,
        p0=p0,
        phi=phi,
        branch=classify_branch(p0, phi),
        max_abs_hamiltonian=max_abs,
        round_trip=round_trip,
        tolerance=tol,
        metadata={"tag": path.tag, "dim": path.dim, "adjoint": adjoint},
    )
