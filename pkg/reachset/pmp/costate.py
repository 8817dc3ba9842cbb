"""
Costate trajectories of the curvature-bounded systems.

The adjoint equations are linear in the costate, so every backward integration is expressed
as a transition matrix T(t) with p(t) = T(t) p(t_f); screening solves for p(t_f) directly on
these matrices.

2D: p_x, p_y constant, p_theta' = p_x sin(theta) - p_y cos(theta), so that
    p_theta(t) = p_theta(t_f) - p_x (y(t_f) - y(t)) + p_y (x(t_f) - x(t)).
3D, adjoint="ambient": p_r' = 0, p_e' = -p_r, i.e. p_e(t) = p_e(t_f) + p_r (t_f - t).
3D, adjoint="tangent": adjoint of the sphere-preserving extension f = (e, u - (e.u) e),
    p_r' = 0, p_e' = -p_r + (p_e.e) u, which keeps H constant along circular and helicoidal
    extremals.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from reachset.config import nontriviality_tolerance
from reachset.exceptions import InvalidInput
from reachset.geometry import PathSamples, PathSpec, default_step, sample_path
from reachset.pmp.dynamics import dynamics_for_state

METHODS = ("closed-form", "rk4")
ADJOINTS = ("tangent", "ambient")


@dataclass
class CostateTraj:
    """
    Costate samples along a path.

    Attributes:
        t: sample times, aligned with path_samples
        p: (K, n) costate vectors
        p0: multiplier of the running cost (>= 0)
        phi: running cost, < 0 minimum time, > 0 maximum time, 0 for endpoint optimization
        path_samples: the state/control samples the costate was integrated along
        adjoint: 3D adjoint variant
    """
    t: np.ndarray
    p: np.ndarray
    p0: float = 0.0
    phi: float = 0.0
    path_samples: Optional[PathSamples] = None
    adjoint: str = "tangent"

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if self.p.shape[0] != len(self.t):
            raise InvalidInput(f"costate has {self.p.shape[0]} samples for {len(self.t)} times")
        if not (np.all(np.isfinite(self.p)) and np.isfinite(self.p0) and np.isfinite(self.phi)):
            raise InvalidInput("costate has non-finite values")
        if self.p0 < -nontriviality_tolerance:
            raise InvalidInput(f"p0 must be >= 0, got {self.p0}")
        self.p0 = max(float(self.p0), 0.0)
        self.phi = float(self.phi)
        if np.max(np.abs(self.p)) <= nontriviality_tolerance and self.p0 <= nontriviality_tolerance:
            raise InvalidInput("trivial costate: p vanishes and p0 = 0")

    @property
    def samples(self) -> List[Tuple[float, np.ndarray]]:
        return list(zip(self.t.tolist(), self.p))

    @property
    def p_tf(self) -> np.ndarray:
        return self.p[-1].copy()

    def retag(self, p0: float, phi: float) -> "CostateTraj":
        """Same costate with another running-cost term."""
        return CostateTraj(self.t, self.p, p0, phi, self.path_samples, self.adjoint)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p0": self.p0,
            "phi": self.phi,
            "adjoint": self.adjoint,
            "p_initial": self.p[0].tolist(),
            "p_final": self.p[-1].tolist(),
            "samples": len(self.t),
        }


def hamiltonian(p: Any, x: Any, u: Any, p0: float = 0.0, phi: float = 0.0, kappa_max: float = 1.0) -> float:
    """
    H(p0, p, x, u) = p.f(x, u) + p0 phi.
    :param p: costate, size 3 (2D) or 6 (3D)
    :param x: state (x, y, theta) or (r, e)
    :param u: scalar curvature (2D) or curvature vector (3D)
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    dynamics = dynamics_for_state(x.size, kappa_max)
    if p.size != x.size:
        raise InvalidInput(f"costate of size {p.size} does not match state of size {x.size}")
    control_size = 1 if dynamics.dim == 2 else 3
    if u.size != control_size:
        raise InvalidInput(f"control must have {control_size} components, got {u.size}")
    controls = u if dynamics.dim == 2 else u[None, :]
    return float(dynamics.hamiltonian(p[None, :], x[None, :], controls, p0, phi)[0])


# ************************************************************************************************************
#                                           Transition Matrices
# ************************************************************************************************************


def _blocks(samples: PathSamples) -> List[Tuple[int, int]]:
    """[start, end) index ranges of the per-segment sample blocks."""
    if len(samples) == 0:
        return []
    cuts = np.flatnonzero(np.diff(samples.segment_index) != 0) + 1
    edges = np.concatenate([[0], cuts, [len(samples)]])
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def backward_integral(samples: PathSamples, values: np.ndarray) -> np.ndarray:
    """
    integral from t_k to t_f of a sampled function, Simpson's rule over node pairs of each
    segment block (odd nodes use the quadratic through the pair).
    :param samples: path samples with an even number of intervals per segment
    :param values: (K, ...) function values at the samples
    :return: (K, ...) backward integrals
    """
    values = np.asarray(values, dtype=float)
    out = np.zeros_like(values)
    carry = np.zeros(values.shape[1:])
    for start, end in reversed(_blocks(samples)):
        g = values[start:end]
        count = end - start
        if count < 3:
            if count == 2:
                width = samples.t[end - 1] - samples.t[start]
                out[start] = carry + 0.5 * width * (g[0] + g[1])
                out[end - 1] = carry
                carry = out[start]
            else:
                out[start] = carry
            continue
        dt = (samples.t[end - 1] - samples.t[start]) / (count - 1)
        g0, g1, g2 = g[0:-2:2], g[1:-1:2], g[2::2]
        pairs = dt / 3.0 * (g0 + 4.0 * g1 + g2)
        upper = dt / 12.0 * (-g0 + 8.0 * g1 + 5.0 * g2)
        tail = np.cumsum(pairs[::-1], axis=0)[::-1]
        block = np.empty_like(g)
        block[0:-1:2] = carry + tail
        block[1::2] = carry + (tail - pairs) + upper
        block[-1] = carry
        out[start:end] = block
        carry = block[0]
    return out


def _planar_transition(samples: PathSamples, method: str) -> np.ndarray:
    states = samples.states
    count = len(states)
    transition = np.zeros((count, 3, 3))
    transition[:, 0, 0] = 1.0
    transition[:, 1, 1] = 1.0
    transition[:, 2, 2] = 1.0
    if method == "closed-form":
        transition[:, 2, 0] = -(states[-1, 1] - states[:, 1])
        transition[:, 2, 1] = states[-1, 0] - states[:, 0]
    else:
        integrals = backward_integral(samples, np.column_stack([np.sin(states[:, 2]), np.cos(states[:, 2])]))
        transition[:, 2, 0] = -integrals[:, 0]
        transition[:, 2, 1] = integrals[:, 1]
    return transition


def _ambient_transition(samples: PathSamples, method: str) -> np.ndarray:
    count = len(samples)
    if method == "closed-form":
        remaining = samples.t[-1] - samples.t
    else:
        remaining = backward_integral(samples, np.ones(count))
    transition = np.zeros((count, 6, 6))
    transition[:, 0:3, 0:3] = np.eye(3)
    transition[:, 3:6, 3:6] = np.eye(3)
    transition[:, 3:6, 0:3] = remaining[:, None, None] * np.eye(3)
    return transition


def _tangent_transition(samples: PathSamples) -> np.ndarray:
    count = len(samples)
    e = samples.states[:, 3:6]
    u = samples.controls
    p_r = np.hstack([np.eye(3), np.zeros((3, 3))])

    def rate(p_e: np.ndarray, k: int) -> np.ndarray:
        return -p_r + np.outer(u[k], e[k] @ p_e)

    p_e_all = np.zeros((count, 3, 6))
    p_e = np.hstack([np.zeros((3, 3)), np.eye(3)])
    for start, end in reversed(_blocks(samples)):
        p_e_all[end - 1] = p_e
        if end - start < 2:
            continue
        dt = (samples.t[end - 1] - samples.t[start]) / (end - start - 1)
        k = end - 1
        while k - 2 >= start:
            # one backward RK4 step of 2 dt over nodes k, k-1, k-2
            k1 = rate(p_e, k)
            k2 = rate(p_e - dt * k1, k - 1)
            k3 = rate(p_e - dt * k2, k - 1)
            k4 = rate(p_e - 2.0 * dt * k3, k - 2)
            # Heun half step for the odd node
            p_e_all[k - 1] = p_e - 0.5 * dt * (k1 + k2)
            p_e = p_e - (dt / 3.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            p_e_all[k - 2] = p_e
            k -= 2
        if k - 1 >= start:
            k1 = rate(p_e, k)
            k2 = rate(p_e - dt * k1, k - 1)
            p_e = p_e - 0.5 * dt * (k1 + k2)
            p_e_all[k - 1] = p_e
    transition = np.zeros((count, 6, 6))
    transition[:, 0:3, :] = p_r
    transition[:, 3:6, :] = p_e_all
    return transition


def costate_transition(samples: PathSamples, dim: int, method: str = "closed-form",
                       adjoint: str = "tangent") -> np.ndarray:
    """
    Transition matrices T_k with p(t_k) = T_k p(t_f).
    :param samples: path samples (even number of intervals per segment)
    :param dim: 2 or 3
    :param method: "closed-form" or "rk4"; the tangent 3D adjoint is always integrated
    :param adjoint: "tangent" or "ambient" (3D only)
    :return: (K, n, n)
    """
    if method not in METHODS:
        raise InvalidInput(f"unknown costate method {method!r}, expected one of {METHODS}")
    if adjoint not in ADJOINTS:
        raise InvalidInput(f"unknown adjoint {adjoint!r}, expected one of {ADJOINTS}")
    if dim == 2:
        return _planar_transition(samples, method)
    if adjoint == "ambient":
        return _ambient_transition(samples, method)
    return _tangent_transition(samples)


def integrate_costate(path: PathSpec, p_tf: Any, p0: float = 0.0, phi: float = 0.0, step: Optional[float] = None,
                      method: str = "closed-form", adjoint: str = "tangent") -> CostateTraj:
    """
    Integrates the adjoint system backward from t_f.
    :param path: the state trajectory
    :param p_tf: terminal costate, size 3 (2D) or 6 (3D, ambient coordinates (p_r, p_e))
    :param p0: running-cost multiplier
    :param phi: running cost
    :param step: sample spacing (default min(1e-3, length / 100))
    :param method: "closed-form" or "rk4"
    :param adjoint: 3D adjoint variant, "tangent" or "ambient"
    :return: the CostateTraj, carrying the path samples it was integrated along
    """
    size = 3 if path.dim == 2 else 6
    p_tf = np.asarray(p_tf, dtype=float).reshape(-1)
    if p_tf.size != size:
        raise InvalidInput(f"terminal costate must have {size} components, got {p_tf.size}")
    if not np.all(np.isfinite(p_tf)):
        raise InvalidInput("terminal costate has non-finite components")
    if np.max(np.abs(p_tf)) <= nontriviality_tolerance and p0 <= nontriviality_tolerance:
        raise InvalidInput("trivial costate: p(t_f) = 0 and p0 = 0")
    step = default_step(path.total_length) if step is None else step
    if not np.isfinite(step) or step <= 0.0:
        raise InvalidInput(f"step must be > 0, got {step}")
    samples = sample_path(path, step, even=True)
    transition = costate_transition(samples, path.dim, method, adjoint)
    return CostateTraj(samples.t, transition @ p_tf, p0, phi, samples, adjoint)
