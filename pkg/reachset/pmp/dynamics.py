"""
Registered control systems.

PlanarDynamics: state (x, y, theta), control u in [-kappa_max, kappa_max],
    f = (cos theta, sin theta, u).
SpatialDynamics: state (r, e) with |e| = 1, control u orthogonal to e with |u| <= kappa_max,
    f = (e, u).

All methods work on arrays of samples: states (K, state_size), costates (K, costate_size),
controls (K,) in 2D and (K, 3) in 3D.
"""
from abc import ABC, abstractmethod
from typing import Dict, Optional, Type

import numpy as np

from reachset.config import (
    control_angles_3d,
    control_grid_2d,
    control_magnitude_fractions_3d,
    default_kappa_max,
)
from reachset.exceptions import InvalidInput
from reachset.geometry import reference_normals


class Dynamics(ABC):
    """Base class of the curvature-bounded systems; H = p.f(x, u) + p0 phi."""
    dim: int = 0
    state_size: int = 0

    def __init__(self, kappa_max: float = default_kappa_max):
        if not np.isfinite(kappa_max) or kappa_max <= 0.0:
            raise InvalidInput(f"kappa_max must be > 0, got {kappa_max}")
        self.kappa_max = float(kappa_max)

    def __repr__(self):
        return f"{type(self).__name__}(kappa_max={self.kappa_max})"

    def check_shapes(self, p: np.ndarray, states: np.ndarray) -> None:
        if p.shape[-1] != self.state_size or states.shape[-1] != self.state_size:
            raise InvalidInput(f"{type(self).__name__} expects costate and state of size {self.state_size}, "
                               f"got {p.shape[-1]} and {states.shape[-1]}")

    @abstractmethod
    def velocity_term(self, p: np.ndarray, states: np.ndarray) -> np.ndarray:
        """The control-free part of p.f."""

    @abstractmethod
    def control_term(self, p: np.ndarray, states: np.ndarray, controls: np.ndarray) -> np.ndarray:
        """The control-dependent part of p.f."""

    @abstractmethod
    def switching(self, p: np.ndarray, states: np.ndarray) -> np.ndarray:
        """dH/du restricted to the admissible control directions, shape (K, control_size)."""

    @abstractmethod
    def grid_max_control_term(self, p: np.ndarray, states: np.ndarray, resolution: Optional[int] = None) -> np.ndarray:
        """max over the sampled control set of the control term, per sample."""

    def hamiltonian(self, p: np.ndarray, states: np.ndarray, controls: np.ndarray, p0: float = 0.0,
                    phi: float = 0.0) -> np.ndarray:
        return self.velocity_term(p, states) + self.control_term(p, states, controls) + p0 * phi

    def max_control_term(self, p: np.ndarray, states: np.ndarray) -> np.ndarray:
        """Analytic maximum kappa_max |dH/du| of the control term."""
        return self.kappa_max * np.linalg.norm(self.switching(p, states), axis=-1)

    def control_norm(self, controls: np.ndarray) -> np.ndarray:
        controls = np.asarray(controls, dtype=float)
        return np.abs(controls) if controls.ndim == 1 else np.linalg.norm(controls, axis=-1)


class PlanarDynamics(Dynamics):
    dim = 2
    state_size = 3

    def velocity_term(self, p, states):
        return p[..., 0] * np.cos(states[..., 2]) + p[..., 1] * np.sin(states[..., 2])

    def control_term(self, p, states, controls):
        return p[..., 2] * controls

    def switching(self, p, states):
        return p[..., 2:3]

    def control_grid(self, resolution: Optional[int] = None) -> np.ndarray:
        return np.linspace(-self.kappa_max, self.kappa_max, resolution or control_grid_2d)

    def grid_max_control_term(self, p, states, resolution=None):
        grid = self.control_grid(resolution)
        return np.max(p[:, 2:3] * grid[None, :], axis=1)


class SpatialDynamics(Dynamics):
    dim = 3
    state_size = 6

    def velocity_term(self, p, states):
        return np.sum(p[..., 0:3] * states[..., 3:6], axis=-1)

    def control_term(self, p, states, controls):
        return np.sum(p[..., 3:6] * controls, axis=-1)

    def switching(self, p, states):
        e = states[..., 3:6]
        p_e = p[..., 3:6]
        return p_e - np.sum(p_e * e, axis=-1, keepdims=True) * e

    def control_grid(self, states: np.ndarray, resolution: Optional[int] = None) -> np.ndarray:
        """(K, G, 3): angles on the tangent circle times magnitudes {0, 1/2, 1} kappa_max."""
        e = states[:, 3:6]
        n1 = reference_normals(e)
        n2 = np.cross(e, n1)
        angles = np.linspace(0.0, 2.0 * np.pi, resolution or control_angles_3d, endpoint=False)
        circle = (np.cos(angles)[None, :, None] * n1[:, None, :] + np.sin(angles)[None, :, None] * n2[:, None, :])
        fractions = np.array(control_magnitude_fractions_3d)
        grid = self.kappa_max * fractions[None, :, None, None] * circle[:, None, :, :]
        return grid.reshape(len(e), -1, 3)

    def grid_max_control_term(self, p, states, resolution=None):
        grid = self.control_grid(states, resolution)
        best = np.max(np.einsum("kgi,ki->kg", grid, p[:, 3:6]), axis=1)
        # the analytic maximizer kappa_max w / |w| joins the grid where the projection is nonzero
        w = self.switching(p, states)
        norm = np.linalg.norm(w, axis=1)
        analytic = np.where(norm > 1e-12, self.kappa_max * norm, -np.inf)
        return np.maximum(best, analytic)

    def analytic_maximizer(self, p: np.ndarray, states: np.ndarray) -> np.ndarray:
        w = self.switching(p, states)
        norm = np.linalg.norm(w, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(norm > 1e-12, self.kappa_max * w / norm, 0.0)


dynamics_registry: Dict[int, Type[Dynamics]] = {
    PlanarDynamics.dim: PlanarDynamics,
    SpatialDynamics.dim: SpatialDynamics,
}


def dynamics_for(dim: int, kappa_max: float = default_kappa_max) -> Dynamics:
    if dim not in dynamics_registry:
        raise InvalidInput(f"no dynamics registered for dimension {dim}")
    return dynamics_registry[dim](kappa_max)


def dynamics_for_state(state_size: int, kappa_max: float = default_kappa_max) -> Dynamics:
    for cls in dynamics_registry.values():
        if cls.state_size == state_size:
            return cls(kappa_max)
    raise InvalidInput(f"no dynamics registered for state size {state_size}")
