"""
Point clouds of the reachability module: sampled boundaries and Monte Carlo oracles.
"""
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from reachset.config import default_oracle_pieces, default_oracle_samples, eps_dom_factor, eps_in_factor
from reachset.exceptions import InvalidInput
from reachset.families import FamilyKind
from reachset.geometry import PathSpec, plane_normal

_MIRROR = str.maketrans("LR", "RL")


class Mode(Enum):
    """Dimension and terminal-direction relevance of a reachability problem."""
    PLANAR_DIR = "2d-dir"
    PLANAR_NODIR = "2d-nodir"
    SPATIAL_DIR = "3d-dir"
    SPATIAL_NODIR = "3d-nodir"

    @classmethod
    def parse(cls, value: Any) -> "Mode":
        if isinstance(value, Mode):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidInput(f"unknown mode {value!r}, expected one of {[m.value for m in cls]}") from None

    @property
    def dim(self) -> int:
        return 2 if self.value.startswith("2d") else 3

    @property
    def with_direction(self) -> bool:
        return self.value.endswith("-dir")

    @property
    def columns(self) -> Tuple[str, ...]:
        """Endpoint-space coordinate names; the planar heading is unwrapped."""
        return {
            Mode.PLANAR_NODIR: ("x", "y"),
            Mode.PLANAR_DIR: ("x", "y", "theta"),
            Mode.SPATIAL_NODIR: ("x", "y", "z"),
            Mode.SPATIAL_DIR: ("x", "y", "z", "ex", "ey", "ez"),
        }[self]

    @property
    def endpoint_size(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class OracleSettings:
    """Monte Carlo oracle and filter settings of a boundary build."""
    n_samples: int = default_oracle_samples
    n_pieces: int = default_oracle_pieces
    seed: int = 0
    eps_dom_factor: float = eps_dom_factor
    eps_in_factor: float = eps_in_factor

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_samples": self.n_samples,
            "n_pieces": self.n_pieces,
            "seed": self.seed,
            "eps_dom_factor": self.eps_dom_factor,
            "eps_in_factor": self.eps_in_factor,
        }


@dataclass
class BoundaryPoint:
    """
    Attributes:
        endpoint: endpoint-space coordinates (position only in nodir modes)
        generator: the path reaching it, of total length t_f
        family: family and nonzero-segment tag
        pmp_verdict: a screened costate verifies the generator as an extremal
        normal: unit outward direction in endpoint space from the screened costate
        support_direction: direction c when the point was produced by a support query
        params: template label, lengths, plane angle and torsion parameters
    """
    endpoint: np.ndarray
    generator: PathSpec
    family: FamilyKind
    pmp_verdict: bool
    normal: Optional[np.ndarray] = None
    support_direction: Optional[np.ndarray] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def gen_params_json(self) -> str:
        return json.dumps(self.generator.to_dict(), sort_keys=True)


@dataclass
class BoundaryCloud:
    """
    Sampled boundary of the reachable set at budget t_f.

    Attributes:
        points: boundary points, ordered along the closed curve in 2D-nodir and by candidate stream otherwise
        t_f: arc-length budget
        mode: problem mode
        kappa_max: curvature bound
        origin: start position of every generator
        axis: initial tangent of every generator
        metadata: grids, seeds, counts and flags
    """
    points: List[BoundaryPoint]
    t_f: float
    mode: Mode
    kappa_max: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def endpoints(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, self.mode.endpoint_size))
        return np.vstack([point.endpoint for point in self.points])

    @property
    def loops(self) -> List[np.ndarray]:
        """
        Closed planar curves through the verified position-only points, walked LS ascending,
        then RL ascending or LR descending, then RS descending. In 3D the points are taken
        in their own plane as (axial, in-plane radial) about the start.
        """
        walks: Dict[str, Dict[float, np.ndarray]] = {label: {} for label in ("LS", "RL", "RS", "LR")}
        for point in self.points:
            label = point.params.get("template")
            if not point.pmp_verdict or label not in walks:
                continue
            first = round(float(point.params["lengths"][0]), 12)
            profile = self.profile_point(point)
            walks[label].setdefault(first, profile)
            if self.mode.dim == 3:
                # the mirrored template is the same path in the opposite plane
                walks[label.translate(_MIRROR)].setdefault(first, profile * np.array([1.0, -1.0]))

        def walk(label: str, descending: bool) -> List[np.ndarray]:
            return [walks[label][first] for first in sorted(walks[label], reverse=descending)]

        ls, rs = walk("LS", False), walk("RS", True)
        loops = []
        for middle in (walk("RL", False), walk("LR", True)):
            loop = ls + middle + rs
            if len(loop) >= 3:
                loops.append(np.vstack(loop))
        return loops

    def profile_point(self, point: BoundaryPoint) -> np.ndarray:
        """Planar coordinates of a point: (x, y) in 2D, (axial, in-plane radial) about the start in 3D."""
        if self.mode.dim == 2:
            return np.asarray(point.endpoint[0:2], dtype=float)
        relative = np.asarray(point.endpoint[0:3], dtype=float) - self.origin
        normal = plane_normal(self.axis, float(point.params.get("psi", 0.0)))
        return np.array([relative @ self.axis, relative @ normal])

    def scaled(self, factor: float) -> "BoundaryCloud":
        """The cloud shrunk or grown about the start position (endpoints and support values)."""
        offset = np.zeros(self.mode.endpoint_size)
        if self.mode.dim == 3:
            offset[0:3] = self.origin
        points = [
            BoundaryPoint(offset + factor * (p.endpoint - offset), p.generator, p.family, p.pmp_verdict, p.normal,
                          p.support_direction, p.params)
            for p in self.points
        ]
        metadata = dict(self.metadata)
        if "support_values" in metadata:
            directions = np.asarray(metadata["support_directions"])
            values = np.asarray(metadata["support_values"])
            metadata["support_values"] = (directions @ offset + factor * (values - directions @ offset)).tolist()
        return BoundaryCloud(points, self.t_f, self.mode, self.kappa_max, self.origin, self.axis, metadata)

    def to_frame(self) -> pd.DataFrame:
        endpoints = self.endpoints
        frame = pd.DataFrame({name: endpoints[:, j] for j, name in enumerate(self.mode.columns)})
        frame["family"] = [str(point.family) for point in self.points]
        frame["pmp_pass"] = [bool(point.pmp_verdict) for point in self.points]
        frame["gen_params_json"] = [point.gen_params_json() for point in self.points]
        return frame


@dataclass
class OracleCloud:
    """
    Endpoints of random admissible piecewise-constant controls.

    Attributes:
        points: (n_samples, endpoint_size) endpoint-space coordinates
        t_f: duration of every control
        mode: problem mode
        seed: root seed of the sample streams
        n_samples: number of samples
        n_pieces: constant pieces per control
        kappa_max: curvature bound
        control_model: description of the control distribution
    """
    points: np.ndarray
    t_f: float
    mode: Mode
    seed: int
    n_samples: int
    n_pieces: int
    kappa_max: float = 1.0
    control_model: str = ""

    def __len__(self) -> int:
        return len(self.points)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({name: self.points[:, j] for j, name in enumerate(self.mode.columns)})

    def metadata(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "n_samples": self.n_samples,
            "n_pieces": self.n_pieces,
            "t_f": self.t_f,
            "kappa_max": self.kappa_max,
            "mode": self.mode.value,
            "control_model": self.control_model,
        }
