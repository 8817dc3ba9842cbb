"""
Geometry core.

State types for unit-speed curvature-bounded curves in the plane (Config2) and in space
(Config3, Frame3), the segment vocabulary (C circular arcs at maximum curvature, S straights,
H helicoidal arcs), closed-form rigid motions for C and S segments and a fixed-step RK4
integrator of the Frenet-Serret equations for everything else.

Arc length equals time throughout (unit speed); kappa_max scales every construction.
"""
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from reachset.config import (
    default_kappa_max,
    default_step_divisions,
    frame_tolerance,
    length_tolerance,
    max_default_step,
    tau_min,
)
from reachset.exceptions import InvalidFrame, InvalidInput, OutOfRange
from reachset.utils.helper_functions import as_vector, normalized, require_finite, wrap_angle

Profile = Union[float, Callable[[np.ndarray], Any]]

_REFERENCE_AXES = (
    np.array([0.0, 1.0, 0.0]),
    np.array([0.0, 0.0, 1.0]),
    np.array([1.0, 0.0, 0.0]),
)


def default_step(length: float) -> float:
    """Default integration step min(1e-3, length / 100)."""
    if length <= 0.0:
        return max_default_step
    return min(max_default_step, length / default_step_divisions)


def step_count(length: float, step: float) -> int:
    """Number of equal steps of size <= step covering length (at least one)."""
    return max(1, int(math.ceil(length / step - 1e-9)))


# ************************************************************************************************************
#                                           State Types
# ************************************************************************************************************


@dataclass(frozen=True)
class Config2:
    """Planar configuration: position (x, y) and heading theta wrapped to (-pi, pi]."""
    x: float
    y: float
    theta: float

    def __post_init__(self):
        require_finite("Config2", self.x, self.y, self.theta)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def heading(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    def to_dict(self) -> Dict[str, float]:
        return {"x": self.x, "y": self.y, "theta": self.theta}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config2":
        return cls(float(data["x"]), float(data["y"]), float(data["theta"]))


@dataclass(frozen=True, eq=False)
class Config3:
    """
    Spatial configuration: position r and unit tangent e.

    The tangent is renormalized on construction; inputs further than 1e-6 from unit length
    are rejected.
    """
    r: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        r = as_vector(self.r, 3, "Config3.r")
        e = as_vector(self.e, 3, "Config3.e")
        norm = float(np.linalg.norm(e))
        if abs(norm - 1.0) > frame_tolerance:
            raise InvalidInput(f"Config3 tangent must be a unit vector, got norm {norm}")
        e = e / norm
        r.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "e", e)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.r, self.e])

    def allclose(self, other: "Config3", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.r, other.r, rtol=0.0, atol=atol)
                    and np.allclose(self.e, other.e, rtol=0.0, atol=atol))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Config3):
            return NotImplemented
        return bool(np.array_equal(self.r, other.r) and np.array_equal(self.e, other.e))

    def __hash__(self) -> int:
        return hash((self.r.tobytes(), self.e.tobytes()))

    def __repr__(self) -> str:
        return f"Config3(r={self.r.tolist()}, e={self.e.tolist()})"

    def to_dict(self) -> Dict[str, List[float]]:
        return {"r": self.r.tolist(), "e": self.e.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config3":
        return cls(np.asarray(data["r"], dtype=float), np.asarray(data["e"], dtype=float))


Config = Union[Config2, Config3]


def orthonormality_error(T: np.ndarray, N: np.ndarray, B: np.ndarray) -> float:
    """Worst deviation of {T, N, B} from a right-handed orthonormal triple."""
    return float(max(
        abs(np.linalg.norm(T) - 1.0),
        abs(np.linalg.norm(N) - 1.0),
        abs(np.linalg.norm(B) - 1.0),
        abs(T @ N),
        abs(T @ B),
        abs(N @ B),
        np.linalg.norm(np.cross(T, N) - B),
    ))


@dataclass(frozen=True, eq=False)
class Frame3:
    """Frenet frame carrier: position r with tangent T, principal normal N and binormal B."""
    r: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        values = {}
        for name in ("r", "T", "N", "B"):
            vector = as_vector(getattr(self, name), 3, f"Frame3.{name}")
            vector.setflags(write=False)
            values[name] = vector
        error = orthonormality_error(values["T"], values["N"], values["B"])
        if error > frame_tolerance:
            raise InvalidFrame(f"frame is not orthonormal right-handed (error {error:.3g})")
        for name, vector in values.items():
            object.__setattr__(self, name, vector)

    @property
    def config(self) -> Config3:
        return Config3(self.r, self.T)

    def rotation_matrix(self) -> np.ndarray:
        """Columns T, N, B: maps canonical frame coordinates to world coordinates."""
        return np.column_stack([self.T, self.N, self.B])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.r, self.T, self.N, self.B])

    @classmethod
    def from_config(cls, c: Config3, psi: float = 0.0) -> "Frame3":
        """Frame whose principal normal is the plane normal at angle psi about c.e."""
        N = plane_normal(c.e, psi)
        return cls(c.r, c.e, N, np.cross(c.e, N))

    @classmethod
    def from_array(cls, state: np.ndarray) -> "Frame3":
        return cls(state[0:3], state[3:6], state[6:9], state[9:12])

    def __repr__(self) -> str:
        return f"Frame3(r={self.r.tolist()}, T={self.T.tolist()})"


def reference_normal(e: Any) -> np.ndarray:
    """
    Reference normal of a tangent: the first of +y, +z, +x with |e.a| < 0.9, projected
    orthogonally to e and normalized.
    """
    e = normalized(e, "tangent")
    for axis in _REFERENCE_AXES:
        dot = float(e @ axis)
        if abs(dot) < 0.9:
            n = axis - dot * e
            return n / np.linalg.norm(n)
    raise InvalidInput(f"no reference axis for tangent {e}")  # pragma: no cover


def reference_normals(E: np.ndarray) -> np.ndarray:
    """Row-wise reference_normal for an (M, 3) array of unit tangents."""
    normals = np.empty_like(E)
    pending = np.ones(len(E), dtype=bool)
    for axis in _REFERENCE_AXES:
        dots = E @ axis
        pick = pending & (np.abs(dots) < 0.9)
        normals[pick] = axis[None, :] - dots[pick, None] * E[pick]
        pending &= ~pick
    return normals / np.linalg.norm(normals, axis=1, keepdims=True)


def plane_normal(e: Any, psi: float) -> np.ndarray:
    """In-plane normal n(psi) = cos(psi) n_ref + sin(psi) (e x n_ref)."""
    e = normalized(e, "tangent")
    n_ref = reference_normal(e)
    return math.cos(psi) * n_ref + math.sin(psi) * np.cross(e, n_ref)


# ************************************************************************************************************
#                                           Segments & Paths
# ************************************************************************************************************


class SegmentKind(Enum):
    """C: circular arc at maximum curvature, S: straight, H: helicoidal arc."""
    C = "C"
    S = "S"
    H = "H"


@dataclass(frozen=True)
class Segment:
    """
    One piece of a path.

    Attributes:
        kind: C, S or H
        length: arc length >= 0
        kappa: signed curvature of a C segment (|kappa| = kappa_max), positive turns left
        normal: plane normal of a 3D C segment, the turn axis; left means towards normal x e
        zeta, tau0, taudot0: torsion equation constant and initial torsion state of an H segment
        psi: plane angle of the initial principal normal of an H segment about the incoming tangent
    """
    kind: SegmentKind
    length: float
    kappa: float = 0.0
    normal: Optional[Tuple[float, float, float]] = None
    zeta: float = 0.0
    tau0: float = 1.0
    taudot0: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        kind = self.kind if isinstance(self.kind, SegmentKind) else SegmentKind(str(self.kind))
        object.__setattr__(self, "kind", kind)
        require_finite("segment length", self.length)
        if self.length < 0.0:
            raise InvalidInput(f"segment length must be >= 0, got {self.length}")
        object.__setattr__(self, "length", float(self.length))
        if kind is SegmentKind.C:
            require_finite("segment curvature", self.kappa)
            if self.kappa == 0.0:
                raise InvalidInput("a circular segment needs a nonzero signed curvature")
            if self.normal is not None:
                object.__setattr__(self, "normal", tuple(normalized(self.normal, "plane normal").tolist()))
        elif kind is SegmentKind.S:
            object.__setattr__(self, "kappa", 0.0)
            object.__setattr__(self, "normal", None)
        else:
            require_finite("helicoidal parameters", self.zeta, self.tau0, self.taudot0, self.psi)
            if abs(self.tau0) < tau_min:
                raise InvalidInput(f"|tau0| must be >= {tau_min}, got {self.tau0}")
            object.__setattr__(self, "normal", None)

    @classmethod
    def straight(cls, length: float) -> "Segment":
        return cls(SegmentKind.S, length)

    @classmethod
    def arc(cls, length: float, kappa: float, normal: Optional[Sequence[float]] = None) -> "Segment":
        return cls(SegmentKind.C, length, kappa=kappa, normal=None if normal is None else tuple(normal))

    @classmethod
    def helix(cls, length: float, zeta: float, tau0: float, taudot0: float, psi: float = 0.0) -> "Segment":
        return cls(SegmentKind.H, length, zeta=zeta, tau0=tau0, taudot0=taudot0, psi=psi)

    def h_params(self):
        """HParams of an H segment, branch inferred from the sign of zeta."""
        from reachset.torsion import Branch, HParams
        return HParams(self.zeta, self.tau0, self.taudot0, Branch.from_zeta(self.zeta))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value, "length": self.length}
        if self.kind is SegmentKind.C:
            data["kappa"] = self.kappa
            if self.normal is not None:
                data["normal"] = list(self.normal)
        elif self.kind is SegmentKind.H:
            data.update({"zeta": self.zeta, "tau0": self.tau0, "taudot0": self.taudot0, "psi": self.psi})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Segment":
        kind = SegmentKind(data["kind"])
        if kind is SegmentKind.C:
            return cls.arc(float(data["length"]), float(data["kappa"]), data.get("normal"))
        if kind is SegmentKind.H:
            return cls.helix(float(data["length"]), float(data["zeta"]), float(data["tau0"]),
                             float(data["taudot0"]), float(data.get("psi", 0.0)))
        return cls.straight(float(data["length"]))


@dataclass(frozen=True)
class PathSpec:
    """Typed sequence of segments from a start configuration under the curvature bound kappa_max."""
    start: Config
    segments: Tuple[Segment, ...]
    kappa_max: float = default_kappa_max

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        require_finite("kappa_max", self.kappa_max)
        if self.kappa_max <= 0.0:
            raise InvalidInput(f"kappa_max must be > 0, got {self.kappa_max}")
        if not isinstance(self.start, (Config2, Config3)):
            raise InvalidInput(f"path start must be Config2 or Config3, got {type(self.start).__name__}")
        for segment in self.segments:
            _check_curvature(segment, self.kappa_max)
            if segment.kind is SegmentKind.H and isinstance(self.start, Config2):
                raise InvalidInput("helicoidal segments only exist in 3D")
            if segment.kind is SegmentKind.C and isinstance(self.start, Config3) and segment.normal is None:
                raise InvalidInput("circular segments of a 3D path need a plane normal")

    @property
    def dim(self) -> int:
        return 2 if isinstance(self.start, Config2) else 3

    @property
    def total_length(self) -> float:
        return math.fsum(segment.length for segment in self.segments)

    @property
    def tag(self) -> str:
        """Kinds of the nonzero-length segments, e.g. 'CSC' or 'CS' for a degenerate CSC."""
        return "".join(segment.kind.value for segment in self.segments if segment.length > 0.0)

    def endpoint(self) -> Config:
        return path_evaluate(self, self.total_length)

    def junctions(self) -> List[Config]:
        """Configurations at the start, every segment boundary and the end."""
        configs = [self.start]
        for segment in self.segments:
            configs.append(segment_endpoint(configs[-1], segment, self.kappa_max))
        return configs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "kappa_max": self.kappa_max,
            "start": self.start.to_dict(),
            "segments": [segment.to_dict() for segment in self.segments],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PathSpec":
        try:
            dim = int(data.get("dim", 3 if "r" in data["start"] else 2))
            start = Config2.from_dict(data["start"]) if dim == 2 else Config3.from_dict(data["start"])
            segments = tuple(Segment.from_dict(item) for item in data["segments"])
            return cls(start, segments, float(data.get("kappa_max", default_kappa_max)))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, InvalidInput):
                raise
            raise InvalidInput(f"malformed path specification: {e}") from e


def _check_curvature(segment: Segment, kappa_max: float) -> None:
    if segment.kind is SegmentKind.C and abs(abs(segment.kappa) - kappa_max) > 1e-12 * max(1.0, kappa_max):
        raise InvalidInput(f"circular segments are bang arcs: |kappa| must equal {kappa_max}, got {segment.kappa}")


# ************************************************************************************************************
#                                           Closed-Form Motions
# ************************************************************************************************************


def segment_endpoint(c0: Config, seg: Segment, kappa_max: float = default_kappa_max,
                     step: Optional[float] = None) -> Config:
    """
    Terminal configuration of one segment.
    :param c0: start configuration (Config2 or Config3)
    :param seg: the segment; H segments are integrated with the given step
    :param kappa_max: curvature bound
    :param step: integration step for H segments (default min(1e-3, length / 100))
    :return: the configuration after the segment
    """
    require_finite("kappa_max", kappa_max)
    if kappa_max <= 0.0:
        raise InvalidInput(f"kappa_max must be > 0, got {kappa_max}")
    _check_curvature(seg, kappa_max)
    if isinstance(c0, Config2):
        if seg.kind is SegmentKind.H:
            raise InvalidInput("helicoidal segments only exist in 3D")
        return _planar_endpoint(c0, seg)
    if not isinstance(c0, Config3):
        raise InvalidInput(f"unsupported configuration type {type(c0).__name__}")
    if seg.length == 0.0:
        return c0
    if seg.kind is SegmentKind.S:
        return Config3(c0.r + seg.length * c0.e, c0.e)
    if seg.kind is SegmentKind.C:
        rotation, center = _arc_rotation(c0, seg, seg.length)
        return Config3(center + rotation.apply(c0.r - center), rotation.apply(c0.e))
    from reachset.torsion import helical_segment
    return helical_segment(c0, seg.psi, seg.h_params(), kappa_max, seg.length, step).endpoint


def _planar_endpoint(c0: Config2, seg: Segment) -> Config2:
    if seg.kind is SegmentKind.S:
        return Config2(c0.x + seg.length * math.cos(c0.theta), c0.y + seg.length * math.sin(c0.theta), c0.theta)
    kappa = seg.kappa
    theta = c0.theta + kappa * seg.length
    return Config2(
        c0.x + (math.sin(theta) - math.sin(c0.theta)) / kappa,
        c0.y - (math.cos(theta) - math.cos(c0.theta)) / kappa,
        theta,
    )


def _arc_rotation(c0: Config3, seg: Segment, length: Union[float, np.ndarray]) -> Tuple[Rotation, np.ndarray]:
    """Rodrigues rotation(s) of a 3D circular segment and the circle center."""
    b = np.asarray(seg.normal, dtype=float)
    along = float(b @ c0.e)
    if abs(along) > frame_tolerance:
        raise InvalidInput(f"plane normal of a circular segment must be orthogonal to the tangent (dot={along:.3g})")
    b = b - along * c0.e
    b = b / np.linalg.norm(b)
    center = c0.r + np.cross(b, c0.e) / seg.kappa
    angles = seg.kappa * np.asarray(length, dtype=float)
    rotvec = b * angles if np.ndim(angles) == 0 else angles[:, None] * b[None, :]
    return Rotation.from_rotvec(rotvec), center


def path_evaluate(p: PathSpec, s: float) -> Config:
    """
    Configuration at arc length s, walking the segments.
    :param p: the path
    :param s: arc length in [0, total length]
    :return: Config2 or Config3; p.start when s = 0
    """
    total = p.total_length
    if not np.isfinite(s) or s < -length_tolerance or s > total + length_tolerance:
        raise OutOfRange(f"arc length {s} outside [0, {total}]")
    s = min(max(float(s), 0.0), total)
    if s == 0.0:
        return p.start
    config = p.start
    walked = 0.0
    for index, segment in enumerate(p.segments):
        is_last = index == len(p.segments) - 1
        if s < walked + segment.length or is_last:
            return segment_endpoint(config, replace(segment, length=min(segment.length, s - walked)), p.kappa_max)
        config = segment_endpoint(config, segment, p.kappa_max)
        walked += segment.length
    return config


def embed_2d(c: Config2, psi: float, base: Config3) -> Config3:
    """
    Maps a planar configuration into the plane through base.r spanned by base.e and the plane
    normal rotated by psi about base.e; Config2(0, 0, 0) maps to base.
    """
    require_finite("plane angle", psi)
    n = plane_normal(base.e, psi)
    r = base.r + c.x * base.e + c.y * n
    e = math.cos(c.theta) * base.e + math.sin(c.theta) * n
    return Config3(r, e)


def embed_2d_batch(x: np.ndarray, y: np.ndarray, theta: np.ndarray, psi: np.ndarray,
                   base: Config3) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized embed_2d over broadcastable arrays; returns (positions, tangents) of shape (..., 3)."""
    n_ref = reference_normal(base.e)
    m_ref = np.cross(base.e, n_ref)
    psi = np.asarray(psi, dtype=float)
    n = np.cos(psi)[..., None] * n_ref + np.sin(psi)[..., None] * m_ref
    x, y, theta = (np.asarray(v, dtype=float)[..., None] for v in (x, y, theta))
    r = base.r + x * base.e + y * n
    e = np.cos(theta) * base.e + np.sin(theta) * n
    return r, e


def embed_path_2d(path: PathSpec, psi: float, base: Config3) -> PathSpec:
    """Lifts a planar path into the plane of embed_2d; the endpoint commutes with embed_2d."""
    if path.dim != 2:
        raise InvalidInput("embed_path_2d expects a planar path")
    b = tuple(np.cross(base.e, plane_normal(base.e, psi)).tolist())
    segments = tuple(
        Segment.arc(segment.length, segment.kappa, b) if segment.kind is SegmentKind.C else Segment.straight(segment.length)
        for segment in path.segments
    )
    return PathSpec(embed_2d(path.start, psi, base), segments, path.kappa_max)


# ************************************************************************************************************
#                                           Frenet-Serret Integration
# ************************************************************************************************************


def _frenet_rhs(state: np.ndarray, kappa: np.ndarray, tau: np.ndarray) -> np.ndarray:
    T = state[:, 3:6]
    N = state[:, 6:9]
    B = state[:, 9:12]
    k = kappa[:, None]
    t = tau[:, None]
    return np.concatenate([T, k * N, -k * T + t * B, -t * N], axis=1)


def _reorthonormalize(state: np.ndarray) -> np.ndarray:
    # Gram-Schmidt: T first, then N, B = T x N
    T = state[:, 3:6] / np.linalg.norm(state[:, 3:6], axis=1, keepdims=True)
    N = state[:, 6:9] - np.sum(state[:, 6:9] * T, axis=1, keepdims=True) * T
    N = N / np.linalg.norm(N, axis=1, keepdims=True)
    return np.concatenate([state[:, 0:3], T, N, np.cross(T, N)], axis=1)


def frenet_rk4(state0: np.ndarray, kappa_nodes: np.ndarray, tau_nodes: np.ndarray, h: float, n: int,
               keep_samples: bool = True) -> np.ndarray:
    """
    Batched fixed-step RK4 of r' = T, T' = kN, N' = -kT + tB, B' = -tN.

    :param state0: (M, 12) rows of (r, T, N, B)
    :param kappa_nodes: (M, 2n+1) curvature at the half-step nodes s = j h / 2
    :param tau_nodes: (M, 2n+1) torsion at the same nodes
    :param h: step
    :param n: number of steps
    :param keep_samples: return every step (n+1, M, 12) or only the end state (M, 12)
    """
    state = _reorthonormalize(np.asarray(state0, dtype=float))
    samples = [state] if keep_samples else None
    for j in range(n):
        k0, km, k1 = kappa_nodes[:, 2 * j], kappa_nodes[:, 2 * j + 1], kappa_nodes[:, 2 * j + 2]
        t0, tm, t1 = tau_nodes[:, 2 * j], tau_nodes[:, 2 * j + 1], tau_nodes[:, 2 * j + 2]
        d1 = _frenet_rhs(state, k0, t0)
        d2 = _frenet_rhs(state + 0.5 * h * d1, km, tm)
        d3 = _frenet_rhs(state + 0.5 * h * d2, km, tm)
        d4 = _frenet_rhs(state + h * d3, k1, t1)
        state = _reorthonormalize(state + (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4))
        if keep_samples:
            samples.append(state)
    return np.stack(samples) if keep_samples else state


def _profile_values(profile: Profile, nodes: np.ndarray, name: str) -> np.ndarray:
    values = profile(nodes) if callable(profile) else profile
    values = np.broadcast_to(np.asarray(values, dtype=float), nodes.shape).copy()
    if not np.all(np.isfinite(values)):
        raise InvalidInput(f"{name} profile produced non-finite values")
    return values


def frenet_integrate(f0: Frame3, curvature_profile: Profile, torsion_profile: Profile, length: float,
                     step: Optional[float] = None) -> List[Frame3]:
    """
    Integrates the Frenet-Serret equations from f0 with fixed-step RK4, re-orthonormalizing
    the frame after every step.
    :param f0: initial frame (orthonormal within 1e-6)
    :param curvature_profile: constant or vectorized function of arc length
    :param torsion_profile: constant or vectorized function of arc length
    :param length: arc length to integrate
    :param step: step size (default min(1e-3, length / 100))
    :return: frames at s = 0, h, ..., length
    """
    if not isinstance(f0, Frame3):
        raise InvalidFrame(f"expected a Frame3, got {type(f0).__name__}")
    require_finite("length", length)
    if length < 0.0:
        raise InvalidInput(f"length must be >= 0, got {length}")
    if length == 0.0:
        return [f0]
    step = default_step(length) if step is None else step
    if not np.isfinite(step) or step <= 0.0:
        raise InvalidInput(f"step must be > 0, got {step}")
    n = step_count(length, step)
    h = length / n
    nodes = np.linspace(0.0, length, 2 * n + 1)
    kappa = _profile_values(curvature_profile, nodes, "curvature")[None, :]
    tau = _profile_values(torsion_profile, nodes, "torsion")[None, :]
    states = frenet_rk4(f0.as_array()[None, :], kappa, tau, h, n)
    return [Frame3.from_array(states[j, 0]) for j in range(n + 1)]


def helix_frame(f0: Frame3, kappa: float, tau: float, s: float) -> Frame3:
    """
    Closed-form frame of the constant-(kappa, tau) helix: the frame rotates about the
    constant Darboux vector D = tau T + kappa B at rate |D|.
    """
    darboux = tau * f0.T + kappa * f0.B
    omega = float(np.linalg.norm(darboux))
    if omega == 0.0:
        return Frame3(f0.r + s * f0.T, f0.T, f0.N, f0.B)
    axis = darboux / omega
    rotation = Rotation.from_rotvec(axis * omega * s)
    parallel = (tau / omega) * axis
    perpendicular = f0.T - parallel
    r = (f0.r + s * parallel + (math.sin(omega * s) / omega) * perpendicular
         + ((1.0 - math.cos(omega * s)) / omega) * np.cross(axis, perpendicular))
    return Frame3(r, rotation.apply(f0.T), rotation.apply(f0.N), rotation.apply(f0.B))


# ************************************************************************************************************
#                                           Path Sampling
# ************************************************************************************************************


@dataclass
class PathSamples:
    """
    Time samples of a path for costate integration and PMP checks.

    Attributes:
        t: sample times (arc lengths); junction times appear twice, once per adjacent segment
        states: 2D rows (x, y, theta unwrapped); 3D rows (r, e)
        controls: 2D signed curvature; 3D curvature vector (orthogonal to e)
        normals: 3D unit turning direction (principal normal for H, an arbitrary normal on S)
        binormals: 3D e x normals
        segment_index: index of the owning segment
        boundary: True on the first and last sample of each segment
        step: nominal node spacing within segments
    """
    t: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    segment_index: np.ndarray
    boundary: np.ndarray
    step: float
    normals: Optional[np.ndarray] = None
    binormals: Optional[np.ndarray] = None
    kappa_max: float = default_kappa_max

    def __len__(self) -> int:
        return len(self.t)


def sample_path(path: PathSpec, step: float, even: bool = False) -> PathSamples:
    """
    Samples every nonzero segment on a uniform grid of spacing <= step (both ends included).
    :param path: the path
    :param step: maximal spacing
    :param even: force an even number of intervals per segment (RK4 over node pairs)
    """
    if not np.isfinite(step) or step <= 0.0:
        raise InvalidInput(f"step must be > 0, got {step}")
    blocks: Dict[str, List[np.ndarray]] = {key: [] for key in
                                           ("t", "states", "controls", "segment", "boundary", "normals", "binormals")}
    config = path.start
    theta = path.start.theta if path.dim == 2 else 0.0
    walked = 0.0
    for index, segment in enumerate(path.segments):
        if segment.length > 0.0:
            n = step_count(segment.length, step)
            n = 2 * int(math.ceil(n / 2)) if even else n
            local = np.linspace(0.0, segment.length, n + 1)
            if path.dim == 2:
                states, controls = _sample_planar(config, theta, segment, local)
                theta = states[-1, 2]
                blocks["states"].append(states)
                blocks["controls"].append(controls)
            else:
                states, controls, normals = _sample_spatial(config, segment, local, path.kappa_max)
                blocks["states"].append(states)
                blocks["controls"].append(controls)
                blocks["normals"].append(normals)
                blocks["binormals"].append(np.cross(states[:, 3:6], normals))
            flags = np.zeros(n + 1, dtype=bool)
            flags[0] = flags[-1] = True
            blocks["t"].append(walked + local)
            blocks["segment"].append(np.full(n + 1, index))
            blocks["boundary"].append(flags)
        config = segment_endpoint(config, segment, path.kappa_max)
        walked += segment.length
    if not blocks["t"]:
        return _single_sample(path)
    samples = PathSamples(
        t=np.concatenate(blocks["t"]),
        states=np.concatenate(blocks["states"]),
        controls=np.concatenate(blocks["controls"]),
        segment_index=np.concatenate(blocks["segment"]),
        boundary=np.concatenate(blocks["boundary"]),
        step=step,
        kappa_max=path.kappa_max,
    )
    if path.dim == 3:
        samples.normals = np.concatenate(blocks["normals"])
        samples.binormals = np.concatenate(blocks["binormals"])
    return samples


def _single_sample(path: PathSpec) -> PathSamples:
    if path.dim == 2:
        states = path.start.as_array()[None, :]
        return PathSamples(np.zeros(1), states, np.zeros(1), np.zeros(1, dtype=int), np.ones(1, dtype=bool),
                           0.0, kappa_max=path.kappa_max)
    normal = reference_normal(path.start.e)
    return PathSamples(np.zeros(1), path.start.as_array()[None, :], np.zeros((1, 3)), np.zeros(1, dtype=int),
                       np.ones(1, dtype=bool), 0.0, normal[None, :], np.cross(path.start.e, normal)[None, :],
                       path.kappa_max)


def _sample_planar(c0: Config2, theta0: float, segment: Segment, local: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if segment.kind is SegmentKind.S:
        theta = np.full_like(local, theta0)
        x = c0.x + local * math.cos(theta0)
        y = c0.y + local * math.sin(theta0)
        controls = np.zeros_like(local)
    else:
        kappa = segment.kappa
        theta = theta0 + kappa * local
        x = c0.x + (np.sin(theta) - math.sin(theta0)) / kappa
        y = c0.y - (np.cos(theta) - math.cos(theta0)) / kappa
        controls = np.full_like(local, kappa)
    return np.column_stack([x, y, theta]), controls


def _sample_spatial(c0: Config3, segment: Segment, local: np.ndarray,
                    kappa_max: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    count = len(local)
    if segment.kind is SegmentKind.S:
        r = c0.r[None, :] + local[:, None] * c0.e[None, :]
        e = np.repeat(c0.e[None, :], count, axis=0)
        normals = np.repeat(reference_normal(c0.e)[None, :], count, axis=0)
        return np.hstack([r, e]), np.zeros((count, 3)), normals
    if segment.kind is SegmentKind.C:
        rotations, center = _arc_rotation(c0, segment, local)
        r = center[None, :] + rotations.apply(c0.r - center)
        e = rotations.apply(c0.e)
        turn = np.sign(segment.kappa) * np.cross(np.asarray(segment.normal), c0.e)
        normals = rotations.apply(turn / np.linalg.norm(turn))
        return np.hstack([r, e]), kappa_max * normals, normals
    from reachset.torsion import helical_segment
    spacing = segment.length / (count - 1)
    arc = helical_segment(c0, segment.psi, segment.h_params(), kappa_max, segment.length, spacing)
    frames = np.stack([frame.as_array() for frame in arc.samples])
    return frames[:, 0:6], kappa_max * frames[:, 6:9], frames[:, 6:9]
