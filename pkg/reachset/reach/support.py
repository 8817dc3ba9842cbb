"""
Support points of the reachable set: argmax of <c, endpoint> over the candidate families,
refined by a local search over the continuous parameters of the winning template.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from tqdm import tqdm

from reachset.config import logger, tau_min
from reachset.exceptions import InvalidGrid, InvalidInput, TorsionSingularity
from reachset.families import CandidateGrid, CandidateTable, FamilyKind, candidate_table, planar_endpoints
from reachset.geometry import Config3, PathSpec, embed_2d_batch
from reachset.reach.cloud import Mode
from reachset.torsion import Branch, HParams, helical_segment

_PLANAR_MAXITER = 2000
_HELICAL_MAXITER = 150
# RK4 steps per helicoidal arc inside the local search
_HELICAL_REFINE_STEPS = 400


@dataclass
class SupportResult:
    """
    Attributes:
        direction: the direction c
        value: <c, endpoint>
        endpoint: endpoint-space coordinates of the maximizer
        generator: the maximizing path
        family: family and nonzero-segment tag of the generator
        params: template label, lengths, plane angle and torsion parameters
        index: winning row of the candidate table
        refined: the local search improved the grid winner
    """
    direction: np.ndarray
    value: float
    endpoint: np.ndarray
    generator: PathSpec
    family: FamilyKind
    params: Dict[str, Any] = field(default_factory=dict)
    index: int = -1
    refined: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "direction": self.direction.tolist(),
            "value": self.value,
            "endpoint": self.endpoint.tolist(),
            "family": str(self.family),
            "params": self.params,
            "index": self.index,
            "refined": self.refined,
            "generator": self.generator.to_dict(),
        }


def support_direction(mode: Mode, c: Any) -> np.ndarray:
    """Validates a direction of the endpoint space of mode."""
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size != mode.endpoint_size:
        raise InvalidInput(f"a {mode.value} direction has {mode.endpoint_size} components, got {c.size}")
    if not np.all(np.isfinite(c)) or not np.any(c):
        raise InvalidInput("direction must be a finite nonzero vector")
    return c


def sample_directions(mode: Mode, count: int, seed: int = 0) -> np.ndarray:
    """count unit directions of the endpoint space, uniform on the sphere."""
    if count < 1:
        raise InvalidInput(f"direction count must be >= 1, got {count}")
    directions = np.random.default_rng(seed).normal(size=(count, Mode.parse(mode).endpoint_size))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


class RowModel:
    """
    Endpoint of one candidate-table row as a function of its continuous parameters: the free
    lengths (plus the plane angle in 3D) for planar templates, (zeta, tau0, taudot0, psi) for H.
    """

    def __init__(self, table: CandidateTable, index: int):
        self.table = table
        self.index = index
        self.template = table.template_of(index)
        self.grid: CandidateGrid = table.grid
        self.seed_lengths = table.row_lengths(index)
        self.helical = self.template.family == "H"
        self.seed_h: Optional[HParams] = table.h_params[int(table.h_index[index])] if self.helical else None

    def start(self) -> Tuple[np.ndarray, np.ndarray]:
        """Initial point and per-coordinate simplex steps."""
        psi_step = 2.0 * math.pi / self.grid.psi_resolution
        if self.helical:
            h = self.seed_h
            x0 = np.array([h.zeta, h.tau0, h.taudot0, float(self.table.psi[self.index])])
            return x0, np.array([0.25, max(0.1 * abs(h.tau0), 1e-3), 0.25, psi_step])
        free = self.template.free_lengths(self.seed_lengths)
        length_step = self.grid.t_f / max(self.grid.arc_resolution - 1, 1)
        if self.table.dim == 2:
            return free, np.full(len(free), length_step)
        return (np.append(free, float(self.table.psi[self.index])),
                np.append(np.full(len(free), length_step), psi_step))

    def decode(self, z: np.ndarray) -> Optional[Dict[str, Any]]:
        """Continuous parameters to (lengths, psi, h); None outside the feasible set."""
        if not np.all(np.isfinite(z)):
            return None
        if self.helical:
            seed = self.seed_h
            zeta = max(float(z[0]), 0.0) if seed.branch is Branch.MIN_TIME else min(float(z[0]), 0.0)
            tau0 = math.copysign(max(abs(float(z[1])), tau_min), seed.tau0)
            if math.copysign(1.0, float(z[1])) != math.copysign(1.0, seed.tau0):
                tau0 = math.copysign(tau_min, seed.tau0)
            h = HParams(zeta, tau0, float(z[2]), seed.branch)
            return {"lengths": np.array([self.grid.t_f]), "psi": float(z[3]), "h": h}
        free_count = self.template.size - 1
        lengths = self.template.clip(z[:free_count], self.seed_lengths, self.grid)
        if lengths is None:
            return None
        psi = float(z[free_count]) if self.table.dim == 3 else 0.0
        return {"lengths": lengths, "psi": psi, "h": None}

    def endpoint(self, decoded: Dict[str, Any]) -> Optional[np.ndarray]:
        table = self.table
        kappa_max = self.grid.kappa_max
        if self.helical:
            step = self.grid.h_step or self.grid.t_f / _HELICAL_REFINE_STEPS
            try:
                arc = helical_segment(table.base, decoded["psi"], decoded["h"], kappa_max, self.grid.t_f, step)
            except TorsionSingularity:
                return None
            end = arc.endpoint
            return np.concatenate([end.r, end.e])
        x, y, theta = planar_endpoints(self.template.signs, decoded["lengths"][None, :], kappa_max)
        if table.dim == 2:
            return np.array([x[0], y[0], theta[0]]) if table.with_direction else np.array([x[0], y[0]])
        r, e = embed_2d_batch(x, y, theta, np.array([decoded["psi"]]), table.base)
        return np.concatenate([r[0], e[0]]) if table.with_direction else r[0]

    def path(self, decoded: Dict[str, Any]) -> PathSpec:
        return self.table.path(self.index, lengths=decoded["lengths"], psi=decoded["psi"], h=decoded["h"])

    def params(self, decoded: Dict[str, Any]) -> Dict[str, Any]:
        params: Dict[str, Any] = {"template": self.template.label,
                                  "lengths": [float(v) for v in decoded["lengths"]]}
        if self.table.dim == 3:
            params["psi"] = float(decoded["psi"])
        if decoded["h"] is not None:
            params["h"] = decoded["h"].to_dict()
        return params


def _check_table(mode: Mode, grid: Optional[CandidateGrid], table: Optional[CandidateTable],
                 base: Optional[Config3]) -> CandidateTable:
    if table is None:
        if grid is None:
            raise InvalidInput("support queries need a candidate grid or table")
        table = candidate_table(grid, mode.with_direction, mode.dim, base)
    if table.dim != mode.dim or table.with_direction != mode.with_direction:
        raise InvalidInput(f"candidate table (dim={table.dim}, with_direction={table.with_direction}) "
                           f"does not match mode {mode.value}")
    if not len(table):
        raise InvalidGrid("empty candidate stream")
    return table


def _refine(model: RowModel, c: np.ndarray, value: float) -> Optional[Tuple[float, Dict[str, Any], np.ndarray]]:
    size = c.size

    def objective(z: np.ndarray) -> float:
        decoded = model.decode(z)
        if decoded is None:
            return np.inf
        end = model.endpoint(decoded)
        return np.inf if end is None else -float(c @ end[:size])

    x0, steps = model.start()
    simplex = np.vstack([x0] + [x0 + steps[j] * np.eye(len(x0))[j] for j in range(len(x0))])
    maxiter = _HELICAL_MAXITER if model.helical else _PLANAR_MAXITER
    result = minimize(objective, x0, method="Nelder-Mead",
                      options={"initial_simplex": simplex, "xatol": 1e-11, "fatol": 1e-15, "maxiter": maxiter})
    decoded = model.decode(result.x)
    if decoded is None:
        return None
    end = model.endpoint(decoded)
    if end is None:
        return None
    refined_value = float(c @ end[:size])
    if refined_value <= value:
        return None
    return refined_value, decoded, end[:size]


def support_point(mode: Mode, c: Any, grid: Optional[CandidateGrid] = None, table: Optional[CandidateTable] = None,
                  refine: bool = True, base: Optional[Config3] = None) -> SupportResult:
    """
    Maximizer of <c, endpoint> over the candidates of mode.
    :param mode: problem mode
    :param c: direction of the endpoint space
    :param grid: candidate grid (ignored when table is given)
    :param table: precomputed candidate table of mode
    :param refine: polish the grid winner with Nelder-Mead over its continuous parameters
    :param base: 3D start configuration
    :return: SupportResult; grid ties go to the first candidate in stream order
    """
    mode = Mode.parse(mode)
    c = support_direction(mode, c)
    table = _check_table(mode, grid, table, base)
    values = table.endpoints @ c
    index = int(np.argmax(values))
    value = float(values[index])
    candidate = table.candidate(index)
    result = SupportResult(c, value, candidate.endpoint, candidate.path, candidate.family, candidate.params, index)
    if not refine:
        return result
    model = RowModel(table, index)
    refined = _refine(model, c, value)
    if refined is None:
        return result
    refined_value, decoded, end = refined
    lengths = decoded["lengths"]
    logger.debug(f"support along {c.tolist()} refined {value:.12g} -> {refined_value:.12g}")
    return SupportResult(c, refined_value, end, model.path(decoded),
                         FamilyKind(model.template.family, model.template.tag(lengths)), model.params(decoded),
                         index, True)


def support_sweep(mode: Mode, directions: Sequence[Any], grid: Optional[CandidateGrid] = None,
                  table: Optional[CandidateTable] = None, refine: bool = True, base: Optional[Config3] = None,
                  progress: bool = False) -> List[SupportResult]:
    """support_point for every direction, sharing one candidate table."""
    mode = Mode.parse(mode)
    table = _check_table(mode, grid, table, base)
    return [support_point(mode, c, table=table, refine=refine)
            for c in tqdm(list(directions), desc="support", disable=not progress)]
