"""
Candidate extremal families at a fixed arc-length budget t_f.

Terminal direction relevant: CSC and CCC (planar) plus H (helicoidal, 3D only).
Terminal direction irrelevant: CS and CC (planar). Every template is parameterized by all but
its last segment length; the last segment absorbs the remainder of the budget, so every
candidate has total length t_f. Degenerate candidates (some lengths zero) are part of the
grid, which closes the families under subsegments.

Candidates live in an array-backed CandidateTable; PathSpec objects are only built on demand.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from reachset.config import (
    dedup_tolerance,
    default_arc_resolution,
    default_kappa_max,
    default_psi_resolution,
    default_tau0_values,
    default_taudot0_values,
    default_zeta_values,
    family_templates,
    logger,
)
from reachset.exceptions import InvalidGrid, InvalidInput
from reachset.geometry import (
    Config2,
    Config3,
    PathSpec,
    Segment,
    embed_2d_batch,
    embed_path_2d,
    reference_normal,
)
from reachset.torsion import BranchSelector, HParams, h_param_grid, helical_endpoints
from reachset.utils.helper_functions import require_finite

_TURN_LABELS = {1: "L", -1: "R", 0: "S"}


def canonical_base() -> Config3:
    """Default 3D start: origin, tangent +x."""
    return Config3(np.zeros(3), np.array([1.0, 0.0, 0.0]))


@dataclass(frozen=True)
class FamilyKind:
    """Template family (CSC, CCC, H, CS, CC) and the tag of the nonzero segments, e.g. CSC/CS."""
    template: str
    tag: str

    def __str__(self) -> str:
        return self.tag if self.tag == self.template else f"{self.template}/{self.tag}"


@dataclass(frozen=True)
class CandidateGrid:
    """
    Resolution of a family sweep.

    Attributes:
        t_f: arc-length budget > 0
        kappa_max: curvature bound
        arc_resolution: points per free arc-length parameter
        psi_resolution: plane angles of the 3D planar families and of H
        zeta_values, tau0_values, taudot0_values: helicoidal parameter axes
        branch: branch selector for CCC middle arcs and H
        ccc_outer_bound: first and last CCC arcs no longer than the middle arc
        deduplicate: drop candidates duplicated by a degenerate template
        h_step: integration step of H candidates (default min(1e-3, t_f / 100))
    """
    t_f: float
    kappa_max: float = default_kappa_max
    arc_resolution: int = default_arc_resolution
    psi_resolution: int = default_psi_resolution
    zeta_values: Tuple[float, ...] = default_zeta_values
    tau0_values: Tuple[float, ...] = default_tau0_values
    taudot0_values: Tuple[float, ...] = default_taudot0_values
    branch: BranchSelector = BranchSelector.BOTH
    ccc_outer_bound: bool = True
    deduplicate: bool = True
    h_step: Optional[float] = None

    def __post_init__(self):
        require_finite("CandidateGrid", self.t_f, self.kappa_max)
        if self.t_f <= 0.0:
            raise InvalidInput(f"t_f must be > 0, got {self.t_f}")
        if self.kappa_max <= 0.0:
            raise InvalidInput(f"kappa_max must be > 0, got {self.kappa_max}")
        if self.arc_resolution < 1 or self.psi_resolution < 1:
            raise InvalidGrid(f"resolutions must be >= 1, got arc={self.arc_resolution}, psi={self.psi_resolution}")
        branch = self.branch if isinstance(self.branch, BranchSelector) else BranchSelector(self.branch)
        object.__setattr__(self, "branch", branch)
        for name in ("zeta_values", "tau0_values", "taudot0_values"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t_f": self.t_f,
            "kappa_max": self.kappa_max,
            "arc_resolution": self.arc_resolution,
            "psi_resolution": self.psi_resolution,
            "zeta_values": list(self.zeta_values),
            "tau0_values": list(self.tau0_values),
            "taudot0_values": list(self.taudot0_values),
            "branch": self.branch.value,
            "ccc_outer_bound": self.ccc_outer_bound,
            "deduplicate": self.deduplicate,
            "h_step": self.h_step,
        }

    @property
    def half_turn(self) -> float:
        """Arc length of a half circle, pi / kappa_max."""
        return math.pi / self.kappa_max

    def psi_values(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.psi_resolution, endpoint=False)

    def h_params(self) -> List[HParams]:
        return h_param_grid(self.zeta_values, self.tau0_values, self.taudot0_values, self.branch)

    def ccc_middle_lengths(self) -> np.ndarray:
        """Middle-arc lengths: >= pi / kappa_max on the min-time branch, <= pi / kappa_max on the max-time one."""
        res = self.arc_resolution
        blocks = []
        if self.branch is not BranchSelector.MAX_TIME and self.t_f >= self.half_turn:
            blocks.append(np.linspace(self.half_turn, self.t_f, res))
        if self.branch is not BranchSelector.MIN_TIME:
            blocks.append(np.linspace(0.0, min(self.half_turn, self.t_f), res))
        if not blocks:
            return np.zeros(0)
        return np.unique(np.concatenate(blocks))


# ************************************************************************************************************
#                                           Templates
# ************************************************************************************************************


@dataclass(frozen=True)
class Template:
    """One family with one turn-sign pattern, e.g. CSC with (1, 0, -1) labelled LSR."""
    family: str
    signs: Tuple[int, ...]

    @property
    def kinds(self) -> Tuple[str, ...]:
        return family_templates[self.family]["segments"]

    @property
    def size(self) -> int:
        return len(self.kinds)

    @property
    def label(self) -> str:
        if self.family == "H":
            return "H"
        return "".join(_TURN_LABELS[sign] for sign in self.signs)

    def tag(self, lengths: Sequence[float]) -> str:
        return "".join(kind for kind, length in zip(self.kinds, lengths) if length > 0.0)

    def segments_2d(self, lengths: Sequence[float], kappa_max: float) -> Tuple[Segment, ...]:
        return tuple(
            Segment.straight(float(length)) if sign == 0 else Segment.arc(float(length), sign * kappa_max)
            for sign, length in zip(self.signs, lengths)
        )

    def path_2d(self, lengths: Sequence[float], kappa_max: float = default_kappa_max,
                start: Optional[Config2] = None) -> PathSpec:
        start = Config2(0.0, 0.0, 0.0) if start is None else start
        return PathSpec(start, self.segments_2d(lengths, kappa_max), kappa_max)

    def length_grid(self, grid: CandidateGrid) -> np.ndarray:
        """Rows of segment lengths summing to t_f for this template."""
        t_f = grid.t_f
        fractions = np.linspace(0.0, 1.0, grid.arc_resolution)
        first = t_f * fractions
        if self.size == 2:
            return np.column_stack([first, t_f - first])
        if self.family == "CSC":
            a = np.repeat(first, len(fractions))
            b = np.tile(fractions, len(first)) * (t_f - a)
            return np.column_stack([a, b, np.maximum(t_f - a - b, 0.0)])
        rows = []
        for middle in grid.ccc_middle_lengths():
            bounds = self._outer_bounds(t_f, middle, grid.ccc_outer_bound)
            if bounds is None:
                continue
            low, high = bounds
            a = low + fractions * (high - low)
            rows.append(np.column_stack([a, np.full_like(a, middle), np.maximum(t_f - middle - a, 0.0)]))
        return np.concatenate(rows) if rows else np.zeros((0, 3))

    @staticmethod
    def _outer_bounds(t_f: float, middle: float, outer_bound: bool) -> Optional[Tuple[float, float]]:
        low, high = 0.0, t_f - middle
        if outer_bound:
            low, high = max(0.0, t_f - 2.0 * middle), min(middle, t_f - middle)
        if low > high + 1e-12:
            return None
        return low, max(low, high)

    def free_lengths(self, lengths: Sequence[float]) -> np.ndarray:
        """The continuous parameters of a candidate: every length but the last."""
        return np.asarray(lengths[: self.size - 1], dtype=float)

    def clip(self, free: Sequence[float], seed: Sequence[float], grid: CandidateGrid) -> Optional[np.ndarray]:
        """
        Projects free lengths onto the feasible set of the template (budget, CCC branch of the
        seed, outer-arc bound); None when the set is empty.
        """
        t_f = grid.t_f
        free = np.asarray(free, dtype=float)
        if not np.all(np.isfinite(free)):
            return None
        if self.size == 2:
            a = float(np.clip(free[0], 0.0, t_f))
            return np.array([a, t_f - a])
        if self.family == "CSC":
            a = float(np.clip(free[0], 0.0, t_f))
            b = float(np.clip(free[1], 0.0, t_f - a))
            return np.array([a, b, max(t_f - a - b, 0.0)])
        if grid.kappa_max * seed[1] >= math.pi:
            low, high = grid.half_turn, t_f
        else:
            low, high = 0.0, min(grid.half_turn, t_f)
        middle = float(np.clip(free[1], low, high))
        bounds = self._outer_bounds(t_f, middle, grid.ccc_outer_bound)
        if bounds is None:
            return None
        a = float(np.clip(free[0], *bounds))
        return np.array([a, middle, max(t_f - middle - a, 0.0)])


def templates_for(with_direction: bool, dim: int) -> List[Template]:
    """Templates of a mode, in family_templates order."""
    templates = []
    for family, spec in family_templates.items():
        if spec["with_direction"] != with_direction or (dim == 2 and not spec["planar"]):
            continue
        templates.extend(Template(family, tuple(signs)) for signs in spec["sign_patterns"])
    return templates


def planar_endpoints(signs: Sequence[int], lengths: np.ndarray,
                     kappa_max: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form endpoints (x, y, unwrapped heading) of planar paths from the origin heading +x."""
    x = np.zeros(len(lengths))
    y = np.zeros(len(lengths))
    theta = np.zeros(len(lengths))
    for j, sign in enumerate(signs):
        length = lengths[:, j]
        if sign == 0:
            x = x + length * np.cos(theta)
            y = y + length * np.sin(theta)
            continue
        kappa = sign * kappa_max
        turned = theta + kappa * length
        x = x + (np.sin(turned) - np.sin(theta)) / kappa
        y = y - (np.cos(turned) - np.cos(theta)) / kappa
        theta = turned
    return x, y, theta


# ************************************************************************************************************
#                                           Candidate Table
# ************************************************************************************************************


@dataclass(frozen=True)
class Candidate:
    """
    One emitted candidate.

    Attributes:
        path: the generating PathSpec of total length t_f
        family: family and nonzero-segment tag
        endpoint: endpoint-space coordinates, see CandidateTable.endpoints
        params: template label, lengths, plane angle and torsion parameters
        index: row in the table
    """
    path: PathSpec
    family: FamilyKind
    endpoint: np.ndarray
    params: Dict[str, Any]
    index: int


@dataclass
class CandidateTable:
    """
    Array-backed candidate set of one mode.

    Rows are ordered by template (family_templates order, then sign pattern), then length row,
    then plane angle; H rows come last, ordered by torsion parameters then plane angle.
    """
    grid: CandidateGrid
    with_direction: bool
    dim: int
    templates: List[Template]
    template_index: np.ndarray
    lengths: np.ndarray
    psi: np.ndarray
    h_index: np.ndarray
    positions: np.ndarray
    heading: np.ndarray
    tangents: np.ndarray
    h_params: List[HParams] = field(default_factory=list)
    base: Optional[Config3] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.template_index)

    def __repr__(self) -> str:
        return f"CandidateTable(dim={self.dim}, with_direction={self.with_direction}, size={len(self)})"

    @property
    def endpoints(self) -> np.ndarray:
        """2D: (x, y) or (x, y, unwrapped heading); 3D: r or (r, e)."""
        if self.dim == 2:
            return np.column_stack([self.positions, self.heading]) if self.with_direction else self.positions
        return np.hstack([self.positions, self.tangents]) if self.with_direction else self.positions

    def template_of(self, i: int) -> Template:
        return self.templates[int(self.template_index[i])]

    def row_lengths(self, i: int) -> np.ndarray:
        return self.lengths[i, : self.template_of(i).size]

    def tags(self) -> List[str]:
        cache: Dict[Tuple[int, Tuple[bool, ...]], str] = {}
        result = []
        for ti, row in zip(self.template_index, self.lengths > 0.0):
            key = (int(ti), tuple(row.tolist()))
            if key not in cache:
                cache[key] = self.templates[key[0]].tag(row.astype(float))
            result.append(cache[key])
        return result

    def subset(self, rows: np.ndarray) -> "CandidateTable":
        rows = np.asarray(rows)
        return CandidateTable(
            grid=self.grid, with_direction=self.with_direction, dim=self.dim, templates=self.templates,
            template_index=self.template_index[rows], lengths=self.lengths[rows], psi=self.psi[rows],
            h_index=self.h_index[rows], positions=self.positions[rows], heading=self.heading[rows],
            tangents=self.tangents[rows], h_params=self.h_params, base=self.base, metadata=dict(self.metadata),
        )

    def path(self, i: int, lengths: Optional[Sequence[float]] = None, psi: Optional[float] = None,
             h: Optional[HParams] = None) -> PathSpec:
        """PathSpec of row i, optionally with replaced continuous parameters."""
        template = self.template_of(i)
        psi = float(self.psi[i]) if psi is None else psi
        kappa_max = self.grid.kappa_max
        if template.family == "H":
            h = self.h_params[int(self.h_index[i])] if h is None else h
            return PathSpec(self.base, (Segment.helix(self.grid.t_f, h.zeta, h.tau0, h.taudot0, psi),), kappa_max)
        lengths = self.row_lengths(i) if lengths is None else lengths
        planar = template.path_2d(lengths, kappa_max)
        return planar if self.dim == 2 else embed_path_2d(planar, psi, self.base)

    def candidate(self, i: int) -> Candidate:
        template = self.template_of(i)
        lengths = self.row_lengths(i)
        h = self.h_params[int(self.h_index[i])] if template.family == "H" else None
        params: Dict[str, Any] = {
            "template": template.label,
            "lengths": [float(v) for v in lengths],
        }
        if self.dim == 3:
            params["psi"] = float(self.psi[i])
        if h is not None:
            params["h"] = h.to_dict()
        family = FamilyKind(template.family, template.tag(lengths))
        return Candidate(self.path(i), family, self.endpoints[i].copy(), params, int(i))

    def __iter__(self) -> Iterator[Candidate]:
        return (self.candidate(i) for i in range(len(self)))


def candidate_table(grid: CandidateGrid, with_direction: bool, dim: int = 2,
                    base: Optional[Config3] = None) -> CandidateTable:
    """
    Builds every candidate endpoint of a mode.
    :param grid: sweep resolution
    :param with_direction: terminal direction relevant (CSC, CCC, H) or not (CS, CC)
    :param dim: 2 or 3
    :param base: 3D start configuration (default origin heading +x)
    :return: the (deduplicated unless disabled) table
    """
    if dim not in (2, 3):
        raise InvalidInput(f"dim must be 2 or 3, got {dim}")
    if dim == 3 and base is None:
        base = canonical_base()
    templates = templates_for(with_direction, dim)
    psi_values = grid.psi_values() if dim == 3 else np.zeros(1)
    blocks: Dict[str, List[np.ndarray]] = {key: [] for key in
                                           ("template", "lengths", "psi", "h", "positions", "heading", "tangents")}

    def add_block(ti, lengths, psi, h_index, positions, heading, tangents):
        blocks["template"].append(np.full(len(lengths), ti))
        blocks["lengths"].append(np.pad(lengths, ((0, 0), (0, 3 - lengths.shape[1]))))
        blocks["psi"].append(psi)
        blocks["h"].append(h_index)
        blocks["positions"].append(positions)
        blocks["heading"].append(heading)
        blocks["tangents"].append(tangents)

    metadata: Dict[str, Any] = {"templates": [t.label for t in templates], "dropped_singular": 0}
    h_params: List[HParams] = []
    for ti, template in enumerate(templates):
        if template.family == "H":
            continue
        lengths = template.length_grid(grid)
        if not len(lengths):
            continue
        x, y, theta = planar_endpoints(template.signs, lengths, grid.kappa_max)
        count = len(lengths)
        if dim == 2:
            add_block(ti, lengths, np.zeros(count), np.full(count, -1), np.column_stack([x, y]), theta,
                      np.column_stack([np.cos(theta), np.sin(theta), np.zeros(count)]))
            continue
        r, e = embed_2d_batch(x[:, None], y[:, None], theta[:, None], psi_values[None, :], base)
        planes = len(psi_values)
        add_block(ti, np.repeat(lengths, planes, axis=0), np.tile(psi_values, count), np.full(count * planes, -1),
                  r.reshape(-1, 3), np.repeat(theta, planes), e.reshape(-1, 3))

    h_template = next((ti for ti, t in enumerate(templates) if t.family == "H"), None)
    if h_template is not None:
        h_params = grid.h_params()
        h_block = _helicoidal_block(grid, h_params, psi_values, base)
        metadata["dropped_singular"] = h_block["dropped"]
        metadata["h_grid_size"] = len(h_params)
        if h_block["count"]:
            add_block(h_template, h_block["lengths"], h_block["psi"], h_block["h"], h_block["positions"],
                      np.zeros(h_block["count"]), h_block["tangents"])
        metadata["h_grid_heuristic"] = True

    if not blocks["template"]:
        raise InvalidGrid(f"candidate grid emits no candidate (t_f={grid.t_f}, branch={grid.branch.value})")
    table = CandidateTable(
        grid=grid, with_direction=with_direction, dim=dim, templates=templates,
        template_index=np.concatenate(blocks["template"]),
        lengths=np.concatenate(blocks["lengths"]),
        psi=np.concatenate(blocks["psi"]),
        h_index=np.concatenate(blocks["h"]),
        positions=np.concatenate(blocks["positions"]),
        heading=np.concatenate(blocks["heading"]),
        tangents=np.concatenate(blocks["tangents"]),
        h_params=h_params, base=base, metadata=metadata,
    )
    table.metadata["enumerated"] = len(table)
    if grid.deduplicate:
        table = deduplicate(table)
    logger.info(f"candidate table dim={dim} with_direction={with_direction}: {len(table)} candidates "
                f"({table.metadata['enumerated']} enumerated, {table.metadata['dropped_singular']} H arcs singular)")
    return table


def _helicoidal_block(grid: CandidateGrid, h_params: List[HParams], psi_values: np.ndarray,
                      base: Config3) -> Dict[str, Any]:
    batch = helical_endpoints(h_params, grid.kappa_max, grid.t_f, grid.h_step)
    complete = np.flatnonzero(batch.complete)
    dropped = len(h_params) - len(complete)
    if dropped:
        logger.warning(f"{dropped} of {len(h_params)} helicoidal arcs hit a torsion singularity before t_f and are dropped")
    n_ref = reference_normal(base.e)
    m_ref = np.cross(base.e, n_ref)
    normals = np.cos(psi_values)[:, None] * n_ref + np.sin(psi_values)[:, None] * m_ref
    binormals = np.cos(psi_values)[:, None] * m_ref - np.sin(psi_values)[:, None] * n_ref

    def to_world(local: np.ndarray) -> np.ndarray:
        # local coordinates on (T0, N0, B0) = (e, n(psi), e x n(psi))
        return (local[:, None, 0:1] * base.e + local[:, None, 1:2] * normals[None, :, :]
                + local[:, None, 2:3] * binormals[None, :, :]).reshape(-1, 3)

    planes = len(psi_values)
    count = len(complete) * planes
    lengths = np.zeros((count, 1))
    lengths[:, 0] = grid.t_f
    return {
        "count": count,
        "dropped": dropped,
        "lengths": lengths,
        "psi": np.tile(psi_values, len(complete)),
        "h": np.repeat(complete, planes),
        "positions": base.r + to_world(batch.positions[complete]),
        "tangents": to_world(batch.frames[complete][:, :, 0]),
    }


def _is_subsequence(short: str, long: str) -> bool:
    remaining = iter(long)
    return all(char in remaining for char in short)


def deduplicate(table: CandidateTable, tol: float = dedup_tolerance) -> CandidateTable:
    """
    Drops candidates whose endpoints agree within tol (max norm) with a candidate of a template
    they degenerate from or into; the fewest-segment template survives, ties by stream order.
    """
    if len(table) < 2:
        return table
    pairs = cKDTree(table.endpoints).query_pairs(r=tol, p=np.inf, output_type="ndarray")
    if not len(pairs):
        table.metadata["deduplicated"] = 0
        return table
    tags = table.tags()
    sizes = np.array([t.size for t in table.templates])[table.template_index]
    removed = np.zeros(len(table), dtype=bool)
    for i, j in pairs:
        if not (_is_subsequence(tags[i], tags[j]) or _is_subsequence(tags[j], tags[i])):
            continue
        removed[j if (sizes[i], i) <= (sizes[j], j) else i] = True
    kept = table.subset(np.flatnonzero(~removed))
    kept.metadata["deduplicated"] = int(removed.sum())
    logger.debug(f"deduplication removed {int(removed.sum())} of {len(table)} candidates")
    return kept


def enumerate_2d(grid: CandidateGrid, with_direction: bool) -> Iterator[Candidate]:
    """Stream of planar candidates (CSC/CCC with direction, CS/CC without)."""
    yield from candidate_table(grid, with_direction, dim=2)


def enumerate_3d(grid: CandidateGrid, with_direction: bool, base: Optional[Config3] = None) -> Iterator[Candidate]:
    """Stream of spatial candidates: planar families over the plane-angle grid, plus H with direction."""
    yield from candidate_table(grid, with_direction, dim=3, base=base)
