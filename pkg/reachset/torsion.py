"""
Torsion equation of the helicoidal extremals.

Unit-curvature helicoidal arcs have a torsion obeying

    tau'' = 3 tau'^2 / (2 tau) - 2 tau^3 + 2 tau - zeta tau sqrt(|tau|)

which is singular at tau = 0. Solutions are integrated with fixed-step RK4 and rescaled to
the curvature bound kappa_max by similarity: arc length and 1/tau both scale with 1/kappa_max.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from reachset.config import (
    default_kappa_max,
    default_tau0_values,
    default_taudot0_values,
    default_zeta_values,
    logger,
    tau_max,
    tau_min,
)
from reachset.exceptions import InvalidGrid, InvalidInput, TorsionSingularity
from reachset.geometry import Config3, Frame3, default_step, frenet_rk4, step_count
from reachset.utils.helper_functions import require_finite


class Branch(Enum):
    """Problem type whose extremals an H arc belongs to."""
    MIN_TIME = "min_time"
    MAX_TIME = "max_time"

    @classmethod
    def from_zeta(cls, zeta: float) -> "Branch":
        """Nonnegative zeta belongs to the minimum-time problem, nonpositive to the maximum-time one."""
        return cls.MAX_TIME if zeta < 0.0 else cls.MIN_TIME

    def admits(self, zeta: float) -> bool:
        return zeta >= 0.0 if self is Branch.MIN_TIME else zeta <= 0.0


class BranchSelector(Enum):
    MIN_TIME = "min_time"
    MAX_TIME = "max_time"
    BOTH = "both"

    def admits(self, branch: Branch) -> bool:
        return self is BranchSelector.BOTH or self.value == branch.value


@dataclass(frozen=True)
class TorsionState:
    tau: float
    taudot: float


@dataclass(frozen=True)
class HParams:
    """Torsion equation constant zeta, initial torsion state and the branch it is tagged with."""
    zeta: float
    tau0: float
    taudot0: float
    branch: Branch = Branch.MIN_TIME

    def __post_init__(self):
        require_finite("HParams", self.zeta, self.tau0, self.taudot0)
        branch = self.branch if isinstance(self.branch, Branch) else Branch(self.branch)
        object.__setattr__(self, "branch", branch)
        if abs(self.tau0) < tau_min:
            raise InvalidInput(f"|tau0| must be >= {tau_min}, got {self.tau0}")
        if not branch.admits(self.zeta):
            raise InvalidInput(f"zeta={self.zeta} is not admissible on the {branch.value} branch")

    @property
    def initial_state(self) -> TorsionState:
        return TorsionState(self.tau0, self.taudot0)

    def to_dict(self):
        return {"zeta": self.zeta, "tau0": self.tau0, "taudot0": self.taudot0, "branch": self.branch.value}


def torsion_rhs(s: TorsionState, zeta: float) -> float:
    """
    Right-hand side tau'' of the torsion equation.
    :param s: torsion state with |tau| >= tau_min
    :param zeta: equation constant
    :return: tau''
    """
    tau, taudot = s.tau, s.taudot
    if abs(tau) < tau_min:
        raise TorsionSingularity(0.0, tau, f"torsion equation is singular at tau={tau:.3g}")
    return 1.5 * taudot ** 2 / tau - 2.0 * tau ** 3 + 2.0 * tau - zeta * tau * math.sqrt(abs(tau))


def _rhs_array(tau: np.ndarray, taudot: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    return 1.5 * taudot ** 2 / tau - 2.0 * tau ** 3 + 2.0 * tau - zeta * tau * np.sqrt(np.abs(tau))


def torsion_first_integral(s: TorsionState, zeta: float) -> float:
    """
    Conserved quantity of the torsion equation,
    E = tau'^2 / (8 |tau|^3) + |tau| / 2 + 1 / (2 |tau|) - zeta / (2 sqrt(|tau|)).
    """
    magnitude = abs(s.tau)
    if magnitude < tau_min:
        raise TorsionSingularity(0.0, s.tau)
    return (s.taudot ** 2 / (8.0 * magnitude ** 3) + 0.5 * magnitude + 0.5 / magnitude
            - zeta / (2.0 * math.sqrt(magnitude)))


def torsion_rk4(tau0: np.ndarray, taudot0: np.ndarray, zeta: np.ndarray, h: float,
                n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Batched RK4 of (tau, tau') over n steps of size h.

    Rows stop (and hold their last value) when tau leaves the band tau_min <= |tau| <= tau_max,
    changes sign or becomes non-finite.
    :return: (tau (M, n+1), taudot (M, n+1), stopped_at (M,)) with stopped_at = inf for rows
             that completed and otherwise the last accepted arc length
    """
    tau = np.array(tau0, dtype=float)
    rate = np.array(taudot0, dtype=float)
    zeta = np.broadcast_to(np.asarray(zeta, dtype=float), tau.shape)
    sign0 = np.sign(tau)
    taus = np.empty((len(tau), n + 1))
    rates = np.empty((len(tau), n + 1))
    taus[:, 0] = tau
    rates[:, 0] = rate
    stopped_at = np.full(len(tau), np.inf)
    alive = np.ones(len(tau), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for j in range(n):
            a1, b1 = rate, _rhs_array(tau, rate, zeta)
            a2, b2 = rate + 0.5 * h * b1, _rhs_array(tau + 0.5 * h * a1, rate + 0.5 * h * b1, zeta)
            a3, b3 = rate + 0.5 * h * b2, _rhs_array(tau + 0.5 * h * a2, rate + 0.5 * h * b2, zeta)
            a4, b4 = rate + h * b3, _rhs_array(tau + h * a3, rate + h * b3, zeta)
            new_tau = tau + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            new_rate = rate + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            bad = alive & ~(
                np.isfinite(new_tau) & np.isfinite(new_rate)
                & (np.abs(new_tau) >= tau_min) & (np.abs(new_tau) <= tau_max)
                & (np.sign(new_tau) == sign0)
            )
            stopped_at[bad] = j * h
            alive &= ~bad
            tau = np.where(alive, new_tau, tau)
            rate = np.where(alive, new_rate, rate)
            taus[:, j + 1] = tau
            rates[:, j + 1] = rate
    return taus, rates, stopped_at


def integrate_torsion(h: HParams, length: float, step: Optional[float] = None) -> List[Tuple[float, TorsionState]]:
    """
    RK4 trajectory of the unit-curvature torsion state over [0, length].
    :param h: torsion parameters
    :param length: arc length >= 0
    :param step: step size (default min(1e-3, length / 100))
    :return: (s, TorsionState) pairs at s = 0, h, ..., length
    """
    require_finite("length", length)
    if length < 0.0:
        raise InvalidInput(f"length must be >= 0, got {length}")
    if length == 0.0:
        return [(0.0, h.initial_state)]
    step = default_step(length) if step is None else step
    if not np.isfinite(step) or step <= 0.0:
        raise InvalidInput(f"step must be > 0, got {step}")
    n = step_count(length, step)
    spacing = length / n
    taus, rates, stopped_at = torsion_rk4(np.array([h.tau0]), np.array([h.taudot0]), np.array([h.zeta]), spacing, n)
    if np.isfinite(stopped_at[0]):
        last = int(round(stopped_at[0] / spacing))
        raise TorsionSingularity(stopped_at[0], taus[0, last])
    return [(j * spacing, TorsionState(float(taus[0, j]), float(rates[0, j]))) for j in range(n + 1)]


# ************************************************************************************************************
#                                           Helicoidal Arcs
# ************************************************************************************************************


@dataclass
class HelicalArc:
    """
    A helicoidal arc in world coordinates.

    Attributes:
        endpoint: terminal configuration (at truncated_at when truncated)
        samples: Frenet frames at the integration nodes
        length: requested arc length
        torsion: torsion at the sample nodes (curvature kappa_max)
        truncated_at: arc length where the torsion left its band, None for a complete arc
    """
    endpoint: Config3
    samples: List[Frame3]
    length: float
    torsion: np.ndarray
    truncated_at: Optional[float] = None

    @property
    def truncated(self) -> bool:
        return self.truncated_at is not None

    def __iter__(self) -> Iterator:
        return iter((self.endpoint, self.samples))


def _unit_grid(kappa_max: float, length: float, step: Optional[float]) -> Tuple[float, int, float]:
    # integration runs in unit-curvature arc length sigma = kappa_max s
    unit_length = kappa_max * length
    unit_step = default_step(unit_length) if step is None else kappa_max * step
    if not np.isfinite(unit_step) or unit_step <= 0.0:
        raise InvalidInput(f"step must be > 0, got {step}")
    n = step_count(unit_length, unit_step)
    return unit_length, n, unit_length / n


def helical_segment(c0: Config3, psi: float, h: HParams, kappa_max: float = default_kappa_max, length: float = 0.0,
                    step: Optional[float] = None, truncate: bool = False) -> HelicalArc:
    """
    Integrates a helicoidal arc of curvature kappa_max from c0.
    :param c0: start configuration
    :param psi: plane angle of the initial principal normal about c0.e
    :param h: torsion parameters of the unit-curvature solution
    :param kappa_max: curvature bound
    :param length: arc length >= 0
    :param step: step in arc length (default min(1e-3, kappa_max * length / 100) / kappa_max)
    :param truncate: return the arc up to the singularity instead of raising TorsionSingularity
    :return: the HelicalArc; iterating yields (endpoint, samples)
    """
    require_finite("helical segment", psi, kappa_max, length)
    if kappa_max <= 0.0:
        raise InvalidInput(f"kappa_max must be > 0, got {kappa_max}")
    if length < 0.0:
        raise InvalidInput(f"length must be >= 0, got {length}")
    f0 = Frame3.from_config(c0, psi)
    if length == 0.0:
        return HelicalArc(c0, [f0], 0.0, np.array([kappa_max * h.tau0]))
    unit_length, n, spacing = _unit_grid(kappa_max, length, step)
    taus, _, stopped_at = torsion_rk4(np.array([h.tau0]), np.array([h.taudot0]), np.array([h.zeta]),
                                      0.5 * spacing, 2 * n)
    truncated_at = None
    if np.isfinite(stopped_at[0]):
        if not truncate:
            raise TorsionSingularity(stopped_at[0] / kappa_max, kappa_max * taus[0, -1])
        n = int(math.floor(stopped_at[0] / spacing + 1e-9))
        truncated_at = n * spacing / kappa_max
        logger.debug(f"helicoidal arc {h} truncated at s={truncated_at:.6g} of {length:.6g}")
    state0 = np.concatenate([np.zeros(3), f0.T, f0.N, f0.B])[None, :]
    kappa_nodes = np.ones((1, 2 * n + 1))
    states = frenet_rk4(state0, kappa_nodes, taus[:, :2 * n + 1], spacing, n)[:, 0, :]
    states[:, 0:3] = c0.r + states[:, 0:3] / kappa_max
    samples = [Frame3.from_array(state) for state in states]
    return HelicalArc(samples[-1].config, samples, length, kappa_max * taus[0, 0:2 * n + 1:2], truncated_at)


@dataclass
class HelicalBatch:
    """
    Endpoints of many helicoidal arcs integrated from the canonical frame (origin, T = x, N = y, B = z).

    Attributes:
        params: the torsion parameters, one per row
        positions: (M, 3) terminal positions
        frames: (M, 3, 3) terminal frames, columns T, N, B
        stopped_at: (M,) arc length of a torsion singularity, inf for complete arcs
    """
    params: List[HParams]
    positions: np.ndarray
    frames: np.ndarray
    stopped_at: np.ndarray

    @property
    def complete(self) -> np.ndarray:
        return ~np.isfinite(self.stopped_at)


def helical_endpoints(params: Sequence[HParams], kappa_max: float = default_kappa_max, length: float = 1.0,
                      step: Optional[float] = None) -> HelicalBatch:
    """Integrates every arc of params in one vectorised RK4 pass."""
    params = list(params)
    require_finite("helical endpoints", kappa_max, length)
    if kappa_max <= 0.0 or length <= 0.0:
        raise InvalidInput(f"kappa_max and length must be > 0, got {kappa_max}, {length}")
    if not params:
        return HelicalBatch([], np.zeros((0, 3)), np.zeros((0, 3, 3)), np.zeros(0))
    _, n, spacing = _unit_grid(kappa_max, length, step)
    tau0 = np.array([p.tau0 for p in params])
    taudot0 = np.array([p.taudot0 for p in params])
    zeta = np.array([p.zeta for p in params])
    taus, _, stopped_at = torsion_rk4(tau0, taudot0, zeta, 0.5 * spacing, 2 * n)
    state0 = np.tile(np.concatenate([np.zeros(3), np.eye(3).reshape(-1)]), (len(params), 1))
    end = frenet_rk4(state0, np.ones_like(taus), taus, spacing, n, keep_samples=False)
    frames = np.stack([end[:, 3:6], end[:, 6:9], end[:, 9:12]], axis=2)
    return HelicalBatch(params, end[:, 0:3] / kappa_max, frames, stopped_at / kappa_max)


def h_param_grid(zeta_values: Iterable[float] = default_zeta_values, tau0_values: Iterable[float] = default_tau0_values,
                 taudot0_values: Iterable[float] = default_taudot0_values,
                 selector: BranchSelector = BranchSelector.BOTH) -> List[HParams]:
    """
    Sweep grid of torsion parameters; zeta = 0 belongs to both branches and is emitted once.
    """
    zeta_values, tau0_values, taudot0_values = list(zeta_values), list(tau0_values), list(taudot0_values)
    if not zeta_values or not tau0_values or not taudot0_values:
        raise InvalidGrid("helicoidal parameter grid has an empty axis")
    grid = []
    for zeta in zeta_values:
        branch = Branch.from_zeta(zeta)
        if zeta != 0.0 and not selector.admits(branch):
            continue
        if zeta == 0.0 and selector is BranchSelector.MAX_TIME:
            branch = Branch.MAX_TIME
        for tau0 in tau0_values:
            if abs(tau0) < tau_min:
                continue
            for taudot0 in taudot0_values:
                grid.append(HParams(float(zeta), float(tau0), float(taudot0), branch))
    return grid
