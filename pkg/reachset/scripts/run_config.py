"""
Run configuration of the command-line interface.

A run is described by one JSON document: top-level scalars (mode, t_f, kappa_max, seed, jobs,
out, path_file) and nested sections. Every key is optional; unknown keys at any level are
rejected. Example:

    {
        "mode": "2d-nodir",
        "t_f": 1.0,
        "seed": 7,
        "grid": {"arc_resolution": 64},
        "oracle": {"n_samples": 100000, "n_pieces": 20},
        "equiv": {"n_directions": 200}
    }
"""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

from reachset.config import (
    default_arc_resolution,
    default_equiv_directions,
    default_kappa_max,
    default_oracle_pieces,
    default_oracle_samples,
    default_psi_resolution,
    default_tau0_values,
    default_taudot0_values,
    default_zeta_values,
    eps_dom_factor,
    eps_in_factor,
    oracle_chunk_size,
    screening_step,
)
from reachset.exceptions import InvalidConfig, InvalidInput, ReachsetError
from reachset.families import CandidateGrid
from reachset.reach.cloud import Mode, OracleSettings
from reachset.torsion import BranchSelector
from reachset.utils.helper_functions import flatten_keys, get_value_of_nested_key


@dataclass
class GridSection:
    arc_resolution: int = default_arc_resolution
    psi_resolution: int = default_psi_resolution
    branch: str = BranchSelector.BOTH.value
    ccc_outer_bound: bool = True
    deduplicate: bool = True
    h_step: Optional[float] = None


@dataclass
class HGridSection:
    zeta_values: List[float] = field(default_factory=lambda: list(default_zeta_values))
    tau0_values: List[float] = field(default_factory=lambda: list(default_tau0_values))
    taudot0_values: List[float] = field(default_factory=lambda: list(default_taudot0_values))


@dataclass
class OracleSection:
    n_samples: int = default_oracle_samples
    n_pieces: int = default_oracle_pieces
    chunk_size: int = oracle_chunk_size
    eps_dom_factor: float = eps_dom_factor
    eps_in_factor: float = eps_in_factor
    validate: bool = True


@dataclass
class TolerancesSection:
    """None selects the default by path content (1e-6 closed form, 1e-4 with helicoidal arcs)."""
    pmp: Optional[float] = None
    equivalence: Optional[float] = None


@dataclass
class ScreeningSection:
    step: float = screening_step
    adjoint: str = "tangent"
    keep_unverified: bool = True


@dataclass
class EquivSection:
    n_directions: int = default_equiv_directions
    refine: bool = True
    directions: Optional[List[List[float]]] = None


_SECTIONS = {
    "grid": GridSection,
    "h_grid": HGridSection,
    "oracle": OracleSection,
    "tolerances": TolerancesSection,
    "screening": ScreeningSection,
    "equiv": EquivSection,
}


@dataclass
class RunConfig:
    """
    Attributes:
        mode: 2d-dir, 2d-nodir, 3d-dir or 3d-nodir
        t_f: arc-length budget > 0
        kappa_max: curvature bound > 0
        seed: root seed of every random stream
        jobs: worker processes (None reads REACHSET_THREADS)
        out: output CSV (boundary, oracle, equiv) or JSON (pmp-check) path
        path_file: path JSON of pmp-check
    """
    mode: str = Mode.PLANAR_NODIR.value
    t_f: float = 1.0
    kappa_max: float = default_kappa_max
    seed: int = 0
    jobs: Optional[int] = None
    out: str = "out.csv"
    path_file: Optional[str] = None
    grid: GridSection = field(default_factory=GridSection)
    h_grid: HGridSection = field(default_factory=HGridSection)
    oracle: OracleSection = field(default_factory=OracleSection)
    tolerances: TolerancesSection = field(default_factory=TolerancesSection)
    screening: ScreeningSection = field(default_factory=ScreeningSection)
    equiv: EquivSection = field(default_factory=EquivSection)

    def __post_init__(self):
        self.validate()

    # ****************************************************************************************************
    #                                       Validation
    # ****************************************************************************************************

    def validate(self) -> None:
        try:
            Mode.parse(self.mode)
        except InvalidInput as e:
            raise InvalidConfig(str(e)) from None
        _positive("t_f", self.t_f)
        _positive("kappa_max", self.kappa_max)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise InvalidConfig(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.jobs is not None and (not isinstance(self.jobs, int) or self.jobs < 0):
            raise InvalidConfig(f"jobs must be a nonnegative integer, got {self.jobs!r}")
        for name in ("arc_resolution", "psi_resolution"):
            _at_least(f"grid.{name}", getattr(self.grid, name), 1)
        if self.grid.branch not in [b.value for b in BranchSelector]:
            raise InvalidConfig(f"grid.branch must be one of {[b.value for b in BranchSelector]}, got {self.grid.branch!r}")
        if self.grid.h_step is not None:
            _positive("grid.h_step", self.grid.h_step)
        for name in ("zeta_values", "tau0_values", "taudot0_values"):
            values = getattr(self.h_grid, name)
            if not isinstance(values, list) or not values:
                raise InvalidConfig(f"h_grid.{name} must be a nonempty list")
            for value in values:
                _finite(f"h_grid.{name}", value)
        _at_least("oracle.n_samples", self.oracle.n_samples, 0)
        _at_least("oracle.n_pieces", self.oracle.n_pieces, 1)
        _at_least("oracle.chunk_size", self.oracle.chunk_size, 1)
        _positive("oracle.eps_dom_factor", self.oracle.eps_dom_factor)
        _positive("oracle.eps_in_factor", self.oracle.eps_in_factor)
        for name in ("pmp", "equivalence"):
            value = getattr(self.tolerances, name)
            if value is not None:
                _finite(f"tolerances.{name}", value)
                if value < 0.0:
                    raise InvalidConfig(f"tolerances.{name} must be >= 0, got {value}")
        _positive("screening.step", self.screening.step)
        if self.screening.adjoint not in ("tangent", "ambient"):
            raise InvalidConfig(f"screening.adjoint must be 'tangent' or 'ambient', got {self.screening.adjoint!r}")
        _at_least("equiv.n_directions", self.equiv.n_directions, 0)
        if self.equiv.directions is not None and not isinstance(self.equiv.directions, list):
            raise InvalidConfig("equiv.directions must be a list of directions")

    # ****************************************************************************************************
    #                                       Conversion
    # ****************************************************************************************************

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """
        Parses a configuration document.
        :param data: the decoded JSON object
        :return: the RunConfig
        :raises InvalidConfig: unknown keys, wrong types or out-of-range values
        """
        if not isinstance(data, dict):
            raise InvalidConfig(f"configuration must be a JSON object, got {type(data).__name__}")
        known = set()
        for f in fields(cls):
            if f.name in _SECTIONS:
                known.update(f"{f.name}.{g.name}" for g in fields(_SECTIONS[f.name]))
                known.add(f.name)
            else:
                known.add(f.name)
        unknown = [key for key in flatten_keys(data) if key not in known]
        if unknown:
            raise InvalidConfig(f"unknown configuration keys: {', '.join(unknown)}")

        values: Dict[str, Any] = {}
        for f in fields(cls):
            section = _SECTIONS.get(f.name)
            if section is None:
                if f.name in data:
                    values[f.name] = data[f.name]
                continue
            if f.name in data and not isinstance(data[f.name], dict):
                raise InvalidConfig(f"{f.name} must be an object")
            section_values = {}
            for g in fields(section):
                value = get_value_of_nested_key(data, f"{f.name}.{g.name}", _MISSING)
                if value is not _MISSING:
                    section_values[g.name] = value
            try:
                values[f.name] = section(**section_values)
            except TypeError as e:
                raise InvalidConfig(f"invalid {f.name} section: {e}") from None
        try:
            return cls(**_coerced(values))
        except (TypeError, ValueError) as e:
            if isinstance(e, ReachsetError):
                raise
            raise InvalidConfig(f"invalid configuration: {e}") from None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """SHA-256 of the canonical (sorted keys, compact) JSON form."""
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    # ****************************************************************************************************
    #                                       Library Objects
    # ****************************************************************************************************

    @property
    def run_mode(self) -> Mode:
        return Mode.parse(self.mode)

    def candidate_grid(self) -> CandidateGrid:
        try:
            return CandidateGrid(
                t_f=float(self.t_f),
                kappa_max=float(self.kappa_max),
                arc_resolution=int(self.grid.arc_resolution),
                psi_resolution=int(self.grid.psi_resolution),
                zeta_values=tuple(self.h_grid.zeta_values),
                tau0_values=tuple(self.h_grid.tau0_values),
                taudot0_values=tuple(self.h_grid.taudot0_values),
                branch=BranchSelector(self.grid.branch),
                ccc_outer_bound=bool(self.grid.ccc_outer_bound),
                deduplicate=bool(self.grid.deduplicate),
                h_step=self.grid.h_step,
            )
        except InvalidInput as e:
            raise InvalidConfig(str(e)) from None

    def oracle_settings(self) -> OracleSettings:
        return OracleSettings(int(self.oracle.n_samples), int(self.oracle.n_pieces), int(self.seed),
                              float(self.oracle.eps_dom_factor), float(self.oracle.eps_in_factor))


class _Missing:
    pass


_MISSING = _Missing()


def _coerced(values: Dict[str, Any]) -> Dict[str, Any]:
    for name in ("t_f", "kappa_max"):
        if name in values:
            values[name] = _as_float(name, values[name])
    return values


def _as_float(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfig(f"{name} must be a number, got {value!r}")
    return float(value)


def _finite(name: str, value: Any) -> None:
    if not math.isfinite(_as_float(name, value)):
        raise InvalidConfig(f"{name} must be finite, got {value}")


def _positive(name: str, value: Any) -> None:
    _finite(name, value)
    if value <= 0:
        raise InvalidConfig(f"{name} must be > 0, got {value}")


def _at_least(name: str, value: Any, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise InvalidConfig(f"{name} must be an integer >= {minimum}, got {value!r}")
