"""
PMP Checker Module

This module provides the PmpChecker class, which bundles the PMP-condition checks with a
strictness level, costate integration settings and logging:

1. Extremal checks: pointwise maximum, Hamiltonian constancy and transversality of a path
   with a given terminal costate
2. Screening: search of a terminal costate that makes a candidate an extremal
3. Equivalence: endpoint-optimization and time-optimal forms of a support candidate
"""

import logging
from enum import Enum
from typing import Any, Optional

from reachset.config import integrated_tolerance
from reachset.geometry import PathSpec
from reachset.pmp.conditions import check_extremal, default_tolerance, equivalence_check
from reachset.pmp.costate import integrate_costate
from reachset.pmp.report import EquivalenceReport, PmpReport
from reachset.pmp.screening import ScreeningResult, screen_costate


class StrictnessLevel(Enum):
    """
    Tolerance presets.

    STRICT: 1e-9, only exact closed-form extremals pass
    MODERATE: 1e-6, closed-form extremals sampled at the default step
    LENIENT: 1e-4, integrated (helicoidal) extremals
    """
    STRICT = "strict"
    MODERATE = "moderate"
    LENIENT = "lenient"


strictness_tolerances = {
    StrictnessLevel.STRICT: 1e-9,
    StrictnessLevel.MODERATE: 1e-6,
    StrictnessLevel.LENIENT: 1e-4,
}


class PmpChecker:
    """
    Checks candidate paths against the PMP conditions.

    Attributes:
        strictness: tolerance preset of closed-form paths
        h_tolerance: floor of the tolerance for paths with helicoidal segments
        step: costate sample spacing (None = min(1e-3, length / 100))
        control_grid_resolution: control grid of the pointwise check (None = 257 in 2D, 64 angles in 3D)
        adjoint: 3D adjoint variant
        tolerance_override: fixed tolerance replacing the preset
        logger: Logger instance for check messages

    Example:
        >>> checker = PmpChecker(strictness=StrictnessLevel.MODERATE, logging_level=logging.INFO)
        >>> report = checker.check(path, p_tf=[1.0, 0.0, 0.0])
        >>> print(report)
    """

    def __init__(
        self,
        strictness: StrictnessLevel = StrictnessLevel.MODERATE,
        h_tolerance: float = integrated_tolerance,
        step: Optional[float] = None,
        control_grid_resolution: Optional[int] = None,
        adjoint: str = "tangent",
        tolerance_override: Optional[float] = None,
        logging_level: int = logging.WARNING,
    ):
        """
        Initialize the PmpChecker.

        Args:
            strictness: tolerance preset (STRICT, MODERATE, LENIENT)
            h_tolerance: smallest tolerance used for paths with helicoidal segments
            step: costate sample spacing
            control_grid_resolution: control grid of the pointwise check
            adjoint: "tangent" or "ambient" 3D adjoint
            tolerance_override: fixed tolerance for every path, replacing the preset
            logging_level: Python logging level (DEBUG, INFO, WARNING, ERROR)
        """
        self.strictness = strictness
        self.h_tolerance = h_tolerance
        self.step = step
        self.control_grid_resolution = control_grid_resolution
        self.adjoint = adjoint
        self.tolerance_override = tolerance_override

        # Set up logger
        self.logger = logging.getLogger(__name__)
        self.logger.setLevel(logging_level)

        # Add handler if none exists
        if not self.logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            self.logger.addHandler(handler)

        self.logger.info(
            f"PmpChecker initialized with strictness={strictness.value}, "
            f"tolerance={self.tolerance:.1e}, adjoint={adjoint}"
        )

    @property
    def tolerance(self) -> float:
        return strictness_tolerances[self.strictness]

    def tolerance_for(self, path: PathSpec) -> float:
        if self.tolerance_override is not None:
            return self.tolerance_override
        if default_tolerance(path) > strictness_tolerances[StrictnessLevel.MODERATE]:
            return max(self.tolerance, self.h_tolerance)
        return self.tolerance

    def check(self, path: PathSpec, p_tf: Any, p0: float = 0.0, phi: float = 0.0,
              grad_phi: Optional[Any] = None) -> PmpReport:
        """
        Integrates the costate from p_tf and checks every PMP condition.

        Args:
            path: the path to check
            p_tf: terminal costate
            p0: running-cost multiplier
            phi: running cost
            grad_phi: gradient of the terminal cost; enables the transversality check

        Returns:
            PmpReport with one verdict per condition
        """
        tol = self.tolerance_for(path)
        costate = integrate_costate(path, p_tf, p0, phi, self.step, adjoint=self.adjoint)
        report = check_extremal(path, costate, grad_phi, tol, self.control_grid_resolution)
        if report.valid:
            self.logger.info(f"{path.tag or 'empty'} path passes every PMP condition at {tol:.1e}")
        else:
            for issue in report.issues:
                self.logger.warning(f"{path.tag or 'empty'} path: {issue.code}: {issue.message}")
        return report

    def screen(self, path: PathSpec, with_direction: bool) -> ScreeningResult:
        result = screen_costate(path, with_direction, tol=self.tolerance_for(path), adjoint=self.adjoint,
                                control_grid_resolution=self.control_grid_resolution)
        self.logger.debug(f"screening {path.tag}: {'pass' if result.passed else 'fail'} {result.reason}")
        return result

    def equivalence(self, path: PathSpec, c: Any) -> EquivalenceReport:
        report = equivalence_check(path, c, self.tolerance_for(path), self.step, self.adjoint,
                                   self.control_grid_resolution)
        if not report.valid:
            self.logger.warning(f"equivalence fails for {path.tag} along {report.direction}")
        return report
