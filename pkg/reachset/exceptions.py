"""
Error hierarchy for the reachset package.

Every error raised on purpose by the library derives from ReachsetError, so callers (the CLI
in particular) can tell operational failures apart from invalid inputs.
"""
from typing import Optional


class ReachsetError(Exception):
    """Base class of all reachset errors."""


class InvalidInput(ReachsetError, ValueError):
    """Non-finite values, wrong dimensions or violated preconditions."""


class InvalidFrame(InvalidInput):
    """A Frenet frame that is not orthonormal and right-handed within tolerance."""


class OutOfRange(ReachsetError, ValueError):
    """An arc length outside [0, total length] of a path."""


class InvalidGrid(ReachsetError, ValueError):
    """Empty resolutions or a candidate grid that emits nothing."""


class InvalidConfig(ReachsetError, ValueError):
    """A run configuration with unknown keys or out-of-range values."""


class TorsionSingularity(ReachsetError, ArithmeticError):
    """
    Raised when the torsion leaves [tau_min, tau_max] in magnitude during integration.

    Attributes:
        arc_length: arc length (in the caller's scale) at which integration stopped
        tau: last accepted torsion value
    """
    def __init__(self, arc_length: float, tau: float, message: Optional[str] = None):
        self.arc_length = float(arc_length)
        self.tau = float(tau)
        if message is None:
            message = f"torsion left the admissible band at s={self.arc_length:.6g} (tau={self.tau:.6g})"
        super().__init__(message)
