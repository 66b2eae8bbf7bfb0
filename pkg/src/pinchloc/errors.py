"""Exception types shared across the package."""
from __future__ import annotations


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature cannot meet its tolerance.

    Carries the achieved absolute-error estimate so callers can decide
    whether to retry with looser targets or to flag the result.
    """

    def __init__(self, message: str, achieved_error: float):
        super().__init__(f"{message} (achieved error estimate {achieved_error:.3e})")
        self.achieved_error = achieved_error


class UnlocalizableError(ValueError):
    """Raised when the anchor geometry carries no position information.

    Typical causes: a singular Fisher information matrix (all anchors
    collinear with the target) or an all-zero bearing spread in the
    time-difference bound.
    """
