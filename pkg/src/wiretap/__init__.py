"""Wiretap-channel security metrics, channels and the extract-then-xor scheme."""

__version__ = "0.1.0"

from wiretap.errors import (
    ConvergenceError,
    ExactModeUnavailable,
    PreconditionNotMet,
    SizeCapExceeded,
    SpecParseError,
    WiretapError,
)
from wiretap.probcore import Dist, JointDist

__all__ = [
    "ConvergenceError",
    "Dist",
    "ExactModeUnavailable",
    "JointDist",
    "PreconditionNotMet",
    "SizeCapExceeded",
    "SpecParseError",
    "WiretapError",
    "__version__",
]
