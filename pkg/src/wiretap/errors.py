"""Exception hierarchy shared by every module."""

import os

DEFAULT_SIZE_CAP = 2**20


class WiretapError(Exception):
    """Base class for library errors."""


class SizeCapExceeded(WiretapError):
    """An exact computation would enumerate more outcomes than allowed."""

    def __init__(self, what, size, cap):
        super().__init__(
            f"{what}: {size} outcomes exceeds enumeration cap {cap} "
            "(raise --cap / WIRETAP_SIZE_CAP or use monte-carlo mode)"
        )
        self.size = size
        self.cap = cap


class ExactModeUnavailable(WiretapError):
    """Exact law requested from a sampler-only object."""


class PreconditionNotMet(WiretapError):
    """A theorem's hypotheses do not hold for the given instance."""


class ConvergenceError(WiretapError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class SpecParseError(WiretapError, ValueError):
    def __init__(self, message, text="", pos=0):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


_cap_override = None


def size_cap():
    """Current enumeration cap: explicit override, then WIRETAP_SIZE_CAP, then 2^20."""
    if _cap_override is not None:
        return _cap_override
    env = os.environ.get("WIRETAP_SIZE_CAP")
    if env:
        return int(float(env))
    return DEFAULT_SIZE_CAP


def set_size_cap(cap):
    """Override the enumeration cap for this process; ``None`` restores the default."""
    global _cap_override
    _cap_override = None if cap is None else int(cap)


def check_cap(what, size):
    cap = size_cap()
    if size > cap:
        raise SizeCapExceeded(what, size, cap)
