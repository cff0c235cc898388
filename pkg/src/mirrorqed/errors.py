"""Exception hierarchy shared across the package."""


class MirrorQEDError(Exception):
    """Base class for numerical and validation failures raised by mirrorqed."""


class ParameterError(MirrorQEDError, ValueError):
    """Invalid circuit parameters or dimensionless ratios."""


class GridError(MirrorQEDError, ValueError):
    """Frequency or time grid violates a precondition."""


class FitError(MirrorQEDError, RuntimeError):
    """Resonance fit could not be performed or did not converge."""


class IntegrationError(MirrorQEDError, RuntimeError):
    """Time-domain integration violated an invariant (e.g. energy growth)."""


class PoleSearchError(MirrorQEDError, RuntimeError):
    """Complex root search failed (boundary zero, non-convergence, miscount)."""


class TruncationError(MirrorQEDError, RuntimeError):
    """Residue reconstruction is missing too much weight from excluded poles."""
