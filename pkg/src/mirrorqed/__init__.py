"""mirrorqed: a transmon on a semi-infinite high-impedance transmission line.

Frequency-domain scattering (open line and mirror-terminated), time-domain
spontaneous emission with delayed mirror feedback, complex-pole analysis
with residue reconstruction, and the equivalent atom-in-a-multimode-cavity
spectrum.

Convention used throughout: harmonic time dependence ``exp(+i*omega*t)``;
decaying modes are upper-half-plane poles.
"""

from .errors import (
    FitError,
    GridError,
    IntegrationError,
    MirrorQEDError,
    ParameterError,
    PoleSearchError,
    TruncationError,
)
from .params import CircuitParams, DerivedScales, derive, dimensionless, normalize
from .response import (
    ComplexResponse,
    coupled_detuning,
    full_reflection,
    line_detuning,
    open_line_denominator,
    reflection_open,
    refine_grid,
    transmission_open,
    transmon_grid,
    trapped_field,
)
from .fitting import AnalyticResonance, ResonanceFit, analytic_resonances, fit_resonance, lorentzian
from .emission import (
    EmissionConfig,
    TrajectoryState,
    dark_state_energy,
    energies,
    fit_decay_rate,
    integrate,
)
from .poles import (
    PoleSet,
    RabiComparison,
    Reconstruction,
    characteristic,
    characteristic_derivative,
    default_window,
    find_poles,
    open_line_poles,
    rabi_splitting_table,
    reconstruct,
    reconstruct_open_line,
)
from .hopfield import (
    HopfieldProblem,
    HopfieldSpectrum,
    OverlayResult,
    bosonicity,
    build,
    diagonalize,
    overlay,
)
from ._kernels import active_backend

__version__ = "0.1.0"

__all__ = [
    "CircuitParams", "DerivedScales", "derive", "dimensionless", "normalize",
    "ComplexResponse", "reflection_open", "transmission_open", "trapped_field",
    "full_reflection", "coupled_detuning", "line_detuning", "open_line_denominator",
    "transmon_grid", "refine_grid",
    "ResonanceFit", "AnalyticResonance", "fit_resonance", "analytic_resonances", "lorentzian",
    "EmissionConfig", "TrajectoryState", "integrate", "energies", "dark_state_energy",
    "fit_decay_rate",
    "PoleSet", "Reconstruction", "RabiComparison", "characteristic",
    "characteristic_derivative", "default_window", "find_poles", "open_line_poles",
    "reconstruct", "reconstruct_open_line", "rabi_splitting_table",
    "HopfieldProblem", "HopfieldSpectrum", "OverlayResult", "build", "diagonalize",
    "overlay", "bosonicity",
    "active_backend",
    "MirrorQEDError", "ParameterError", "GridError", "FitError", "IntegrationError",
    "PoleSearchError", "TruncationError",
    "__version__",
]
