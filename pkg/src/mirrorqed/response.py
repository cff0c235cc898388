"""Frequency-domain scattering response of the transmon-loaded line.

Sign convention, used everywhere in this package: harmonic time dependence
``exp(+i*omega*t)``, so a round-trip delay ``T`` enters as
``exp(-i*omega*T)`` and decaying resonances are poles in the *upper* half
of the complex frequency plane.  With this choice the open-line amplitudes

    r(omega) = -i*B / (A + i*B),      t(omega) = A / (A + i*B),

where ``A(omega) = 1 - (omega/omega_0)**2`` is the detuning factor of the
coupled resonance and ``B(omega) = (c_c*z_0/2)*omega*(1 - (omega/omega_J)**2)``
is the line-loaded detuning factor, satisfy the exact identities

    t = 1 + r,      |r|**2 + |t|**2 = 1        (real omega),

which fix all signs: ``r(omega_0) = -1`` (resonant short), ``r(omega_J) = 0``
(the loaded factor vanishes, the line transmits freely).  The same
convention makes the undriven time-domain circuit of :mod:`.emission`
strictly dissipative; see the README for the derivation.

With a mirror the full reflection has unit modulus and the quantity of
interest is the trapped-field ratio between qubit and mirror,

    f(omega) = A / (A + i*B*(1 - exp(-i*omega*T))).

``f`` is indeterminate (0/0) exactly at ``omega = omega_0`` when
``omega_0*T`` is a multiple of ``2*pi`` (the dark-state condition); there
it is evaluated by its limit ``1/(1 + T*gamma_0/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GridError, ParameterError
from .params import CircuitParams, derive

KIND_REFLECTION = "reflection_r"
KIND_TRANSMISSION = "transmission_t"
KIND_TRAPPED = "trapped_f"
_KINDS = (KIND_REFLECTION, KIND_TRANSMISSION, KIND_TRAPPED)


@dataclass(frozen=True)
class ComplexResponse:
    """Sampled complex frequency response on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.size < 2:
            raise GridError("grid must be a 1-D array with at least two points")
        if not np.all(np.diff(grid) > 0):
            raise GridError("grid must be strictly increasing")
        if values.shape != grid.shape:
            raise GridError("values must have the same shape as grid")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.kind not in _KINDS:
            raise GridError(f"unknown response kind {self.kind!r}")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise GridError("frequency grid must contain only omega > 0")
    return grid


def coupled_detuning(params: CircuitParams, omega):
    """A(omega) = 1 - (omega/omega_0)**2, zero at the coupled resonance."""
    omega = np.asarray(omega)
    omega_0_sq = 1.0 / (params.l_j * (params.c_c + params.c_j))
    return 1.0 - omega * omega / omega_0_sq


def line_detuning(params: CircuitParams, omega):
    """B(omega) = (c_c z_0 / 2) * omega * (1 - (omega/omega_J)**2).

    Zero at the bare resonance; |B| >> |A| is the high-impedance regime.
    """
    omega = np.asarray(omega)
    omega_j_sq = 1.0 / (params.l_j * params.c_j)
    return 0.5 * params.c_c * params.z_0 * omega * (1.0 - omega * omega / omega_j_sq)


def open_line_denominator(params: CircuitParams, omega):
    """N(omega) = A + i*B, the common denominator of r and t."""
    return coupled_detuning(params, omega) + 1j * line_detuning(params, omega)


def reflection_open(params: CircuitParams, grid) -> ComplexResponse:
    """Reflection r(omega) of the transmon on the open line."""
    grid = _check_grid(grid)
    b = line_detuning(params, grid)
    r = -1j * b / (coupled_detuning(params, grid) + 1j * b)
    return ComplexResponse(grid=grid, values=r, kind=KIND_REFLECTION)


def transmission_open(params: CircuitParams, grid) -> ComplexResponse:
    """Transmission t(omega) = 1 + r(omega) across the transmon."""
    grid = _check_grid(grid)
    a = coupled_detuning(params, grid)
    t = a / (a + 1j * line_detuning(params, grid))
    return ComplexResponse(grid=grid, values=t, kind=KIND_TRANSMISSION)


def trapped_field(params: CircuitParams, grid) -> ComplexResponse:
    """Trapped-field ratio f(omega) between transmon and mirror.

    Dark-state points (A = 0 together with omega*T at a multiple of 2*pi)
    are 0/0 and are filled with the analytic limit A'/(A' - T*B).
    """
    t_delay = params.require_mirror()
    grid = _check_grid(grid)
    a = coupled_detuning(params, grid)
    b = line_detuning(params, grid)
    loop = 1.0 - np.exp(-1j * grid * t_delay)
    den = a + 1j * b * loop
    scale = np.abs(a) + np.abs(b) * (1.0 + np.abs(loop)) + 1e-300
    degenerate = np.abs(den) < 1e-12 * scale
    safe_den = np.where(degenerate, 1.0, den)
    f = np.where(degenerate, 0.0, a / safe_den)
    if np.any(degenerate):
        omega_0_sq = 1.0 / (params.l_j * (params.c_c + params.c_j))
        a_slope = -2.0 * grid / omega_0_sq
        f = np.where(degenerate, a_slope / (a_slope - t_delay * b), f)
    return ComplexResponse(grid=grid, values=f, kind=KIND_TRAPPED)


def full_reflection(params: CircuitParams, grid, method: str = "composition") -> ComplexResponse:
    """Reflection of the mirror-terminated system seen from the open side.

    ``method="composition"`` assembles it from the open-line amplitudes and
    the trapped field, ``r - t * f * exp(-i*omega*T)``; ``method="direct"``
    uses the closed form ``f*(1 - exp(-i*omega*T)) - 1`` obtained by solving
    the transformed equations of motion.  Both agree identically and have
    unit modulus on the real axis.
    """
    t_delay = params.require_mirror()
    grid = _check_grid(grid)
    phase = np.exp(-1j * grid * t_delay)
    f = trapped_field(params, grid).values
    if method == "composition":
        r = reflection_open(params, grid).values
        t = transmission_open(params, grid).values
        values = r - t * f * phase
    elif method == "direct":
        values = f * (1.0 - phase) - 1.0
    else:
        raise ParameterError(f"unknown method {method!r}")
    return ComplexResponse(grid=grid, values=values, kind=KIND_REFLECTION)


def transmon_grid(params: CircuitParams, span: float = 0.1, points: int = 4001) -> np.ndarray:
    """Default grid around the bare transmon frequency, [1-span, 1+span]*omega_j."""
    omega_j = derive(params).omega_j
    return np.linspace((1.0 - span) * omega_j, (1.0 + span) * omega_j, points)


def refine_grid(
    evaluate: Callable[[np.ndarray], np.ndarray],
    base_grid,
    levels: int = 3,
    factor: int = 8,
    threshold: float = 10.0,
) -> np.ndarray:
    """Refine a frequency grid where the sampled |response| varies rapidly.

    Narrow resonances (width ~1e-3 omega_j in the high-impedance regime)
    are missed by coarse uniform grids; wherever the local derivative of
    ``|evaluate(grid)|`` exceeds ``threshold`` times its median, the
    bracketing intervals are subdivided ``factor`` times, repeated
    ``levels`` times.  Returns the merged, strictly increasing grid.
    """
    grid = np.asarray(base_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise GridError("base grid must be 1-D with at least three points")
    for _ in range(levels):
        mag = np.abs(evaluate(grid))
        slope = np.abs(np.diff(mag)) / np.diff(grid)
        cut = threshold * max(np.median(slope), 1e-300)
        hot = np.flatnonzero(slope > cut)
        if hot.size == 0:
            break
        inserts = []
        for i in hot:
            inserts.append(np.linspace(grid[i], grid[i + 1], factor + 1)[1:-1])
        grid = np.unique(np.concatenate([grid] + inserts))
    return grid
