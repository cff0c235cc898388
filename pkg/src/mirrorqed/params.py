"""Circuit parameters and closed-form derived scales.

The device is a linearized transmon (josephson inductance ``l_j`` in
parallel with capacitance ``c_j``) coupled through ``c_c`` to a
transmission line of characteristic impedance ``z_0``.  Optionally the
line is shorted to ground at a distance such that a signal emitted by the
transmon returns after the round-trip delay ``delay``; the shorted end
acts as a mirror and creates cavity modes at multiples of
``omega_c = 2*pi/delay``.

All other modules consume a validated :class:`CircuitParams`.  Internally
the package works in "transmon units" ``omega_j = 1``, ``z_j = 1``
(equivalently ``c_j = l_j = 1``); :func:`dimensionless` builds such a
parameter set from the ratios that parameterize every figure, and
:func:`normalize` converts an SI parameter set into those units.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import ParameterError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CircuitParams:
    """Physical parameter set (any consistent unit system).

    Attributes:
        c_c: coupling capacitance between transmon island and line node.
        c_j: transmon shunt capacitance.
        l_j: linearized Josephson inductance.
        z_0: characteristic impedance of the transmission line.
        delay: mirror round-trip time ``T = 2L/v``, or ``None`` for an
            open (semi-infinite both ways) line.  Mirror-dependent derived
            quantities are undefined without it.
    """

    c_c: float
    c_j: float
    l_j: float
    z_0: float
    delay: float | None = None

    def __post_init__(self):
        for name in ("c_c", "c_j", "l_j", "z_0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
        if self.delay is not None:
            if not (math.isfinite(self.delay) and self.delay > 0):
                raise ParameterError(f"delay must be a positive finite number, got {self.delay!r}")

    @property
    def mirror(self) -> bool:
        return self.delay is not None

    def require_mirror(self) -> float:
        if self.delay is None:
            raise ParameterError("operation requires a mirror (params.delay is None)")
        return self.delay

    def with_delay(self, delay: float | None) -> "CircuitParams":
        return dataclasses.replace(self, delay=delay)


@dataclass(frozen=True)
class DerivedScales:
    """Closed-form scales derived from a :class:`CircuitParams`.

    ``omega_c`` and ``rabi`` require a mirror and are ``None`` without one.
    ``gamma_j_mirror`` is the linewidth the transmon line takes *with* a
    mirror (exactly ``gamma_j / 2``); ``gamma_j``/``gamma_0`` are the
    open-line widths in the high-/low-impedance regimes.
    """

    omega_j: float          # bare transmon frequency 1/sqrt(l_j c_j)
    omega_0: float          # coupled transmon frequency 1/sqrt(l_j (c_c + c_j))
    c_sigma: float          # series capacitance c_c c_j / (c_c + c_j)
    z_j: float              # transmon impedance sqrt(l_j / c_j)
    gamma_j: float          # high-impedance open-line linewidth 2/(z_0 c_j)
    gamma_0: float          # low-impedance open-line linewidth
    gamma_j_mirror: float   # high-impedance linewidth with mirror, gamma_j/2
    omega_c: float | None   # fundamental cavity frequency 2*pi/delay
    rabi: float | None      # avoided-crossing splitting 2/sqrt(delay c_j z_0)


def derive(params: CircuitParams) -> DerivedScales:
    """Evaluate every derived scale; mirror-dependent ones are None without a mirror."""
    c_c, c_j, l_j, z_0 = params.c_c, params.c_j, params.l_j, params.z_0
    omega_j = 1.0 / math.sqrt(l_j * c_j)
    omega_0 = 1.0 / math.sqrt(l_j * (c_c + c_j))
    c_sigma = c_c * c_j / (c_c + c_j)
    z_j = math.sqrt(l_j / c_j)
    gamma_j = 2.0 / (z_0 * c_j)
    gamma_0 = z_0 * c_c**2 / (2.0 * l_j * (c_j + c_c) ** 2)
    if params.delay is not None:
        omega_c = TWO_PI / params.delay
        rabi = 2.0 / math.sqrt(params.delay * c_j * z_0)
    else:
        omega_c = None
        rabi = None
    return DerivedScales(
        omega_j=omega_j,
        omega_0=omega_0,
        c_sigma=c_sigma,
        z_j=z_j,
        gamma_j=gamma_j,
        gamma_0=gamma_0,
        gamma_j_mirror=gamma_j / 2.0,
        omega_c=omega_c,
        rabi=rabi,
    )


def dimensionless(
    cc_over_cj: float,
    z0_over_zj: float,
    omega_c_over_omega_j: float | None = None,
    n: int = 1,
    delay: float | None = None,
) -> CircuitParams:
    """Build a parameter set in transmon units from dimensionless ratios.

    Returns params with ``c_j = l_j = 1`` (so ``omega_j = z_j = 1``),
    ``c_c = cc_over_cj`` and ``z_0 = z0_over_zj``.  The mirror is placed
    either through ``omega_c_over_omega_j`` (the n-th cavity resonance,
    ``delay = 2*pi*n / omega_c``) or through an explicit ``delay``; giving
    both inconsistently is an error, giving neither yields an open line.
    """
    if cc_over_cj <= 0 or z0_over_zj <= 0:
        raise ParameterError("ratios must be positive")
    if n < 1 or int(n) != n:
        raise ParameterError(f"resonance index n must be a positive integer, got {n!r}")
    t = None
    if omega_c_over_omega_j is not None:
        if omega_c_over_omega_j <= 0:
            raise ParameterError("omega_c_over_omega_j must be positive")
        t = TWO_PI * n / omega_c_over_omega_j
        if delay is not None and not math.isclose(delay, t, rel_tol=1e-9):
            raise ParameterError(
                f"contradictory delay specification: delay={delay!r} vs "
                f"2*pi*{n}/omega_c={t!r}"
            )
    elif delay is not None:
        if delay <= 0:
            raise ParameterError("delay must be positive")
        t = delay
    return CircuitParams(c_c=cc_over_cj, c_j=1.0, l_j=1.0, z_0=z0_over_zj, delay=t)


def normalize(params: CircuitParams) -> tuple[CircuitParams, DerivedScales]:
    """Convert an arbitrary-unit (e.g. SI) parameter set to transmon units.

    Returns the dimensionless equivalent together with the original scales
    so results can be mapped back (frequencies scale with ``omega_j``,
    impedances with ``z_j``, times with ``1/omega_j``).
    """
    scales = derive(params)
    delay = None if params.delay is None else params.delay * scales.omega_j
    return (
        CircuitParams(
            c_c=params.c_c / params.c_j,
            c_j=1.0,
            l_j=1.0,
            z_0=params.z_0 / scales.z_j,
            delay=delay,
        ),
        scales,
    )
