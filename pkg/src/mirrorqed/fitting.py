"""Resonance extraction: Lorentzian fits and single-pole closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitError, ParameterError
from .params import CircuitParams, derive
from .response import ComplexResponse, coupled_detuning, line_detuning

MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class ResonanceFit:
    """Lorentzian fit of a |response|^2 peak (or 1-|response|^2 dip)."""

    center: float
    fwhm: float
    amplitude: float
    residual: float     # RMS of (data - model) in the fitted profile
    kind: str           # "peak" or "dip"


def lorentzian(omega, amplitude, center, fwhm, offset):
    """amplitude / (1 + 4*(omega-center)**2/fwhm**2) + offset"""
    return amplitude / (1.0 + 4.0 * (omega - center) ** 2 / fwhm**2) + offset


def fit_resonance(response: ComplexResponse, window: tuple[float, float], kind: str = "auto") -> ResonanceFit:
    """Least-squares Lorentzian fit of one resonance inside ``window``.

    The profile fitted is ``|values|**2`` for peaks and ``1 - |values|**2``
    for dips, each with a free constant background.  The window must bracket
    a single resonance; multi-peak windows show up as a large residual.

    Raises:
        FitError: fewer than 8 grid points in the window, or the fit does
            not converge / returns a non-positive width.
    """
    lo, hi = window
    mask = (response.grid >= lo) & (response.grid <= hi)
    if np.count_nonzero(mask) < MIN_FIT_POINTS:
        raise FitError(
            f"window [{lo}, {hi}] contains {np.count_nonzero(mask)} grid points, "
            f"need at least {MIN_FIT_POINTS}"
        )
    x = response.grid[mask]
    power = np.abs(response.values[mask]) ** 2

    if kind == "auto":
        edges = 0.5 * (np.median(power[: max(3, x.size // 10)]) + np.median(power[-max(3, x.size // 10):]))
        kind = "dip" if (edges - power.min()) > (power.max() - edges) else "peak"
    if kind not in ("peak", "dip"):
        raise ParameterError(f"kind must be 'auto', 'peak' or 'dip', got {kind!r}")

    y = 1.0 - power if kind == "dip" else power

    i0 = int(np.argmax(y))
    offset0 = float(np.min(y))
    amp0 = float(y[i0] - offset0)
    if amp0 <= 0:
        raise FitError("window contains no resonant structure (flat profile)")
    half = offset0 + 0.5 * amp0
    above = y >= half
    left = i0
    while left > 0 and above[left - 1]:
        left -= 1
    right = i0
    while right < y.size - 1 and above[right + 1]:
        right += 1
    fwhm0 = max(x[right] - x[left], 2.0 * np.min(np.diff(x)))

    try:
        popt, _ = curve_fit(
            lorentzian,
            x,
            y,
            p0=(amp0, x[i0], fwhm0, offset0),
            bounds=([ 0.0, x[0], 0.0, -np.inf], [np.inf, x[-1], np.inf, np.inf]),
            maxfev=20000,
        )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"Lorentzian fit did not converge: {exc}") from exc
    amplitude, center, fwhm, offset = popt
    if fwhm <= 0 or not np.isfinite(fwhm):
        raise FitError(f"fit returned invalid width {fwhm!r}")
    residual = float(np.sqrt(np.mean((lorentzian(x, *popt) - y) ** 2)))
    return ResonanceFit(center=float(center), fwhm=float(fwhm), amplitude=float(amplitude),
                        residual=residual, kind=kind)


@dataclass(frozen=True)
class AnalyticResonance:
    """Single-pole estimate of a resonance: shifted center and FWHM."""

    label: str
    center: float
    width: float
    valid: bool


def analytic_resonances(params: CircuitParams, n_max: int) -> list[AnalyticResonance]:
    """Closed-form centers/widths of the mirror-terminated resonances.

    Returns the low-impedance qubit line (center ``omega_0`` plus its
    mirror-induced shift, width ``2*gamma_0*sin(omega_0*T/2)**2``), the
    high-impedance transmon line (center ``omega_J + (gamma_J/4)*cot(omega_J*T/2)``,
    width ``gamma_J/2``) and cavity modes ``n = 1..n_max`` (centers pulled
    by the finite transmission, widths ``|t(n*omega_c)|**2 / T``).

    The single-pole expansion behind the transmon line (and the cavity mode
    closest to it) breaks down near the avoided crossing; those entries are
    flagged ``valid=False`` when ``|sin(omega_J*T/2)| < 0.1``.
    """
    t_delay = params.require_mirror()
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    scales = derive(params)
    out: list[AnalyticResonance] = []

    half_phase = math.sin(scales.omega_j * t_delay / 2.0)
    near_crossing = abs(half_phase) < 0.1

    out.append(AnalyticResonance(
        label="qubit",
        center=scales.omega_0 + scales.gamma_0 * math.sin(scales.omega_0 * t_delay) / 2.0,
        width=2.0 * scales.gamma_0 * math.sin(scales.omega_0 * t_delay / 2.0) ** 2,
        valid=True,
    ))
    if near_crossing:
        transmon_center = scales.omega_j
    else:
        transmon_center = scales.omega_j + 0.25 * scales.gamma_j / math.tan(scales.omega_j * t_delay / 2.0)
    out.append(AnalyticResonance(
        label="transmon",
        center=transmon_center,
        width=scales.gamma_j_mirror,
        valid=not near_crossing,
    ))

    omega_c = scales.omega_c
    nearest = max(1, round(scales.omega_j / omega_c))
    for n in range(1, n_max + 1):
        mode = n * omega_c
        a = float(coupled_detuning(params, mode))
        b = float(line_detuning(params, mode))
        n_sq = a * a + b * b
        trans_sq = a * a / n_sq          # |t|^2 at the bare mode frequency
        if abs(b) < 1e-12 * (abs(a) + 1e-300):
            center, valid = mode, False  # mode degenerate with omega_J, no pulling formula
        else:
            center = mode + a / (t_delay * b)
            valid = not (near_crossing and n == nearest)
        out.append(AnalyticResonance(
            label=f"cavity_{n}",
            center=center,
            width=trans_sq / t_delay,
            valid=valid,
        ))
    return out
