"""Complex-plane analysis of the mirror-terminated response.

The characteristic function is the analytic continuation of the
trapped-field denominator,

    D(z) = A(z) + i*B(z)*(1 - exp(-i*z*T))        (convention +1)

with A, B the detuning factors of :mod:`.response`.  Free modes of the
circuit are zeros of D; under the package-wide ``exp(+i*omega*t)``
convention decaying modes sit in the upper half plane (``convention=+1``,
the default).  ``convention=-1`` evaluates the mirrored function
``A - i*B*(1 - exp(+i*z*T))`` whose zeros are the complex conjugates --
the flag flips every pole's imaginary part and nothing else observable.

Zeros are located by an argument-principle count on rectangles (adaptive
contour sampling of D with an integrality check on the winding number),
recursive bisection until each cell holds one zero, and a Newton polish.
Residue sums over the located poles reconstruct the spontaneous-emission
trajectories semi-analytically; the overall constant is fixed by matching
the initial conditions, and the pre-normalization mismatch is reported as
the truncation metric.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PoleSearchError, TruncationError
from .params import CircuitParams, derive
from .response import coupled_detuning, line_detuning

_WINDING_TOL = 1e-3
_NEWTON_TARGET = 1e-12
_MIN_CELL_FRACTION = 1e-7


def characteristic(params: CircuitParams, z, convention: int = +1):
    """Characteristic function D(z) of the mirror-terminated circuit."""
    t_delay = params.require_mirror()
    z = np.asarray(z, dtype=complex)
    a = coupled_detuning(params, z)
    b = line_detuning(params, z)
    if convention == +1:
        return a + 1j * b * (1.0 - np.exp(-1j * z * t_delay))
    if convention == -1:
        return a - 1j * b * (1.0 - np.exp(1j * z * t_delay))
    raise ParameterError(f"convention must be +1 or -1, got {convention!r}")


def characteristic_derivative(params: CircuitParams, z, convention: int = +1):
    t_delay = params.require_mirror()
    z = np.asarray(z, dtype=complex)
    omega_0_sq = 1.0 / (params.l_j * (params.c_c + params.c_j))
    omega_j_sq = 1.0 / (params.l_j * params.c_j)
    a_prime = -2.0 * z / omega_0_sq
    b = line_detuning(params, z)
    b_prime = 0.5 * params.c_c * params.z_0 * (1.0 - 3.0 * z * z / omega_j_sq)
    if convention == +1:
        loop_phase = np.exp(-1j * z * t_delay)
        return a_prime + 1j * b_prime * (1.0 - loop_phase) - b * t_delay * loop_phase
    if convention == -1:
        loop_phase = np.exp(1j * z * t_delay)
        return a_prime - 1j * b_prime * (1.0 - loop_phase) - b * t_delay * loop_phase
    raise ParameterError(f"convention must be +1 or -1, got {convention!r}")


def characteristic_scale(params: CircuitParams, z, convention: int = +1):
    """Round-off envelope of D at z: the sum of its term magnitudes.

    |D| below ~1e-12 of this scale is numerically indistinguishable from an
    exact zero (the monomials of the detuning factors cancel at that level
    in double precision), so all smallness tests are relative to it.
    """
    t_delay = params.require_mirror()
    z = np.asarray(z, dtype=complex)
    abs_z = np.abs(z)
    omega_0_sq = 1.0 / (params.l_j * (params.c_c + params.c_j))
    omega_j_sq = 1.0 / (params.l_j * params.c_j)
    a_terms = 1.0 + abs_z * abs_z / omega_0_sq
    b_terms = 0.5 * params.c_c * params.z_0 * abs_z * (1.0 + abs_z * abs_z / omega_j_sq)
    phase = np.exp(-1j * z * t_delay) if convention == +1 else np.exp(1j * z * t_delay)
    return a_terms + b_terms * (1.0 + np.abs(phase)) + 1e-300


def open_line_poles(params: CircuitParams, convention: int = +1) -> np.ndarray:
    """Exact poles of the open-line response: roots of the cubic A + i*B.

    Independent of the contour machinery (numpy polynomial roots); used to
    cross-check the finder and to reconstruct open-line trajectories.
    """
    omega_0_sq = 1.0 / (params.l_j * (params.c_c + params.c_j))
    omega_j_sq = 1.0 / (params.l_j * params.c_j)
    half_cz = 0.5 * params.c_c * params.z_0
    # A + iB = 1 - z^2/w0^2 + i*half_cz*(z - z^3/wj^2)
    coeffs = [-1j * half_cz / omega_j_sq, -1.0 / omega_0_sq, 1j * half_cz, 1.0]
    roots = np.roots(coeffs)
    return roots if convention == +1 else np.conj(roots)


@dataclass(frozen=True)
class PoleSet:
    """Zeros of the characteristic function inside a search window."""

    poles: np.ndarray              # complex, decaying side per `convention`
    residues: dict[str, np.ndarray]   # per-pole residues of phi_j, p_j, p_0
    search_window: tuple[float, float, float, float]   # re_lo, re_hi, im_lo, im_hi
    method_report: dict
    convention: int
    params: CircuitParams

    def widths(self) -> np.ndarray:
        """FWHM-equivalent width of each pole, 2*|Im z|."""
        return 2.0 * np.abs(self.poles.imag)


def default_window(params: CircuitParams, convention: int = +1) -> tuple[float, float, float, float]:
    """Re in [0.5, 3.5]*omega_j; Im covering the decaying side up to 5*gamma_j.

    A slight overshoot past the real axis keeps undamped (dark-state) poles
    strictly interior to the contour.
    """
    scales = derive(params)
    im_lo, im_hi = -0.5 * scales.gamma_j, 5.0 * scales.gamma_j
    if convention == -1:
        im_lo, im_hi = -im_hi, -im_lo
    return (0.5 * scales.omega_j, 3.5 * scales.omega_j, im_lo, im_hi)


_MAX_SEGMENT_DEPTH = 48


def _contour_count(params, rect, convention, report) -> int:
    """Winding number of D around a rectangle by adaptive contour sampling.

    Each contour segment is bisected until the phase of D advances by less
    than pi/2 across it (so the per-segment contribution to the integral of
    D'/D is the unambiguous principal-branch log difference); zeros on or
    hugging the contour surface as tiny |D| relative to its term scale and
    are reported for a window nudge.  The closed-loop total must land on an
    integer to 1e-3 before the count is trusted.
    """
    re_lo, re_hi, im_lo, im_hi = rect
    corners = [re_lo + 1j * im_lo, re_hi + 1j * im_lo, re_hi + 1j * im_hi,
               re_lo + 1j * im_hi, re_lo + 1j * im_lo]

    def probe(z: complex) -> tuple[complex, float]:
        report["contour_evaluations"] = report.get("contour_evaluations", 0) + 1
        f = complex(characteristic(params, z, convention))
        if abs(f) < 1e-11 * float(characteristic_scale(params, z, convention)):
            raise _BoundaryZero(rect)
        # local inverse phase-rate |D/D'|: a lower-bound scale for how far z
        # may move before the phase of D can wrap
        d = complex(characteristic_derivative(params, z, convention))
        return f, (abs(f) / abs(d) if d != 0 else 0.0)

    total_phase = 0.0
    for a, b in zip(corners[:-1], corners[1:]):
        stack = [(a, probe(a), b, probe(b), 0)]
        while stack:
            z1, (f1, s1), z2, (f2, s2), depth = stack.pop()
            seg = abs(z2 - z1)
            dphi1 = cmath.phase(f2 / f1)
            safe = min(s1, s2)
            if depth >= 2 and safe > 0 and seg < safe and abs(dphi1) < 0.5 * math.pi:
                total_phase += dphi1
                continue
            if depth >= _MAX_SEGMENT_DEPTH:
                raise PoleSearchError(
                    f"contour phase of D does not resolve on {rect} near {z1}"
                )
            zm = 0.5 * (z1 + z2)
            pm = probe(zm)
            stack.append((zm, pm, z2, (f2, s2), depth + 1))
            stack.append((z1, (f1, s1), zm, pm, depth + 1))
    winding = total_phase / (2.0 * math.pi)
    if abs(winding - round(winding)) > _WINDING_TOL:
        raise PoleSearchError(
            f"winding number {winding} is not an integer to {_WINDING_TOL} on {rect}"
        )
    return int(round(winding))


class _BoundaryZero(Exception):
    def __init__(self, rect):
        self.rect = rect


def _newton_polish(params, z0, rect, convention, report) -> complex:
    re_lo, re_hi, im_lo, im_hi = rect
    # let the iteration wander on the scale of the larger cell dimension, but
    # accept a root only if it lies inside the cell it was counted in -- a
    # neighboring cell's root must be rejected here or it would be collected
    # twice while this cell's own root goes missing
    wander = 0.6 * max(re_hi - re_lo, im_hi - im_lo)
    pad_re = 1e-6 * (re_hi - re_lo) + 1e-15
    pad_im = 1e-6 * (im_hi - im_lo) + 1e-15
    starts = [z0]
    # quasi-random fallback starts inside the cell
    for k in range(1, 6):
        starts.append(complex(re_lo + ((k * 0.381966) % 1.0) * (re_hi - re_lo),
                              im_lo + ((k * 0.618034) % 1.0) * (im_hi - im_lo)))
    for start in starts:
        z = complex(start)
        ok = True
        for _ in range(80):
            f = complex(characteristic(params, z, convention))
            scale = float(characteristic_scale(params, z, convention))
            if abs(f) < _NEWTON_TARGET * scale:
                break
            d = complex(characteristic_derivative(params, z, convention))
            if d == 0:
                ok = False
                break
            z -= f / d
            report["newton_iterations"] = report.get("newton_iterations", 0) + 1
            if not (re_lo - wander <= z.real <= re_hi + wander
                    and im_lo - wander <= z.imag <= im_hi + wander):
                ok = False
                break
        else:
            ok = False
        if (ok
                and re_lo - pad_re <= z.real <= re_hi + pad_re
                and im_lo - pad_im <= z.imag <= im_hi + pad_im
                and abs(complex(characteristic(params, z, convention)))
                < _NEWTON_TARGET * float(characteristic_scale(params, z, convention))):
            return z
    raise PoleSearchError(f"Newton polish failed to converge inside cell {rect}")


def _count_with_nudges(params, rect, convention, report):
    """Contour count; a zero (near the) boundary expands the rectangle a little."""
    grow = 1e-4
    for _ in range(6):
        try:
            return _contour_count(params, rect, convention, report), rect
        except _BoundaryZero:
            re_lo, re_hi, im_lo, im_hi = rect
            eps_re = grow * (re_hi - re_lo) + 1e-12
            eps_im = grow * (im_hi - im_lo) + 1e-12
            report["boundary_nudges"] = report.get("boundary_nudges", 0) + 1
            rect = (re_lo - eps_re, re_hi + eps_re, im_lo - eps_im, im_hi + eps_im)
            grow *= 4.0
    raise PoleSearchError(
        f"zero keeps sitting on the contour of {rect} after repeated expansion"
    )


def _locate(params, rect, count, convention, report, found, min_cell):
    """Recursively isolate `count` known zeros inside a boundary-clear rect."""
    report["cells_visited"] = report.get("cells_visited", 0) + 1
    if count == 0:
        return
    re_lo, re_hi, im_lo, im_hi = rect
    width, height = re_hi - re_lo, im_hi - im_lo
    at_floor = max(width, height) < min_cell
    if count > 1 and at_floor:
        raise PoleSearchError(
            f"cell {rect} still holds {count} zeros at minimum size "
            "(degenerate or near-degenerate pole)"
        )
    if count == 1:
        z0 = complex(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi))
        try:
            found.append(_newton_polish(params, z0, rect, convention, report))
            return
        except PoleSearchError:
            if at_floor:
                raise
            # cell too coarse for a local Newton basin; keep splitting
    # split the longer side; shift the cut when a zero sits on it
    for attempt in range(4):
        frac = 0.5 + 0.04 * attempt
        if width >= height:
            cut = re_lo + frac * width
            halves = [(re_lo, cut, im_lo, im_hi), (cut, re_hi, im_lo, im_hi)]
        else:
            cut = im_lo + frac * height
            halves = [(re_lo, re_hi, im_lo, cut), (re_lo, re_hi, cut, im_hi)]
        try:
            counts = [_contour_count(params, half, convention, report) for half in halves]
        except _BoundaryZero:
            report["cut_shifts"] = report.get("cut_shifts", 0) + 1
            continue
        if sum(counts) != count:
            raise PoleSearchError(
                f"zero count is not conserved when splitting {rect}: "
                f"{count} != {counts[0]} + {counts[1]}"
            )
        for half, c in zip(halves, counts):
            _locate(params, half, c, convention, report, found, min_cell)
        return
    raise PoleSearchError(f"could not place a zero-free cut inside {rect}")


def find_poles(
    params: CircuitParams,
    window: tuple[float, float, float, float] | None = None,
    convention: int = +1,
    initial_phi_j: float = 1.0,
) -> PoleSet:
    """Locate all zeros of the characteristic function inside a rectangle.

    The contour count is re-checked against the number of polished roots;
    disagreement raises.  Residues of the circuit variables at each pole
    are evaluated for use in :func:`reconstruct`.
    """
    params.require_mirror()
    if window is None:
        window = default_window(params, convention)
    re_lo, re_hi, im_lo, im_hi = window
    if not (re_hi > re_lo and im_hi > im_lo):
        raise ParameterError(f"degenerate search window {window}")
    report: dict = {}
    found: list = []
    min_cell = _MIN_CELL_FRACTION * max(re_hi - re_lo, im_hi - im_lo)
    total, window = _count_with_nudges(params, window, convention, report)
    report["window_count"] = total
    if total > 0:
        _locate(params, window, total, convention, report, found, min_cell)
    poles = np.array(found, dtype=complex)
    # dedupe (Newton basins can overlap across adjacent cells)
    if poles.size > 1:
        keep = []
        for z in poles:
            if all(abs(z - w) > 1e-9 * max(abs(z), 1.0) for w in keep):
                keep.append(z)
        poles = np.array(keep, dtype=complex)
    if poles.size != total:
        raise PoleSearchError(
            f"contour predicts {total} zeros in {window} but polishing produced {poles.size}"
        )
    poles = poles[np.argsort(poles.real)]
    residues = _residues(params, poles, convention, initial_phi_j)
    return PoleSet(
        poles=poles,
        residues=residues,
        search_window=tuple(window),
        method_report=report,
        convention=convention,
        params=params,
    )


# --- residues and reconstruction --------------------------------------------
#
# In the Laplace domain (signals ~ exp(s*t), s = i*z for convention +1) the
# free solution with phi_j(0) = phi0, p_j(0) = p_0(0) = 0 reads
#
#   P0(s) = (2 phi0 / z_0) / Delta(s)
#   Delta(s) = (s (1 - exp(-s T)) + a_sigma) (1 + s^2/omega_j^2) - a_j
#   PJ(s) = -(P0(s) + c_j phi0) / (1 + s^2/omega_j^2)
#   Phi(s) = s l_j (P0(s) + c_j phi0) / (1 + s^2/omega_j^2)
#
# with a_sigma = 2/(z_0 c_sigma), a_j = 2/(z_0 c_j).  Delta is proportional
# to the characteristic function: (c_c z_0 / 2) Delta(i z) = D(z), so the
# located zeros are exactly the solution poles; the apparent poles at
# s = +-i*omega_j cancel (P0 + c_j phi0 vanishes there).


def _delta_prime(params: CircuitParams, s, mirror: bool):
    scales = derive(params)
    a_sigma = 2.0 / (params.z_0 * scales.c_sigma)
    omega_j_sq = scales.omega_j**2
    s = np.asarray(s, dtype=complex)
    if mirror:
        t_delay = params.require_mirror()
        decay = np.exp(-s * t_delay)
        head = s * (1.0 - decay) + a_sigma
        head_prime = 1.0 - decay + s * t_delay * decay
    else:
        head = s + a_sigma
        head_prime = np.ones_like(s)
    return head_prime * (1.0 + s * s / omega_j_sq) + head * (2.0 * s / omega_j_sq)


def _residues(params, poles_z, convention, phi0, mirror=True) -> dict[str, np.ndarray]:
    s = 1j * poles_z if convention == +1 else 1j * np.conj(poles_z)
    omega_j_sq = derive(params).omega_j ** 2
    dprime = _delta_prime(params, s, mirror)
    res_p0 = (2.0 * phi0 / params.z_0) / dprime
    mode_factor = 1.0 + s * s / omega_j_sq
    res_pj = -res_p0 / mode_factor
    res_phi = s * params.l_j * res_p0 / mode_factor
    return {"phi_j": res_phi, "p_j": res_pj, "p_0": res_p0}


@dataclass(frozen=True)
class Reconstruction:
    """Residue-sum trajectories, rescaled to exact phi_j(0)."""

    t: np.ndarray
    phi_j: np.ndarray
    p_j: np.ndarray
    p_0: np.ndarray
    e_q: np.ndarray
    scale: float
    mismatch_phi_j: float   # pre-normalization relative error of phi_j(0)
    mismatch_p_j: float     # |p_j(0)| in units of the natural charge phi0*sqrt(c_j/l_j)


def _fold_to_positive_real(poles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map each pole onto its Re >= 0 representative and weight the pairs.

    Real signals pair every pole z with a partner at -conj(z); keeping one
    representative per pair (weight 2, or 1 for purely imaginary poles)
    avoids double counting when a search window straddles Re = 0.
    """
    folded = np.where(poles.real < -1e-12, -np.conj(poles), poles)
    keep: list[complex] = []
    for z in folded:
        if all(abs(z - w) > 1e-10 * max(abs(z), 1.0) for w in keep):
            keep.append(complex(z))
    folded = np.array(keep, dtype=complex)
    weights = np.where(np.abs(folded.real) > 1e-12, 2.0, 1.0)
    return folded, weights


def reconstruct(
    params: CircuitParams,
    pole_set: PoleSet,
    t_grid,
    initial_phi_j: float = 1.0,
    mismatch_limit: float = 0.01,
) -> Reconstruction:
    """Sum-over-residues trajectories from a located pole set.

    Poles with positive real part are paired with their mirror partners at
    ``-conj(z)`` (required for real signals), which doubles their real
    contribution.  The sum is rescaled so phi_j(0) matches exactly; the
    pre-normalization mismatch measures how much weight the search window
    truncated and raises TruncationError beyond ``mismatch_limit``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if pole_set.poles.size == 0:
        raise TruncationError("pole set is empty; nothing to reconstruct")
    poles, weights = _fold_to_positive_real(pole_set.poles)
    s = 1j * poles if pole_set.convention == +1 else 1j * np.conj(poles)

    def series(res):
        return np.sum(
            weights[:, None] * np.real(res[:, None] * np.exp(s[:, None] * t_grid[None, :])),
            axis=0,
        )

    res = _residues(params, poles if pole_set.convention == +1 else np.conj(poles),
                    +1, initial_phi_j)
    phi0_rec = float(np.sum(weights * np.real(res["phi_j"])))
    pj0_rec = float(np.sum(weights * np.real(res["p_j"])))
    mismatch_phi = abs(phi0_rec - initial_phi_j) / abs(initial_phi_j)
    charge_scale = abs(initial_phi_j) * math.sqrt(params.c_j / params.l_j)
    mismatch_pj = abs(pj0_rec) / charge_scale
    if mismatch_phi > mismatch_limit:
        raise TruncationError(
            f"reconstructed phi_j(0) misses the initial condition by {mismatch_phi:.2%}; "
            "the search window truncates too much pole weight"
        )
    scale = initial_phi_j / phi0_rec
    phi = series(res["phi_j"]) * scale
    p_j = series(res["p_j"]) * scale
    p_0 = series(res["p_0"]) * scale
    e_q = ((p_j + p_0) ** 2 / (2 * params.c_j) + p_0**2 / (2 * params.c_c)
           + phi**2 / (2 * params.l_j))
    return Reconstruction(
        t=t_grid, phi_j=phi, p_j=p_j, p_0=p_0, e_q=e_q,
        scale=scale, mismatch_phi_j=mismatch_phi, mismatch_p_j=mismatch_pj,
    )


def reconstruct_open_line(params: CircuitParams, t_grid, initial_phi_j: float = 1.0) -> Reconstruction:
    """Exact three-pole reconstruction for the open line (cubic roots)."""
    t_grid = np.asarray(t_grid, dtype=float)
    poles, weights = _fold_to_positive_real(open_line_poles(params, convention=+1))
    res = _residues(params, poles, +1, initial_phi_j, mirror=False)
    s = 1j * poles
    phi0_rec = float(np.sum(weights * np.real(res["phi_j"])))
    scale = initial_phi_j / phi0_rec

    def series(r):
        return scale * np.sum(
            weights[:, None] * np.real(r[:, None] * np.exp(s[:, None] * t_grid[None, :])), axis=0
        )

    phi, p_j, p_0 = series(res["phi_j"]), series(res["p_j"]), series(res["p_0"])
    e_q = ((p_j + p_0) ** 2 / (2 * params.c_j) + p_0**2 / (2 * params.c_c)
           + phi**2 / (2 * params.l_j))
    return Reconstruction(
        t=t_grid, phi_j=phi, p_j=p_j, p_0=p_0, e_q=e_q,
        scale=scale, mismatch_phi_j=abs(phi0_rec - initial_phi_j) / abs(initial_phi_j),
        mismatch_p_j=abs(float(np.sum(weights * np.real(res["p_j"])))) /
        (abs(initial_phi_j) * math.sqrt(params.c_j / params.l_j)),
    )


# --- Rabi splitting: numeric pole pair vs analytic formula ------------------


@dataclass(frozen=True)
class RabiComparison:
    cc_over_cj: float
    z0_over_zj: float
    product: float                  # (c_c/c_j) * (z_0/z_j)
    omega_analytic: float
    omega_numeric: float | None     # None when the pair is unresolved
    relative_error: float | None
    resolved: bool
    pair: tuple[complex, complex] | None


def rabi_splitting_table(cc_ratios, z0_ratios, n: int = 1) -> list[RabiComparison]:
    """Compare the split-pole separation with 2/sqrt(T c_j z_0) at resonance.

    For every (c_c/c_j, z_0/z_j) pair the mirror is placed at the n-th
    resonance (omega_c = omega_j).  The two poles carrying the largest
    |phi_j| residue define the numeric splitting; entries whose splitting
    is below three pole widths are flagged unresolved instead of reported.
    """
    from .params import dimensionless  # local import to avoid cycle at module load

    rows: list[RabiComparison] = []
    for cc in cc_ratios:
        for z0 in z0_ratios:
            p = dimensionless(cc, z0, omega_c_over_omega_j=1.0, n=n)
            scales = derive(p)
            omega_a = scales.rabi
            window = (0.6 * scales.omega_j, 1.4 * scales.omega_j,
                      -0.5 * scales.gamma_j, 5.0 * scales.gamma_j)
            pole_set = find_poles(p, window=window)
            if pole_set.poles.size < 2:
                rows.append(RabiComparison(cc, z0, cc * z0, omega_a, None, None, False, None))
                continue
            order = np.argsort(-np.abs(pole_set.residues["phi_j"]))
            z1, z2 = pole_set.poles[order[0]], pole_set.poles[order[1]]
            splitting = abs(z1.real - z2.real)
            width = 2.0 * max(abs(z1.imag), abs(z2.imag))
            resolved = splitting > 3.0 * width
            rows.append(
                RabiComparison(
                    cc_over_cj=cc, z0_over_zj=z0, product=cc * z0,
                    omega_analytic=omega_a,
                    omega_numeric=splitting if resolved else None,
                    relative_error=abs(splitting - omega_a) / omega_a if resolved else None,
                    resolved=resolved,
                    pair=(complex(z1), complex(z2)),
                )
            )
    return rows
