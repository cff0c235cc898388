"""Effective atom-in-a-multimode-cavity model and its symplectic spectrum.

With a highly reflective transmon the stretch of line up to the mirror acts
as a cavity with modes at ``n * omega_c``; the quadratic Hamiltonian keeps
the counter-rotating terms (no rotating-wave approximation, coupling
``(a^dag + a)(c_n^dag + c_n)``) and a single mode-independent coupling
``g = Omega/2 = 1/sqrt(T c_j z_0)``.  Diagonalizing means finding operators
``Pi_alpha`` with ``[Pi_alpha, H] = Omega_alpha Pi_alpha``, i.e. the
eigenproblem of a real non-symmetric (symplectic-structured) matrix whose
eigenvalues come in +- pairs.  Physical (positive-norm) eigenvectors are
normalized so the bosonicity

    |x|^2 - |y|^2 + sum_n (|m_n|^2 - |h_n|^2) = +1

holds, which makes the polaritonic operators bosonic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace

import numpy as np
from scipy.signal import find_peaks

from .errors import ParameterError
from .params import CircuitParams, derive
from .response import trapped_field
from .util import parallel_map


@dataclass(frozen=True)
class HopfieldProblem:
    """Matrix form of the atom + N cavity modes eigenproblem (dimension 2N+2)."""

    omega_a: float
    mode_freqs: np.ndarray
    couplings: np.ndarray
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def build(
    params: CircuitParams,
    n_modes: int,
    mode_freqs=None,
    couplings=None,
) -> HopfieldProblem:
    """Assemble the (2N+2) x (2N+2) coefficient matrix.

    Basis ordering: (x, y, m_1, h_1, ..., m_N, h_N) for the coefficients of
    (a, a^dag, c_n, c_n^dag).  Diagonal carries (omega_a, -omega_a,
    omega_n, -omega_n); the atom-mode blocks carry (+g_n, -g_n) row
    patterns, identical in the x and y rows (counter-rotating structure).

    ``mode_freqs``/``couplings`` override the defaults ``n*omega_c`` and the
    single ``Omega/2`` (exploration only; defaults follow the model).
    """
    if n_modes < 1:
        raise ParameterError("n_modes must be >= 1")
    scales = derive(params)
    if mode_freqs is None:
        params.require_mirror()
        mode_freqs = scales.omega_c * np.arange(1, n_modes + 1, dtype=float)
    else:
        mode_freqs = np.asarray(mode_freqs, dtype=float)
        if mode_freqs.size != n_modes:
            raise ParameterError("mode_freqs length must equal n_modes")
    if couplings is None:
        params.require_mirror()
        couplings = np.full(n_modes, 0.5 * scales.rabi)
    else:
        couplings = np.asarray(couplings, dtype=float)
        if couplings.size != n_modes:
            raise ParameterError("couplings length must equal n_modes")
    if np.any(couplings <= 0) or np.any(mode_freqs <= 0):
        raise ParameterError("mode frequencies and couplings must be positive")

    omega_a = scales.omega_j
    dim = 2 * n_modes + 2
    mat = np.zeros((dim, dim))
    mat[0, 0] = omega_a
    mat[1, 1] = -omega_a
    for k in range(n_modes):
        i, j = 2 * k + 2, 2 * k + 3
        mat[i, i] = mode_freqs[k]
        mat[j, j] = -mode_freqs[k]
        g = couplings[k]
        mat[0, i] = mat[1, i] = g
        mat[0, j] = mat[1, j] = -g
        mat[i, 0] = mat[j, 0] = g
        mat[i, 1] = mat[j, 1] = -g
    return HopfieldProblem(omega_a=omega_a, mode_freqs=mode_freqs,
                           couplings=couplings, matrix=mat)


@dataclass(frozen=True)
class HopfieldSpectrum:
    """Eigenfrequencies and symplectically normalized coefficient vectors."""

    eigenfrequencies: np.ndarray     # real parts, ascending
    vectors: np.ndarray              # columns aligned with eigenfrequencies
    bosonicity: np.ndarray           # normalized symplectic norm (+-1, or raw if ~0)
    raw_eigenvalues: np.ndarray      # unsorted complex eigenvalues as computed
    stable: bool                     # False when complex eigenvalues appeared

    def positive(self) -> np.ndarray:
        return self.eigenfrequencies[self.eigenfrequencies > 0]


def bosonicity(vector: np.ndarray) -> float:
    """Symplectic norm |x|^2 - |y|^2 + sum (|m_n|^2 - |h_n|^2)."""
    signs = np.ones(vector.size)
    signs[1::2] = -1.0
    return float(np.sum(signs * np.abs(vector) ** 2))


def diagonalize(problem: HopfieldProblem, imag_tol: float = 1e-9) -> HopfieldSpectrum:
    """Full eigendecomposition with symplectic normalization.

    Complex eigenvalues (the unstable ultrastrong regime) are never
    truncated: they are kept in ``raw_eigenvalues`` and flagged via
    ``stable=False``; their vectors are left unnormalized (their symplectic
    norm vanishes).
    """
    evals, evecs = np.linalg.eig(problem.matrix)
    scale = np.max(np.abs(evals)) + 1e-300
    complex_mask = np.abs(evals.imag) > imag_tol * scale
    stable = not bool(np.any(complex_mask))
    freqs = evals.real.copy()
    order = np.argsort(freqs)
    freqs = freqs[order]
    vecs = evecs[:, order].copy()
    complex_mask = complex_mask[order]
    norms = np.empty(freqs.size)
    for i in range(freqs.size):
        b = bosonicity(vecs[:, i])
        if complex_mask[i] or abs(b) < 1e-12:
            norms[i] = b       # zero-norm vector; report raw
            continue
        vecs[:, i] = vecs[:, i] / np.sqrt(abs(b))
        norms[i] = 1.0 if b > 0 else -1.0
    return HopfieldSpectrum(
        eigenfrequencies=freqs,
        vectors=vecs,
        bosonicity=norms,
        raw_eigenvalues=evals,
        stable=stable,
    )


@dataclass(frozen=True)
class RidgeSlice:
    """One delay value of the scan: detected |f| peaks vs eigenfrequencies."""

    omega_j_t: float
    eigenfrequencies: np.ndarray
    ridge_positions: np.ndarray
    distances: np.ndarray          # per ridge, to the nearest eigenfrequency
    unresolved: bool               # detection grid failed to separate peaks


@dataclass(frozen=True)
class OverlayResult:
    slices: list[RidgeSlice]
    cell: float                    # spacing of the comparison grid
    max_distance: float
    max_bosonicity_error: float

    def distances_in_cells(self) -> np.ndarray:
        return np.concatenate([s.distances for s in self.slices]) / self.cell


def overlay(
    params: CircuitParams,
    n_modes: int,
    t_grid,
    freq_grid,
    detect_refine: int = 64,
    prominence: float = 0.5,
) -> OverlayResult:
    """Compare |f| ridges with the model eigenfrequencies along a delay scan.

    ``t_grid`` lists omega_j*T values; at each one the trapped-field
    magnitude is evaluated on ``freq_grid`` refined ``detect_refine``-fold
    (the cavity ridges are far narrower than any plotting grid), peaks are
    picked by prominence, and each peak position is matched to the nearest
    positive eigenfrequency.  Distances are reported in absolute frequency;
    ``cell`` is the spacing of the *unrefined* grid, the natural resolution
    at which the two structures are being compared.
    """
    freq_grid = np.asarray(freq_grid, dtype=float)
    if freq_grid.ndim != 1 or freq_grid.size < 8:
        raise ParameterError("freq_grid must be a 1-D array with at least 8 points")
    cell = float(np.median(np.diff(freq_grid)))
    omega_j = derive(params).omega_j
    fine = np.linspace(freq_grid[0], freq_grid[-1],
                       (freq_grid.size - 1) * detect_refine + 1)

    def one_slice(omega_j_t: float) -> RidgeSlice:
        p_t = params.with_delay(omega_j_t / omega_j)
        spectrum = diagonalize(build(p_t, n_modes))
        pos = spectrum.positive()
        mag = trapped_field(p_t, fine).magnitude
        peaks, _ = find_peaks(mag, prominence=prominence)
        ridge = fine[peaks]
        inside = (ridge >= freq_grid[0]) & (ridge <= freq_grid[-1])
        ridge = ridge[inside]
        if ridge.size and pos.size:
            dist = np.min(np.abs(ridge[:, None] - pos[None, :]), axis=1)
        else:
            dist = np.zeros(0)
        boson_err = np.max(np.abs(spectrum.bosonicity[spectrum.eigenfrequencies > 0] - 1.0)) \
            if pos.size else 0.0
        return RidgeSlice(
            omega_j_t=omega_j_t,
            eigenfrequencies=pos,
            ridge_positions=ridge,
            distances=dist,
            unresolved=ridge.size == 0,
        ), boson_err

    results = parallel_map(one_slice, list(np.asarray(t_grid, dtype=float)))
    slices = [r[0] for r in results]
    boson_errors = [r[1] for r in results]
    all_d = np.concatenate([s.distances for s in slices]) if slices else np.zeros(0)
    return OverlayResult(
        slices=slices,
        cell=cell,
        max_distance=float(all_d.max()) if all_d.size else 0.0,
        max_bosonicity_error=float(max(boson_errors)) if boson_errors else 0.0,
    )
