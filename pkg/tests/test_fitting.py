import math

import numpy as np
import pytest

from mirrorqed import (
    ComplexResponse,
    FitError,
    analytic_resonances,
    derive,
    dimensionless,
    fit_resonance,
    lorentzian,
    refine_grid,
    reflection_open,
    trapped_field,
)

TWO_PI = 2 * math.pi


def test_recovers_synthetic_lorentzian():
    w = np.linspace(0.9, 1.1, 2001)
    amp = np.sqrt(lorentzian(w, 0.8, 1.003, 0.004, 0.05))
    resp = ComplexResponse(grid=w, values=amp.astype(complex), kind="trapped_f")
    fit = fit_resonance(resp, (0.99, 1.02), kind="peak")
    assert fit.center == pytest.approx(1.003, abs=1e-6)
    assert fit.fwhm == pytest.approx(0.004, rel=1e-4)
    assert fit.amplitude == pytest.approx(0.8, rel=1e-4)
    assert fit.residual < 1e-10


def test_high_impedance_dip_width_is_gamma_j():
    p = dimensionless(1 / 9, 1000.0)
    s = derive(p)
    w = np.linspace(1 - 10 * s.gamma_j, 1 + 10 * s.gamma_j, 4001)
    fit = fit_resonance(reflection_open(p, w), (w[0], w[-1]))
    assert fit.kind == "dip"
    assert fit.fwhm == pytest.approx(s.gamma_j, rel=0.05)
    assert fit.center == pytest.approx(1.0, abs=0.1 * s.gamma_j)


def test_low_impedance_peak_width_is_gamma_0():
    p = dimensionless(1 / 9, 0.1)
    s = derive(p)
    w = np.linspace(s.omega_0 - 12 * s.gamma_0, s.omega_0 + 12 * s.gamma_0, 4001)
    fit = fit_resonance(reflection_open(p, w), (w[0], w[-1]))
    assert fit.kind == "peak"
    assert fit.fwhm == pytest.approx(s.gamma_0, rel=0.05)
    assert fit.center == pytest.approx(s.omega_0, abs=0.1 * s.gamma_0)


def test_mirror_halves_transmon_linewidth():
    # off-resonant mirror: |f| line at the transmon frequency has width gamma_j/2
    p = dimensionless(0.1, 1000.0, omega_c_over_omega_j=0.9)
    s = derive(p)
    center = [e for e in analytic_resonances(p, 1) if e.label == "transmon"][0].center
    w = np.linspace(center - 8 * s.gamma_j_mirror, center + 8 * s.gamma_j_mirror, 4001)
    fit = fit_resonance(trapped_field(p, w), (w[0], w[-1]), kind="peak")
    assert fit.fwhm == pytest.approx(s.gamma_j_mirror, rel=0.05)
    assert fit.fwhm == pytest.approx(s.gamma_j / 2, rel=0.05)


def test_window_too_small_raises():
    p = dimensionless(0.1, 1000.0)
    resp = reflection_open(p, np.linspace(0.9, 1.1, 101))
    with pytest.raises(FitError, match="grid points"):
        fit_resonance(resp, (0.999, 1.001))


def test_flat_profile_raises():
    w = np.linspace(0.9, 1.1, 200)
    resp = ComplexResponse(grid=w, values=np.full(w.size, 0.5 + 0j), kind="trapped_f")
    with pytest.raises(FitError):
        fit_resonance(resp, (0.9, 1.1), kind="peak")


def test_lamb_shift_vanishes_at_antinode():
    # omega_j T = 2*pi*(n + 1/2) makes the cotangent vanish exactly
    for n in (0, 1, 3):
        t_delay = TWO_PI * (n + 0.5)
        p = dimensionless(0.1, 1000.0, delay=t_delay)
        entry = [e for e in analytic_resonances(p, 1) if e.label == "transmon"][0]
        assert entry.valid
        assert entry.center == pytest.approx(1.0, abs=1e-16)


def test_qubit_width_vanishes_at_node():
    # omega_0 T = 2*pi*n: Purcell-suppressed width is exactly zero
    p0 = dimensionless(0.1, 0.1)
    w0 = derive(p0).omega_0
    p = p0.with_delay(2 * TWO_PI / w0)
    entry = [e for e in analytic_resonances(p, 1) if e.label == "qubit"][0]
    assert entry.width < 1e-20


def test_validity_flag_near_rabi_condition():
    p = dimensionless(0.1, 1000.0, omega_c_over_omega_j=1.0)
    entries = {e.label: e for e in analytic_resonances(p, 2)}
    assert not entries["transmon"].valid
    assert not entries["cavity_1"].valid
    assert entries["cavity_2"].valid


def test_cavity_mode_two_closed_form_matches_fit():
    # cross-validation of the two independent routes to the n=2 cavity line
    p = dimensionless(0.1, 1000.0, omega_c_over_omega_j=1.0)
    entry = {e.label: e for e in analytic_resonances(p, 2)}["cavity_2"]
    assert entry.valid

    def evaluate(grid):
        return trapped_field(p, grid).values

    base = np.linspace(entry.center - 60 * entry.width, entry.center + 60 * entry.width, 1001)
    fine = refine_grid(evaluate, base, levels=3, factor=8)
    fit = fit_resonance(trapped_field(p, fine),
                        (entry.center - 30 * entry.width, entry.center + 30 * entry.width),
                        kind="peak")
    assert fit.center == pytest.approx(entry.center, abs=0.02 * entry.width * 100)
    assert fit.fwhm == pytest.approx(entry.width, rel=0.02)
