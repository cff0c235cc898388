import math

import numpy as np
import pytest

from mirrorqed import (
    EmissionConfig,
    ParameterError,
    TruncationError,
    characteristic,
    characteristic_derivative,
    derive,
    dimensionless,
    find_poles,
    fit_resonance,
    integrate,
    open_line_poles,
    rabi_splitting_table,
    reconstruct,
    reconstruct_open_line,
    refine_grid,
    trapped_field,
)
from mirrorqed.poles import characteristic_scale, default_window

TWO_PI = 2 * math.pi


def resonant_mirror_params():
    return dimensionless(0.1, 1000.0, omega_c_over_omega_j=1.0)


def test_characteristic_at_origin_is_one():
    p = resonant_mirror_params()
    assert characteristic(p, 0.0) == 1.0


def test_characteristic_at_coupled_resonance():
    # generic delay: D(omega_0) = i*B(omega_0)*(1 - exp(-i*omega_0*T)) != 0
    from mirrorqed import line_detuning

    p = dimensionless(0.1, 1000.0, omega_c_over_omega_j=0.83)
    w0 = derive(p).omega_0
    d = complex(characteristic(p, w0))
    expected = 1j * float(line_detuning(p, w0)) * (1 - np.exp(-1j * w0 * p.delay))
    assert d == pytest.approx(expected, rel=1e-10)
    assert abs(d) > 1e-3


def test_characteristic_dark_state_real_zero():
    p0 = dimensionless(0.02 / 0.98, 1000.0)
    w0 = derive(p0).omega_0
    p = p0.with_delay(TWO_PI / w0)
    d = complex(characteristic(p, w0))
    assert abs(d) < 1e-12 * float(characteristic_scale(p, w0))


def test_decoupled_limit_pole_at_omega_j():
    p = dimensionless(1e-9, 1000.0, omega_c_over_omega_j=0.77)
    ps = find_poles(p, window=(0.9, 1.1, -1e-6, 1e-6))
    assert ps.poles.size == 1
    assert ps.poles[0].real == pytest.approx(1.0, abs=1e-6)
    assert abs(ps.poles[0].imag) < 1e-9


def test_derivative_matches_finite_difference():
    p = resonant_mirror_params()
    rng = np.random.default_rng(1)
    z = rng.uniform(0.5, 3, 8) + 1j * rng.uniform(-0.01, 0.01, 8)
    h = 1e-7
    fd = (characteristic(p, z + h) - characteristic(p, z - h)) / (2 * h)
    d = characteristic_derivative(p, z)
    assert np.max(np.abs(fd - d) / (1.0 + np.abs(d))) < 1e-7


def test_convention_flag_conjugates_poles():
    p = resonant_mirror_params()
    up = find_poles(p, window=(0.95, 1.05, -0.001, 0.01), convention=+1)
    down = find_poles(p, window=(0.95, 1.05, -0.01, 0.001), convention=-1)
    assert np.allclose(np.sort(up.poles.real), np.sort(down.poles.real), atol=1e-12)
    assert np.allclose(np.sort(up.poles.imag), np.sort(-down.poles.imag), atol=1e-12)


def test_open_line_cubic_oracle():
    # polynomial roots (companion matrix, independent of the contour
    # machinery) really are zeros of the open-line denominator
    from mirrorqed import open_line_denominator

    rng = np.random.default_rng(9)
    for _ in range(20):
        p = dimensionless(rng.uniform(0.02, 1.0), 10 ** rng.uniform(-1, 3.5))
        roots = open_line_poles(p)
        assert roots.size == 3
        vals = np.abs(open_line_denominator(p, roots))
        assert np.max(vals) < 1e-9 * np.max(np.abs(roots)) ** 3
        assert np.all(roots.imag > 0)   # every free mode decays


def test_finder_window_split_consistency():
    # splitting the search window must not change the located set
    p = dimensionless(0.1, 1000.0, omega_c_over_omega_j=1.0)
    whole = find_poles(p, window=(0.6, 3.4, -0.0005, 0.005))
    left = find_poles(p, window=(0.6, 1.7, -0.0005, 0.005))
    right = find_poles(p, window=(1.7, 3.4, -0.0005, 0.005))
    merged = np.sort_complex(np.concatenate([left.poles, right.poles]))
    np.testing.assert_allclose(np.sort_complex(whole.poles), merged, atol=1e-10)
    scale = np.abs(characteristic_scale(p, whole.poles))
    assert np.all(np.abs(characteristic(p, whole.poles)) < 1e-10 * scale)


def test_resonant_pole_pair():
    p = resonant_mirror_params()
    s = derive(p)
    ps = find_poles(p, window=(0.95, 1.05, -0.001, 0.01))
    assert ps.poles.size == 2
    z_lo, z_hi = ps.poles
    assert z_lo.real == pytest.approx(1 - s.rabi / 2, abs=0.1 * s.rabi)
    assert z_hi.real == pytest.approx(1 + s.rabi / 2, abs=0.1 * s.rabi)
    # widths sum to ~gamma_j^m/2 (energy envelope decay gamma_j^m/2 in total)
    assert z_lo.imag + z_hi.imag == pytest.approx(s.gamma_j_mirror / 2, rel=0.1)
    assert np.all(ps.poles.imag > 0)


def test_poles_match_lorentzian_fits():
    # every pole visible to the fitter: FWHM = 2*Im(z) within 5 percent,
    # center within 0.1 FWHM
    p = resonant_mirror_params()
    ps = find_poles(p, window=(0.95, 1.05, -0.001, 0.01))

    def evaluate(grid):
        return trapped_field(p, grid).values

    for z in ps.poles:
        width = 2 * z.imag
        base = np.linspace(z.real - 40 * width, z.real + 40 * width, 2001)
        fine = refine_grid(evaluate, base)
        fit = fit_resonance(trapped_field(p, fine),
                            (z.real - 15 * width, z.real + 15 * width), kind="peak")
        assert fit.fwhm == pytest.approx(width, rel=0.05)
        assert abs(fit.center - z.real) < 0.1 * fit.fwhm


def test_default_window_content():
    p = resonant_mirror_params()
    ps = find_poles(p, window=default_window(p))
    # pair + cavity modes 2 and 3
    assert ps.poles.size == 4
    assert sorted(round(z.real, 1) for z in ps.poles) == [1.0, 1.0, 2.0, 3.0]


def test_boundary_zero_nudge():
    # put the window edge exactly on the known real dark-state pole
    p0 = dimensionless(0.02 / 0.98, 1000.0)
    w0 = derive(p0).omega_0
    p = p0.with_delay(TWO_PI / w0)
    ps = find_poles(p, window=(0.9, w0, -1e-4, 5e-3))
    assert ps.method_report.get("boundary_nudges", 0) >= 1
    assert any(abs(z - w0) < 1e-8 for z in ps.poles)


def test_open_line_reconstruction_is_damped_cosine():
    p = dimensionless(0.1, 1000.0)
    s = derive(p)
    t = np.linspace(0, 4 / s.gamma_j, 20001)
    rec = reconstruct_open_line(p, t)
    assert rec.mismatch_phi_j < 1e-12  # three poles carry all the weight exactly
    # amplitude decays at gamma_j/2: oracle is the cubic root pair
    roots = open_line_poles(p)
    pair = roots[np.argsort(-roots.real)][0]
    envelope = np.exp(-pair.imag * t)
    assert np.max(np.abs(rec.phi_j) - envelope) < 0.02
    assert 2 * pair.imag == pytest.approx(s.gamma_j, rel=0.01)
    # trajectory cross-check
    traj = integrate(p, EmissionConfig(t_max=200.0, dt=TWO_PI / 256, mirror=False))
    rec2 = reconstruct_open_line(p, traj.t)
    assert np.max(np.abs(rec2.phi_j - traj.phi_j)) < 1e-4


def test_reconstruction_overlays_simulation():
    p = resonant_mirror_params()
    s = derive(p)
    traj = integrate(p, EmissionConfig(t_max=5 * TWO_PI / s.rabi, dt=p.delay / 256))
    ps = find_poles(p)
    rec = reconstruct(p, ps, traj.t)
    assert rec.mismatch_phi_j < 0.01
    assert rec.mismatch_p_j < 0.01
    assert rec.phi_j[0] == pytest.approx(1.0, rel=1e-12)   # normalization exact
    e0 = traj.e_q[0]
    assert np.max(np.abs(rec.e_q - traj.e_q)) / e0 < 0.03


def test_reconstruction_window_sensitivity():
    # dropping the higher cavity poles barely changes the result (their
    # residues are tiny); the reported mismatch quantifies the truncation
    p = resonant_mirror_params()
    s = derive(p)
    t = np.linspace(0, 2 * TWO_PI / s.rabi, 4001)
    full = reconstruct(p, find_poles(p), t)
    pair_only = reconstruct(p, find_poles(p, window=(0.95, 1.05, -0.001, 0.01)), t)
    assert pair_only.mismatch_phi_j < 0.01
    assert np.max(np.abs(full.phi_j - pair_only.phi_j)) < 5e-3


def test_reconstruction_truncation_error():
    # a window holding only a far cavity pole misses nearly all the weight
    p = resonant_mirror_params()
    ps = find_poles(p, window=(1.8, 2.2, -0.001, 0.001))
    assert ps.poles.size == 1
    with pytest.raises(TruncationError):
        reconstruct(p, ps, np.linspace(0, 10, 64))


def test_rabi_table_trend_and_flags():
    rows = rabi_splitting_table([0.3], [316.22776601683796, 1000.0])
    assert all(r.resolved for r in rows)
    errs = [r.relative_error for r in rows]
    assert errs[1] < errs[0]
    # degenerate case: tiny coupling at low impedance is unresolved -> flagged
    degenerate = rabi_splitting_table([0.001], [10.0])[0]
    assert not degenerate.resolved
    assert degenerate.omega_numeric is None and degenerate.relative_error is None


def test_rabi_table_cross_series_example():
    rows = {r.cc_over_cj: r for r in rabi_splitting_table([0.01, 0.3], [1000.0])}
    assert rows[0.3].relative_error < rows[0.01].relative_error


def test_degenerate_window_rejected():
    p = resonant_mirror_params()
    with pytest.raises(ParameterError):
        find_poles(p, window=(1.0, 0.5, 0.0, 0.01))
