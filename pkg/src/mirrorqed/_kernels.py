"""Hot integration kernel: fixed-step RK4 for the delayed-feedback circuit.

The loop is inherently sequential (each step consumes the stored stage
derivatives from ``m`` steps earlier), so it is compiled with numba by
default.  Set ``MIRRORQED_BACKEND=numpy`` to force the plain-Python twin
(same function body, no JIT); ``benchmarks/bench_integrator.py`` compares
the two.
"""

from __future__ import annotations

import os

import numpy as np


def _rk4_delay_loop(n_steps, m_delay, h, c_j, l_j, a_sigma, a_j, z_0, phi_0):
    """Integrate the free (vacuum-input) circuit with mirror feedback.

    State per grid point: flux phi_j, charges p_j and p_0, and the
    accumulated field energies e_r (between transmon and mirror) and e_l
    (radiated past the transmon).  The charge-derivative equation is

        p0'(t) = -a_sigma*p0(t) - a_j*pj(t) + p0'(t - T),

    a neutral delay equation; the delayed derivative is read from the
    per-stage values stored exactly ``m_delay`` steps earlier (the step is
    chosen commensurate, h = T/m_delay), which keeps the scheme a genuine
    4th-order RK applied to the method-of-steps extension.  ``m_delay = 0``
    disables the feedback (open line).  History before t = 0 is zero.
    """
    q = 0.25 * z_0
    phi = np.empty(n_steps + 1)
    pj = np.empty(n_steps + 1)
    p0 = np.empty(n_steps + 1)
    er = np.empty(n_steps + 1)
    el = np.empty(n_steps + 1)
    pd = np.empty(n_steps + 1)      # p0'(t) on the grid (stage-1 values)
    d1 = np.zeros(n_steps + 1)
    d2 = np.zeros(n_steps + 1)
    d3 = np.zeros(n_steps + 1)
    d4 = np.zeros(n_steps + 1)
    phi[0] = phi_0
    pj[0] = 0.0
    p0[0] = 0.0
    er[0] = 0.0
    el[0] = 0.0
    for n in range(n_steps):
        if m_delay > 0 and n >= m_delay:
            dd1 = d1[n - m_delay]
            dd2 = d2[n - m_delay]
            dd3 = d3[n - m_delay]
            dd4 = d4[n - m_delay]
        else:
            dd1 = 0.0
            dd2 = 0.0
            dd3 = 0.0
            dd4 = 0.0
        y_phi = phi[n]
        y_pj = pj[n]
        y_p0 = p0[n]

        pd1 = -a_sigma * y_p0 - a_j * y_pj + dd1
        k1_phi = (y_pj + y_p0) / c_j
        k1_pj = -y_phi / l_j
        k1_er = q * (pd1 * pd1 - dd1 * dd1)
        k1_el = q * (pd1 - dd1) ** 2

        b_phi = y_phi + 0.5 * h * k1_phi
        b_pj = y_pj + 0.5 * h * k1_pj
        b_p0 = y_p0 + 0.5 * h * pd1
        pd2 = -a_sigma * b_p0 - a_j * b_pj + dd2
        k2_phi = (b_pj + b_p0) / c_j
        k2_pj = -b_phi / l_j
        k2_er = q * (pd2 * pd2 - dd2 * dd2)
        k2_el = q * (pd2 - dd2) ** 2

        b_phi = y_phi + 0.5 * h * k2_phi
        b_pj = y_pj + 0.5 * h * k2_pj
        b_p0 = y_p0 + 0.5 * h * pd2
        pd3 = -a_sigma * b_p0 - a_j * b_pj + dd3
        k3_phi = (b_pj + b_p0) / c_j
        k3_pj = -b_phi / l_j
        k3_er = q * (pd3 * pd3 - dd3 * dd3)
        k3_el = q * (pd3 - dd3) ** 2

        b_phi = y_phi + h * k3_phi
        b_pj = y_pj + h * k3_pj
        b_p0 = y_p0 + h * pd3
        pd4 = -a_sigma * b_p0 - a_j * b_pj + dd4
        k4_phi = (b_pj + b_p0) / c_j
        k4_pj = -b_phi / l_j
        k4_er = q * (pd4 * pd4 - dd4 * dd4)
        k4_el = q * (pd4 - dd4) ** 2

        sixth = h / 6.0
        phi[n + 1] = y_phi + sixth * (k1_phi + 2.0 * (k2_phi + k3_phi) + k4_phi)
        pj[n + 1] = y_pj + sixth * (k1_pj + 2.0 * (k2_pj + k3_pj) + k4_pj)
        p0[n + 1] = y_p0 + sixth * (pd1 + 2.0 * (pd2 + pd3) + pd4)
        er[n + 1] = er[n] + sixth * (k1_er + 2.0 * (k2_er + k3_er) + k4_er)
        el[n + 1] = el[n] + sixth * (k1_el + 2.0 * (k2_el + k3_el) + k4_el)
        d1[n] = pd1
        d2[n] = pd2
        d3[n] = pd3
        d4[n] = pd4
        pd[n] = pd1
    # derivative at the final grid point
    if m_delay > 0 and n_steps >= m_delay:
        dd_last = d1[n_steps - m_delay]
    else:
        dd_last = 0.0
    pd[n_steps] = -a_sigma * p0[n_steps] - a_j * pj[n_steps] + dd_last
    return phi, pj, p0, pd, er, el


try:
    import numba

    _rk4_delay_loop_jit = numba.njit(cache=True)(_rk4_delay_loop)
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay usable
    _rk4_delay_loop_jit = None
    HAS_NUMBA = False


def active_backend() -> str:
    """Backend the next integration will use: "numba" or "numpy"."""
    choice = os.environ.get("MIRRORQED_BACKEND", "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"MIRRORQED_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and not HAS_NUMBA:
        return "numpy"
    return choice


def rk4_delay_loop(n_steps, m_delay, h, c_j, l_j, a_sigma, a_j, z_0, phi_0):
    kernel = _rk4_delay_loop_jit if active_backend() == "numba" else _rk4_delay_loop
    return kernel(int(n_steps), int(m_delay), float(h), float(c_j), float(l_j),
                  float(a_sigma), float(a_j), float(z_0), float(phi_0))
