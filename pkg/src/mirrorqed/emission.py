"""Time-domain spontaneous emission with delayed mirror feedback.

Equations of motion of the undriven circuit (vacuum input on the open
side), written so that the open line is strictly dissipative and the
frequency-domain solution reproduces the scattering amplitudes of
:mod:`.response` exactly:

    phi_j'(t) = (p_j + p_0) / c_j
    p_j'(t)   = -phi_j / l_j
    p_0'(t)   = -(2/(z_0 c_sigma)) p_0 - (2/(z_0 c_j)) p_j + p_0'(t - T)

The last term is the mirror feedback, obtained from the boundary condition
``V_R_in(t) = -V_R_out(t-T)`` with ``V_out = V_in_opposite - (z_0/2) p_0'``;
it is absent on the open line and for t < T (no signal has returned yet).
The energy bookkeeping

    E_q = (p_j+p_0)^2/(2 c_j) + p_0^2/(2 c_c) + phi_j^2/(2 l_j)
    dE_r/dt = (z_0/4) [p_0'(t)^2 - p_0'(t-T)^2]
    dE_l/dt = (z_0/4) [p_0'(t) - p_0'(t-T)]^2

satisfies E_q + E_r + E_l = E_q(0) identically; the numerical drift of the
sum measures integrator error only.  E_r/E_l are accumulated inside the
RK4 step (same order as the state), E_q is evaluated pointwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from ._kernels import rk4_delay_loop
from .errors import IntegrationError, ParameterError
from .params import TWO_PI, CircuitParams, derive

#: hard ceilings: at least this many steps per round trip and per transmon cycle
STEPS_PER_DELAY = 200
STEPS_PER_CYCLE = 200


@dataclass(frozen=True)
class EmissionConfig:
    """Integration setup for a spontaneous-emission run.

    ``dt`` is an upper bound on the step; with a mirror the actual step is
    snapped down to ``T/m`` (integer ``m``) so the delayed terms fall on
    exact grid points and no interpolation of the feedback is ever needed.
    """

    t_max: float
    dt: float
    initial_phi_j: float = 1.0
    mirror: bool = True

    def __post_init__(self):
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ParameterError(f"t_max must be positive, got {self.t_max!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ParameterError(f"dt must be positive, got {self.dt!r}")
        if self.dt >= self.t_max:
            raise ParameterError("dt must be smaller than t_max")


@dataclass(frozen=True)
class TrajectoryState:
    """Uniformly sampled trajectory and its three energy channels."""

    t: np.ndarray
    phi_j: np.ndarray
    p_j: np.ndarray
    p_0: np.ndarray
    p_0_dot: np.ndarray
    e_q: np.ndarray | None
    e_r: np.ndarray
    e_l: np.ndarray
    params: CircuitParams
    dt: float
    delay_steps: int        # m with dt = T/m; 0 on the open line

    @property
    def e_total(self) -> np.ndarray:
        if self.e_q is None:
            raise IntegrationError("energies not populated; call energies() first")
        return self.e_q + self.e_r + self.e_l

    def voltages(self) -> tuple[np.ndarray, np.ndarray]:
        """Outgoing field amplitudes (V_L_out, V_R_out) reconstructed from p_0'."""
        v_r_out = -0.5 * self.params.z_0 * self.p_0_dot
        if self.delay_steps > 0:
            delayed = np.zeros_like(self.p_0_dot)
            delayed[self.delay_steps:] = self.p_0_dot[: self.p_0_dot.size - self.delay_steps]
            v_l_out = 0.5 * self.params.z_0 * (delayed - self.p_0_dot)
        else:
            v_l_out = v_r_out.copy()
        return v_l_out, v_r_out


def _step_plan(params: CircuitParams, config: EmissionConfig) -> tuple[float, int]:
    """Validate the requested step and snap it onto the delay grid."""
    omega_j = derive(params).omega_j
    cycle_cap = TWO_PI / (STEPS_PER_CYCLE * omega_j)
    if config.dt > cycle_cap * (1.0 + 1e-12):
        raise ParameterError(
            f"dt = {config.dt} exceeds 2*pi/({STEPS_PER_CYCLE} omega_j) = {cycle_cap}"
        )
    if config.mirror:
        t_delay = params.require_mirror()
        delay_cap = t_delay / STEPS_PER_DELAY
        if config.dt > delay_cap * (1.0 + 1e-12):
            raise ParameterError(
                f"dt = {config.dt} exceeds T/{STEPS_PER_DELAY} = {delay_cap} (mirror present)"
            )
        m = max(
            int(math.ceil(t_delay / config.dt - 1e-12)),
            int(math.ceil(t_delay / cycle_cap - 1e-12)),
            STEPS_PER_DELAY,
        )
        return t_delay / m, m
    return config.dt, 0


def integrate(params: CircuitParams, config: EmissionConfig) -> TrajectoryState:
    """Run the free evolution from phi_j(0) = initial_phi_j, p_j(0) = p_0(0) = 0.

    For t < T the trajectory is bit-identical to the open-line one
    (causality: no feedback has arrived).  Raises IntegrationError if the
    conserved total energy drifts beyond 1e-3 relative (a sign-convention
    or step-size bug, never expected for valid configs).
    """
    h, m = _step_plan(params, config)
    n_steps = int(math.ceil(config.t_max / h - 1e-12))
    scales = derive(params)
    a_sigma = 2.0 / (params.z_0 * scales.c_sigma)
    a_j = 2.0 / (params.z_0 * params.c_j)
    phi, pj, p0, pd, er, el = rk4_delay_loop(
        n_steps, m, h, params.c_j, params.l_j, a_sigma, a_j, params.z_0,
        config.initial_phi_j,
    )
    traj = TrajectoryState(
        t=np.arange(n_steps + 1) * h,
        phi_j=phi, p_j=pj, p_0=p0, p_0_dot=pd,
        e_q=None, e_r=er, e_l=el,
        params=params, dt=h, delay_steps=m,
    )
    return energies(traj, params)


def energies(traj: TrajectoryState, params: CircuitParams) -> TrajectoryState:
    """Populate E_q pointwise and check the energy invariants.

    E_r/E_l come accumulated from the integrator; this recomputes E_q from
    the state arrays, verifies conservation of the sum and flags negative
    excursions of E_r beyond integration error.
    """
    e_q = (
        (traj.p_j + traj.p_0) ** 2 / (2.0 * params.c_j)
        + traj.p_0**2 / (2.0 * params.c_c)
        + traj.phi_j**2 / (2.0 * params.l_j)
    )
    e_0 = e_q[0]
    drift = np.max(np.abs(e_q + traj.e_r + traj.e_l - e_0)) / e_0
    if drift > 1e-3:
        raise IntegrationError(
            f"total energy drifted by {drift:.3e} relative -- integration is unstable "
            "(check the step size; growth signals a sign error)"
        )
    e_r_floor = traj.e_r.min()
    if e_r_floor < -1e-9 * e_0:
        warnings.warn(
            f"E_r dips to {e_r_floor:.3e} (beyond -1e-9 * E_q(0)); integration error "
            "is larger than expected",
            RuntimeWarning,
            stacklevel=2,
        )
    return replace(traj, e_q=e_q)


def dark_state_energy(params: CircuitParams) -> float:
    """Asymptotic trapped fraction E_q(inf)/E_q(0) = 1/(1 + T*gamma_0/2)^2.

    Defined only at the dark-state condition omega_0 * T = 2*pi*n, where a
    real (undamped) mode exists; refuses otherwise.
    """
    t_delay = params.require_mirror()
    scales = derive(params)
    cycles = scales.omega_0 * t_delay / TWO_PI
    if abs(cycles - round(cycles)) > 1e-6 or round(cycles) < 1:
        raise ParameterError(
            f"dark-state condition omega_0*T = 2*pi*n not met: omega_0*T/(2*pi) = {cycles}"
        )
    return 1.0 / (1.0 + 0.5 * t_delay * scales.gamma_0) ** 2


def fit_decay_rate(traj: TrajectoryState, t_start: float, t_end: float) -> float:
    """Exponential decay rate of E_q over [t_start, t_end] (log-linear fit)."""
    if traj.e_q is None:
        raise IntegrationError("energies not populated")
    mask = (traj.t >= t_start) & (traj.t <= t_end) & (traj.e_q > 0)
    if np.count_nonzero(mask) < 10:
        raise ParameterError("decay window contains too few points")
    slope = np.polyfit(traj.t[mask], np.log(traj.e_q[mask]), 1)[0]
    return -float(slope)
