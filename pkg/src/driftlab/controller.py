"""Two-loop drift controller with circumnavigation radius guidance.

The sideslip loop holds the sideslip angle at its reference by steering
(delta); the circle loop holds the fitted trajectory radius at the
reference radius by wheel speed (omega).  Both loops are PID around
constant feedforwards that hold the nominal drift equilibrium.

The reference radius itself moves with the circumnavigation angle phi:
r_ref = r0 - gamma * (pi/2 - phi).  Driving phi to pi/2 recenters the
trajectory on the commanded circle; at phi = pi/2 the reference radius
equals the commanded one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from driftlab.estimator import StateEstimate
from driftlab.frames import PlanarVelocity, phi_of, wrap_angle

R_REF_FLOOR = 0.2  # fraction of r0; keeps the guidance denominator positive


class ControlCommand(NamedTuple):
    delta: float  # front wheel steering angle, rad
    omega: float  # wheel rotational speed, rad/s


@dataclass(frozen=True)
class CircleTask:
    """Commanded drift circle and guidance constants."""

    x0: float = 0.0
    y0: float = 0.0
    r0: float = 1.0
    beta_ref: float = -1.4
    gamma: float = 0.5
    tau_nominal: float = 4.5

    def __post_init__(self) -> None:
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not (-math.pi < self.beta_ref < 0):
            raise ValueError("beta_ref must lie in (-pi, 0) for anticlockwise drift")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x0, self.y0)


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    ff: float = 0.0
    i_limit: float = math.inf
    out_min: float = -math.inf
    out_max: float = math.inf

    def __post_init__(self) -> None:
        if not self.out_min < self.out_max:
            raise ValueError("out_min must be below out_max")
        if self.i_limit < 0:
            raise ValueError("i_limit must be non-negative")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0


def pid_step(g: PidGains, e: float, dt: float, state: PidState) -> tuple[float, PidState]:
    """One PID evaluation: trapezoidal integral with clamp, backward-
    difference derivative, saturated output.  Returns (output, state)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    integral = state.integral + 0.5 * dt * (e + state.prev_error)
    integral = min(max(integral, -g.i_limit), g.i_limit)
    derivative = (e - state.prev_error) / dt
    out = g.ff + g.kp * e + g.ki * integral + g.kd * derivative
    out = min(max(out, g.out_min), g.out_max)
    return out, PidState(integral=integral, prev_error=e)


def reference_radius(phi: float, task: CircleTask) -> float:
    """Guidance law r_ref = r0 - gamma*(pi/2 - phi), floored at 0.2*r0."""
    r_ref = task.r0 - task.gamma * (math.pi / 2.0 - phi)
    return max(r_ref, R_REF_FLOOR * task.r0)


@dataclass(frozen=True)
class ControllerGains:
    sideslip: PidGains
    circle: PidGains


@dataclass(frozen=True)
class ControllerState:
    slip: PidState = field(default_factory=PidState)
    circle: PidState = field(default_factory=PidState)


def controller_step(
    est: StateEstimate,
    beta_hat: float,
    r_fit: float,
    task: CircleTask,
    gains: ControllerGains,
    state: ControllerState,
    dt: float,
) -> tuple[ControlCommand, ControllerState]:
    """One control tick: sideslip PID on delta, circle PID on omega.

    phi comes from the estimated position/velocity against the task
    center; its domain errors (zero speed, on-center position)
    propagate.
    """
    vel = PlanarVelocity(est.v * math.cos(est.theta), est.v * math.sin(est.theta))
    phi = phi_of(est.pos, vel, task.center)
    e_beta = wrap_angle(beta_hat - task.beta_ref)
    e_r = r_fit - reference_radius(phi, task)
    delta, slip_state = pid_step(gains.sideslip, e_beta, dt, state.slip)
    omega, circle_state = pid_step(gains.circle, e_r, dt, state.circle)
    return ControlCommand(delta, omega), ControllerState(slip_state, circle_state)


class DriftController:
    """Stateful wrapper owning the two integrators, stepped by the harness."""

    def __init__(self, task: CircleTask, gains: ControllerGains):
        self.task = task
        self.gains = gains
        self.state = ControllerState()

    def step(self, est: StateEstimate, beta_hat: float, r_fit: float, dt: float) -> ControlCommand:
        cmd, self.state = controller_step(
            est, beta_hat, r_fit, self.task, self.gains, self.state, dt
        )
        return cmd

    def reset(self) -> None:
        self.state = ControllerState()


def circumnav_derivatives(
    d: float, phi: float, v: float, task: CircleTask
) -> tuple[float, float]:
    """Range/angle dynamics of the guidance loop, for verification.

    d_dot = v cos(phi); phi_dot = v / (r0 - gamma*(pi/2 - phi)) - (v/d) sin(phi).
    The effective radius is used raw here (no floor): a non-positive
    value is a domain error, as is non-positive range d.
    """
    if d <= 0:
        raise ValueError("range d must be positive")
    r_eff = task.r0 - task.gamma * (math.pi / 2.0 - phi)
    if r_eff <= 0:
        raise ValueError(f"effective radius {r_eff:.4f} is not positive")
    d_dot = v * math.cos(phi)
    phi_dot = v / r_eff - (v / d) * math.sin(phi)
    return d_dot, phi_dot
