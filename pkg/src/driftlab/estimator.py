"""Asynchronous Kalman filtering over the drift state.

State vector: X = [x, y, theta, v] with theta the velocity attitude
angle and v the speed magnitude.  Between measurements the state
follows the stable circular-drift transition

    x')      (1  0  0  cos(theta) dt) (x)
    y')    = (0  1  0  sin(theta) dt) (y)   + dt * B u
    theta')  (0  0  1  dt / r       ) (theta)
    v')      (0  0  0  1            ) (v)

with r the commanded reference radius.  Measurements arrive one sensor
per timestamp, at whatever rate each sensor runs; ``predict`` advances
the estimate to the measurement time and ``update`` folds in only the
reporting sensor's channels.

The transition matrix doubles as the covariance propagator by default
(the state-dependent entries sit in the v column, so A @ X is the exact
nonlinear map).  ``full_jacobian=True`` adds the d/dtheta terms to the
covariance propagation for comparison; the state map is unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from driftlab.frames import wrap_angle

STATE_DIM = 4


class SensorId(str, Enum):
    ZED_POS = "ZED_pos"
    D435I_POS = "D435i_pos"
    IMU_THETA = "IMU_theta"


# per-sensor observation rows and which of those rows are angles
_SENSOR_ROWS: dict[SensorId, np.ndarray] = {
    SensorId.ZED_POS: np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]]),
    SensorId.D435I_POS: np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]]),
    SensorId.IMU_THETA: np.array([[0, 0, 1.0, 0]]),
}
_ANGLE_ROWS: dict[SensorId, tuple[int, ...]] = {
    SensorId.ZED_POS: (),
    SensorId.D435I_POS: (),
    SensorId.IMU_THETA: (0,),
}


@dataclass
class Measurement:
    """One timestamped report from exactly one sensor.

    ``aux_psi`` rides along on IMU reports: the raw heading angle used
    by the sideslip estimator and the camera frame corrections.  It is
    not a filter channel.
    """

    t: float
    sensor: SensorId
    value: np.ndarray
    noise_var: np.ndarray
    aux_psi: float | None = None

    def __post_init__(self) -> None:
        self.sensor = SensorId(self.sensor)
        self.value = np.atleast_1d(np.asarray(self.value, dtype=float))
        self.noise_var = np.atleast_1d(np.asarray(self.noise_var, dtype=float))
        rows = _SENSOR_ROWS[self.sensor].shape[0]
        if self.value.shape != (rows,):
            raise ValueError(
                f"{self.sensor.value} expects {rows} channel(s), got {self.value.shape}"
            )
        if self.noise_var.shape != (rows,):
            raise ValueError("noise_var must have one entry per channel")
        if np.any(self.noise_var < 0):
            raise ValueError("noise variances must be non-negative")


@dataclass
class NoiseModel:
    """Process-noise intensity, per-sensor channel variances, input gains."""

    Q_rate: np.ndarray
    R: dict[SensorId, np.ndarray] = field(default_factory=dict)
    B_delta: float = 0.0
    B_omega: float = 0.0

    def __post_init__(self) -> None:
        self.Q_rate = np.asarray(self.Q_rate, dtype=float)
        if self.Q_rate.shape != (STATE_DIM, STATE_DIM):
            raise ValueError("Q_rate must be 4x4")
        if np.any(np.diag(self.Q_rate) < 0):
            raise ValueError("Q_rate diagonal must be non-negative")
        self.R = {
            SensorId(k): np.atleast_1d(np.asarray(v, dtype=float))
            for k, v in self.R.items()
        }
        for v in self.R.values():
            if np.any(v < 0):
                raise ValueError("R entries must be non-negative")


@dataclass
class StateEstimate:
    xhat: np.ndarray
    P: np.ndarray
    t: float

    def __post_init__(self) -> None:
        self.xhat = np.asarray(self.xhat, dtype=float).reshape(STATE_DIM)
        self.P = np.asarray(self.P, dtype=float).reshape(STATE_DIM, STATE_DIM)

    @property
    def pos(self) -> tuple[float, float]:
        return (float(self.xhat[0]), float(self.xhat[1]))

    @property
    def theta(self) -> float:
        return float(self.xhat[2])

    @property
    def v(self) -> float:
        return float(self.xhat[3])


def transition_matrix(
    theta: float, dt: float, r_nominal: float, full_jacobian: bool = False, v: float = 0.0
) -> np.ndarray:
    A = np.eye(STATE_DIM)
    A[0, 3] = math.cos(theta) * dt
    A[1, 3] = math.sin(theta) * dt
    A[2, 3] = dt / r_nominal
    if full_jacobian:
        A[0, 2] = -v * math.sin(theta) * dt
        A[1, 2] = v * math.cos(theta) * dt
    return A


def _input_matrix(nm: NoiseModel) -> np.ndarray:
    B = np.zeros((STATE_DIM, 2))
    B[2, 0] = nm.B_delta
    B[3, 1] = nm.B_omega
    return B


def predict(
    est: StateEstimate,
    u,
    dt: float,
    nm: NoiseModel,
    r_nominal: float,
    full_jacobian: bool = False,
) -> StateEstimate:
    """Advance the estimate by dt under the circular-drift transition.

    ``u`` is any (steering, wheel speed) pair.  Covariance picks up
    Q_rate * dt so non-uniform sampling intervals stay consistent.
    """
    if dt < 0:
        raise ValueError(f"cannot predict backwards (dt={dt})")
    if r_nominal <= 0:
        raise ValueError("r_nominal must be positive")
    delta, omega = u
    theta = est.theta
    A = transition_matrix(theta, dt, r_nominal)
    x_new = A @ est.xhat + dt * (_input_matrix(nm) @ np.array([delta, omega]))
    x_new[2] = wrap_angle(x_new[2])
    A_cov = (
        transition_matrix(theta, dt, r_nominal, full_jacobian=True, v=est.v)
        if full_jacobian
        else A
    )
    P_new = A_cov @ est.P @ A_cov.T + nm.Q_rate * dt
    P_new = 0.5 * (P_new + P_new.T)
    return StateEstimate(x_new, P_new, est.t + dt)


def kalman_update(
    est: StateEstimate,
    C: np.ndarray,
    value: np.ndarray,
    noise_var: np.ndarray,
    angle_rows: tuple[int, ...] = (),
) -> StateEstimate:
    """Textbook gain/covariance/state update for an arbitrary C block.

    Angle rows get their innovation wrapped.  A zero C row contributes
    zero gain, leaving the estimate untouched.  Raises LinAlgError when
    the innovation covariance has a negative eigenvalue.  A singular
    but PSD innovation covariance (perfect sensors, collapsed prior) is
    handled with a pseudo-inverse gain: deficient directions get zero
    gain instead of blowing up.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    value = np.atleast_1d(np.asarray(value, dtype=float))
    noise_var = np.atleast_1d(np.asarray(noise_var, dtype=float))
    S = C @ est.P @ C.T + np.diag(noise_var)
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    if w[0] < -1e-9 * max(1.0, float(np.abs(w).max())):
        raise np.linalg.LinAlgError("innovation covariance is not positive semidefinite")
    cutoff = 1e-12 * max(float(w[-1]), 0.0)
    keep = w > cutoff
    w_inv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    S_pinv = (V * w_inv) @ V.T
    K = est.P @ C.T @ S_pinv
    nu = value - C @ est.xhat
    for i in angle_rows:
        nu[i] = wrap_angle(nu[i])
    x_new = est.xhat + K @ nu
    x_new[2] = wrap_angle(x_new[2])
    IKC = np.eye(STATE_DIM) - K @ C
    P_new = IKC @ est.P @ IKC.T + K @ np.diag(noise_var) @ K.T
    P_new = 0.5 * (P_new + P_new.T)
    return StateEstimate(x_new, P_new, est.t)


def update(est: StateEstimate, m: Measurement, sequential: bool = False) -> StateEstimate:
    """Fold one sensor report into the estimate at its timestamp.

    The estimate must already sit at m.t (predict first).  Two-channel
    position fixes apply as one block by default; ``sequential=True``
    applies them as scalar updates channel by channel, which agrees with
    the block form for diagonal noise.
    """
    if m.t < est.t - 1e-12:
        raise ValueError(
            f"measurement at t={m.t} is earlier than estimate time {est.t}; "
            "streams must be merged in timestamp order"
        )
    if m.t > est.t + 1e-12:
        raise ValueError(
            f"measurement at t={m.t} is ahead of estimate time {est.t}; call predict first"
        )
    C = _SENSOR_ROWS[m.sensor]
    angle_rows = _ANGLE_ROWS[m.sensor]
    if not sequential:
        return kalman_update(est, C, m.value, m.noise_var, angle_rows)
    for i in range(C.shape[0]):
        est = kalman_update(
            est,
            C[i : i + 1],
            m.value[i : i + 1],
            m.noise_var[i : i + 1],
            (0,) if i in angle_rows else (),
        )
    return est


def resilient_sideslip(
    prev_est: StateEstimate,
    cur_est: StateEstimate,
    psi_now: float,
    r_hat: float,
    dt: float,
    h: float = 20.0,
) -> float:
    """Sideslip estimate gated against velocity-angle jumps.

    When the velocity attitude moved less than h*dt between consecutive
    estimates (strictly), the direct estimate theta - psi is used.
    Otherwise theta is treated as an outlier and replaced by the
    circular-drift prediction from the previous step:
    theta_prev + v_prev * dt / r_hat.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if r_hat <= 0:
        raise ValueError("r_hat must be positive")
    if prev_est.v == 0.0 or cur_est.v == 0.0:
        raise ValueError("sideslip undefined: zero speed in estimate")
    dtheta = wrap_angle(cur_est.theta - prev_est.theta)
    if abs(dtheta) < h * dt:
        return wrap_angle(cur_est.theta - psi_now)
    predicted = prev_est.theta + prev_est.v * dt / r_hat
    return wrap_angle(predicted - psi_now)
