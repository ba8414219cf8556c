"""Planar angle conventions and coordinate frame transformations.

Ground frame: X east, Y north, angles measured anticlockwise from +X
(atan2 convention).  Body frame: X to the right of the car, Y straight
ahead.  All angles are radians and wrapped to (-pi, pi], with -pi
mapping to +pi so every direction has a unique representative.

The camera-frame correction formulas use a row-vector convention:
ground = row_vector @ T, with T the 2x2 matrix built by
:func:`rotation_row`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]; exact -pi maps to +pi."""
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {a!r}")
    w = math.remainder(a, TWO_PI)
    if w <= -math.pi:
        w = math.pi
    return w


@dataclass
class GroundPose:
    """Vehicle center position and heading in the ground frame.

    ``psi`` is the heading angle: the direction of the body Y-axis
    (straight ahead) projected onto the ground XY-plane, stored wrapped.
    """

    x: float
    y: float
    psi: float

    def __post_init__(self) -> None:
        self.psi = wrap_angle(self.psi)


@dataclass(frozen=True)
class PlanarVelocity:
    """Ground-frame velocity components in m/s."""

    dx: float
    dy: float

    @property
    def speed(self) -> float:
        return math.hypot(self.dx, self.dy)

    @property
    def attitude(self) -> float:
        """Velocity attitude angle; undefined (raises) at zero speed."""
        if self.dx == 0.0 and self.dy == 0.0:
            raise ValueError("velocity attitude undefined at zero speed")
        return math.atan2(self.dy, self.dx)


@dataclass(frozen=True)
class MountOffset:
    """Sensor installation point minus vehicle center, body frame, meters."""

    px: float = 0.0
    py: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.px) and math.isfinite(self.py)):
            raise ValueError("mount offset must be finite")


def rotation_row(psi: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """2x2 rotation for row vectors: [[cos, sin], [-sin, cos]]."""
    c, s = math.cos(psi), math.sin(psi)
    return ((c, s), (-s, c))


def rotate_row(p: tuple[float, float], psi: float) -> tuple[float, float]:
    """Apply the row-vector rotation: returns p @ rotation_row(psi)."""
    c, s = math.cos(psi), math.sin(psi)
    return (p[0] * c - p[1] * s, p[0] * s + p[1] * c)


def zed_to_ground(
    p_zed: tuple[float, float],
    psi0: float,
    psi: float,
    offset: MountOffset,
) -> tuple[float, float]:
    """Correct a tracking-camera position fix into the ground frame.

    ``psi0`` is the heading recorded when the camera initialized its own
    frame, ``psi`` the current heading used to place the mount offset.
    Returns p_zed @ T0 + (px, py) @ T  (row-vector convention).
    """
    for v in (p_zed[0], p_zed[1], psi0, psi):
        if not math.isfinite(v):
            raise ValueError("zed_to_ground requires finite inputs")
    gx, gy = rotate_row(p_zed, psi0)
    ox, oy = rotate_row((offset.px, offset.py), psi)
    return (gx + ox, gy + oy)


def ground_to_zed(
    p_ground: tuple[float, float],
    psi0: float,
    psi: float,
    offset: MountOffset,
) -> tuple[float, float]:
    """Inverse of :func:`zed_to_ground` (used by the sensor simulator)."""
    ox, oy = rotate_row((offset.px, offset.py), psi)
    # T0 is orthonormal: inverse rotation is by -psi0.
    return rotate_row((p_ground[0] - ox, p_ground[1] - oy), -psi0)


def sideslip_of(theta: float, psi: float) -> float:
    """Sideslip angle beta = theta - psi, wrapped.

    ``theta`` is the velocity attitude, ``psi`` the heading.  Negative
    beta (0 > beta > -pi) means the car slips to the right of its nose.
    """
    if not (math.isfinite(theta) and math.isfinite(psi)):
        raise ValueError("sideslip_of requires finite angles")
    return wrap_angle(theta - psi)


def phi_of(
    pos: tuple[float, float],
    vel: PlanarVelocity,
    center: tuple[float, float],
) -> float:
    """Circumnavigation angle: velocity attitude minus center-to-car bearing.

    phi = pi/2 corresponds to perfect anticlockwise circular motion
    around ``center``.  Undefined (raises) at zero speed or when the car
    sits exactly on the center.
    """
    rx, ry = pos[0] - center[0], pos[1] - center[1]
    if rx == 0.0 and ry == 0.0:
        raise ValueError("phi undefined: position coincides with circle center")
    return wrap_angle(vel.attitude - math.atan2(ry, rx))
