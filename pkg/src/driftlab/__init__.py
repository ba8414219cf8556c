"""driftlab: closed-loop drift control laboratory.

Simulates a scale racecar with an asynchronous onboard sensor suite,
estimates its state with a multi-rate Kalman filter and a resilient
circle fit, and drives it around a commanded circle with a two-loop
sideslip/radius controller.
"""

from driftlab.frames import (
    GroundPose,
    MountOffset,
    PlanarVelocity,
    phi_of,
    sideslip_of,
    wrap_angle,
    zed_to_ground,
)

__all__ = [
    "GroundPose",
    "MountOffset",
    "PlanarVelocity",
    "phi_of",
    "sideslip_of",
    "wrap_angle",
    "zed_to_ground",
]

__version__ = "0.1.0"
