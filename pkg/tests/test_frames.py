import math

import pytest
from hypothesis import given, strategies as st

from driftlab.frames import (
    GroundPose,
    MountOffset,
    PlanarVelocity,
    phi_of,
    rotate_row,
    sideslip_of,
    wrap_angle,
    zed_to_ground,
)

finite_angles = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestWrapAngle:
    def test_identity(self):
        assert wrap_angle(0.0) == 0.0

    def test_three_half_pi(self):
        assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2, abs=1e-15)

    def test_negative_pi_maps_to_pi(self):
        # boundary convention: range is (-pi, pi]
        assert wrap_angle(-math.pi) == math.pi
        assert wrap_angle(math.pi) == math.pi

    def test_non_finite_rejected(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                wrap_angle(bad)

    @given(finite_angles)
    def test_idempotent(self, a):
        w = wrap_angle(a)
        assert wrap_angle(w) == w
        assert -math.pi < w <= math.pi

    @given(finite_angles)
    def test_congruent_mod_two_pi(self, a):
        w = wrap_angle(a)
        # difference is an integer multiple of 2*pi up to float error
        k = (a - w) / (2 * math.pi)
        assert abs(k - round(k)) < 1e-6


class TestZedToGround:
    def test_identity_rotation(self):
        assert zed_to_ground((1.0, 0.0), 0.0, 0.0, MountOffset()) == (1.0, 0.0)

    def test_quarter_turn(self):
        x, y = zed_to_ground((1.0, 0.0), math.pi / 2, 0.0, MountOffset())
        assert x == pytest.approx(0.0, abs=1e-15)
        assert y == pytest.approx(1.0, abs=1e-15)

    def test_offset_with_heading(self):
        # hand oracle: (1,0) @ I + (0.1,0) @ [[-1,0],[0,-1]] = (0.9, 0)
        x, y = zed_to_ground((1.0, 0.0), 0.0, math.pi, MountOffset(0.1, 0.0))
        assert x == pytest.approx(0.9, abs=1e-12)
        assert y == pytest.approx(0.0, abs=1e-12)

    @given(
        st.floats(-5, 5), st.floats(-5, 5), finite_angles, finite_angles
    )
    def test_zero_config_is_identity(self, px, py, psi, _unused):
        assert zed_to_ground((px, py), 0.0, psi, MountOffset()) == (px, py)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            zed_to_ground((math.nan, 0.0), 0.0, 0.0, MountOffset())


class TestSideslip:
    def test_zero(self):
        assert sideslip_of(0.0, 0.0) == 0.0

    def test_operating_point(self):
        assert sideslip_of(0.1, 1.5) == pytest.approx(-1.4, abs=1e-15)

    def test_wraps_large_difference(self):
        assert sideslip_of(-3.0, 3.0) == pytest.approx(-6.0 + 2 * math.pi, abs=1e-12)

    @given(finite_angles, finite_angles)
    def test_two_pi_shift_invariant(self, theta, psi):
        assert sideslip_of(theta + 2 * math.pi, psi) == pytest.approx(
            sideslip_of(theta, psi), abs=1e-9
        )


class TestPhi:
    def test_anticlockwise_equilibrium(self):
        phi = phi_of((1.0, 0.0), PlanarVelocity(0.0, 1.0), (0.0, 0.0))
        assert phi == pytest.approx(math.pi / 2, abs=1e-15)

    def test_rotated_equilibrium(self):
        phi = phi_of((0.0, 1.0), PlanarVelocity(-1.0, 0.0), (0.0, 0.0))
        assert phi == pytest.approx(math.pi / 2, abs=1e-15)

    def test_diagonal_velocity(self):
        phi = phi_of((1.0, 0.0), PlanarVelocity(1.0, 1.0), (0.0, 0.0))
        assert phi == pytest.approx(math.pi / 4, abs=1e-15)

    def test_zero_velocity_rejected(self):
        with pytest.raises(ValueError):
            phi_of((1.0, 0.0), PlanarVelocity(0.0, 0.0), (0.0, 0.0))

    def test_on_center_rejected(self):
        with pytest.raises(ValueError):
            phi_of((2.0, 3.0), PlanarVelocity(1.0, 0.0), (2.0, 3.0))

    @given(
        st.floats(-2, 2), st.floats(-2, 2),
        st.floats(0.1, 3), st.floats(-3, 3),
        st.floats(-2, 2), st.floats(-2, 2),
        st.floats(-2 * math.pi, 2 * math.pi),
    )
    def test_rigid_rotation_invariance(self, px, py, speed, vdir, cx, cy, rot):
        if (px, py) == (cx, cy):
            return
        vel = PlanarVelocity(speed * math.cos(vdir), speed * math.sin(vdir))
        base = phi_of((px, py), vel, (cx, cy))

        def rot_pt(p):
            c, s = math.cos(rot), math.sin(rot)
            return (c * p[0] - s * p[1], s * p[0] + c * p[1])

        rpos, rc = rot_pt((px, py)), rot_pt((cx, cy))
        rvx, rvy = rot_pt((vel.dx, vel.dy))
        rotated = phi_of(rpos, PlanarVelocity(rvx, rvy), rc)
        diff = wrap_angle(rotated - base)
        assert abs(diff) < 1e-12


class TestTypes:
    def test_pose_wraps_heading(self):
        assert GroundPose(0.0, 0.0, 3 * math.pi).psi == pytest.approx(math.pi)

    def test_velocity_attitude_undefined_at_rest(self):
        with pytest.raises(ValueError):
            PlanarVelocity(0.0, 0.0).attitude

    def test_mount_offset_finite(self):
        with pytest.raises(ValueError):
            MountOffset(math.inf, 0.0)

    def test_rotate_row_matches_matrix(self):
        # spot-check the row convention against an explicit product
        p, psi = (0.3, -0.7), 0.9
        c, s = math.cos(psi), math.sin(psi)
        expected = (p[0] * c - p[1] * s, p[0] * s + p[1] * c)
        assert rotate_row(p, psi) == expected
