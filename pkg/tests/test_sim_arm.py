"""Two-link-arm kinematics and dynamics against closed-form oracles."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from restune import (
    ArmParams,
    ParameterDomainError,
    TrajectoryInfeasibleError,
    TrajectorySpec,
    simulate_arm,
)
from restune.sim import (
    ARM_L1,
    ARM_L2,
    GRAVITY,
    arm_inverse_dynamics,
    arm_inverse_kinematics,
)


def _forward(q1, q2):
    return (
        ARM_L1 * np.cos(q1) + ARM_L2 * np.cos(q1 + q2),
        ARM_L1 * np.sin(q1) + ARM_L2 * np.sin(q1 + q2),
    )


@given(
    st.floats(0.05, ARM_L1 + ARM_L2 - 0.01),
    st.floats(0, 2 * np.pi),
)
def test_ik_inverts_forward_kinematics(reach, angle):
    px, pz = reach * np.cos(angle), reach * np.sin(angle)
    q1, q2 = arm_inverse_kinematics(px, pz)
    fx, fz = _forward(q1, q2)
    assert fx == pytest.approx(px, abs=1e-9)
    assert fz == pytest.approx(pz, abs=1e-9)
    # Elbow-up branch: the relative elbow angle is in [0, pi].
    assert 0.0 <= q2 <= np.pi


def test_ik_rejects_out_of_reach():
    with pytest.raises(TrajectoryInfeasibleError):
        arm_inverse_kinematics(ARM_L1 + ARM_L2 + 0.01, 0.0)


def test_static_torque_matches_moment_arm():
    # At rest, the shoulder torque from an extra payload is exactly
    # mass * g * horizontal distance to the end effector.
    q1, q2 = arm_inverse_kinematics(0.55, 0.1)
    for extra in (0.5, 1.7):
        t0, _ = arm_inverse_dynamics(q1, q2, 0.0, 0.0, 0.0, 0.0, 0.0)
        t1, _ = arm_inverse_dynamics(q1, q2, 0.0, 0.0, 0.0, 0.0, extra)
        assert t1 - t0 == pytest.approx(extra * GRAVITY * 0.55, rel=1e-12)


def test_static_elbow_torque_oracle():
    q1, q2 = arm_inverse_kinematics(0.55, 0.1)
    px, pz = _forward(q1, q2)
    elbow_x = ARM_L1 * np.cos(q1)
    for extra in (0.3, 1.1):
        _, e0 = arm_inverse_dynamics(q1, q2, 0.0, 0.0, 0.0, 0.0, 0.0)
        _, e1 = arm_inverse_dynamics(q1, q2, 0.0, 0.0, 0.0, 0.0, extra)
        assert e1 - e0 == pytest.approx(extra * GRAVITY * (px - elbow_x), rel=1e-9)


def test_torque_is_affine_in_payload():
    a = simulate_arm(ArmParams(0.0)).frames
    b = simulate_arm(ArmParams(1.0)).frames
    c = simulate_arm(ArmParams(2.0)).frames
    assert np.max(np.abs((c - b) - (b - a))) < 1e-9


def test_torque_monotone_in_payload_on_path():
    # On the standard circle the gravity load dominates: every frame's
    # shoulder torque grows with payload mass.
    taus = [simulate_arm(ArmParams(m)).frames[:, 0] for m in (0.0, 0.5, 1.0, 2.0)]
    for lighter, heavier in zip(taus, taus[1:]):
        assert np.all(heavier > lighter)


def test_rollout_layout_and_determinism():
    roll = simulate_arm(ArmParams(0.5))
    assert roll.n_frames == 300
    assert roll.labels == ("tau_shoulder", "tau_elbow")
    again = simulate_arm(ArmParams(0.5))
    assert np.array_equal(roll.frames, again.frames)


def test_custom_trajectory_duration():
    traj = TrajectorySpec(duration=2.0)
    assert simulate_arm(ArmParams(0.1), traj).n_frames == 120


def test_infeasible_circle_raises():
    with pytest.raises(TrajectoryInfeasibleError):
        simulate_arm(ArmParams(0.1), TrajectorySpec(center=(0.7, 0.0), radius=0.2))


def test_negative_mass_rejected():
    with pytest.raises(ParameterDomainError):
        ArmParams(-0.5)
