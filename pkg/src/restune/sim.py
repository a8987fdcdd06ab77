"""Forward dynamics scenarios and observation functions.

Two scenarios are modelled:

* ``ball`` — a sphere dropped onto a flat plane, parameterised by its
  coefficient of restitution.  Integration runs through the kernel backend
  (semi-implicit Euler, 4 substeps per frame by default, event-corrected
  contacts).
* ``arm`` — a planar two-link arm tracking a circular end-effector path,
  parameterised by the payload mass at the end effector.  The rollout is the
  pair of joint torques from closed-form inverse kinematics and inverse
  dynamics, so torque is exactly affine in the payload mass.

All operations here are pure functions of their arguments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, ParameterDomainError, TrajectoryInfeasibleError

GRAVITY = 9.81

BALL_RADIUS = 0.5
BALL_RATE = 60.0
BALL_FRAMES = 400
BALL_SUBSTEPS = 4

# Planar arm constants: link lengths [m], link masses [kg] (uniform rods).
ARM_L1 = 0.4
ARM_L2 = 0.4
ARM_M1 = 2.0
ARM_M2 = 1.0


@dataclass(frozen=True)
class BallParams:
    """Bouncing-ball scenario parameters."""

    cor: float
    drop_height: float

    def __post_init__(self):
        if not 0.0 <= self.cor <= 1.0:
            raise ParameterDomainError(f"cor must lie in [0, 1], got {self.cor}")
        if self.drop_height <= BALL_RADIUS:
            raise ParameterDomainError(
                f"drop_height must exceed the ball radius {BALL_RADIUS}, got {self.drop_height}"
            )


@dataclass(frozen=True)
class ArmParams:
    """Arm scenario parameters."""

    payload_mass: float

    def __post_init__(self):
        if self.payload_mass < 0.0:
            raise ParameterDomainError(f"payload_mass must be >= 0, got {self.payload_mass}")


@dataclass(frozen=True)
class TrajectorySpec:
    """Circular end-effector path: center + radius, constant angular rate."""

    duration: float = 5.0
    center: tuple[float, float] = (0.45, 0.0)
    radius: float = 0.2
    angular_rate: float = 1.2

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass
class Rollout:
    """Fixed-rate time series of simulator states.

    ``frames`` has shape (n_frames, state_dim); rows are states at times
    0, dt, 2*dt, ...
    """

    dt: float
    frames: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2 or self.frames.shape[0] < 1:
            raise DimensionError("frames must be a non-empty 2-D (n_frames, dim) array")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.labels and len(self.labels) != self.frames.shape[1]:
            raise DimensionError("one label per state dimension required")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def state_dim(self) -> int:
        return self.frames.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_frames) * self.dt

    def to_csv(self, path) -> None:
        """Columnar CSV: header `t` then one column per state dimension."""
        labels = self.labels or tuple(f"c{i}" for i in range(self.state_dim))
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(("t",) + labels)
            for t, row in zip(self.times, self.frames):
                writer.writerow([f"{t:.9g}"] + [f"{x:.9g}" for x in row])


@dataclass
class Observation:
    """Fixed-length multi-channel signal derived from a rollout.

    ``channels`` has shape (n_channels, length).
    """

    channels: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.channels = np.asarray(self.channels)
        if self.channels.ndim != 2:
            raise DimensionError("channels must be 2-D (n_channels, length)")
        if self.channels.shape[1] < 2:
            raise DimensionError("observations need at least 2 samples per channel")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def length(self) -> int:
        return self.channels.shape[1]

    @property
    def flat_dim(self) -> int:
        return self.channels.size


def simulate_ball(
    params: BallParams,
    dt: float = 1.0 / BALL_RATE,
    n_frames: int = BALL_FRAMES,
    substeps: int = BALL_SUBSTEPS,
) -> Rollout:
    """Drop the ball from rest and record its xyz centre position per frame.

    The drop is purely vertical, so x = y = 0 throughout.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if dt <= 0:
        raise ValueError("dt must be positive")
    z = kernels.drop_positions(
        params.cor, params.drop_height, BALL_RADIUS, GRAVITY, dt, n_frames, substeps
    )
    frames = np.zeros((n_frames, 3))
    frames[:, 2] = z
    return Rollout(dt=dt, frames=frames, labels=("x", "y", "z"))


def _circle_path(traj: TrajectorySpec, t: np.ndarray):
    """Closed-form position, velocity, acceleration of the circular path."""
    w = traj.angular_rate
    cx, cz = traj.center
    c = np.cos(w * t)
    s = np.sin(w * t)
    px = cx + traj.radius * c
    pz = cz + traj.radius * s
    vx = -traj.radius * w * s
    vz = traj.radius * w * c
    ax = -traj.radius * w * w * c
    az = -traj.radius * w * w * s
    return px, pz, vx, vz, ax, az


def arm_inverse_kinematics(px, pz):
    """Elbow-up joint angles for end-effector position(s) (px, pz).

    Raises TrajectoryInfeasibleError when a point is out of reach.
    """
    px = np.asarray(px, dtype=float)
    pz = np.asarray(pz, dtype=float)
    d2 = px * px + pz * pz
    c2 = (d2 - ARM_L1**2 - ARM_L2**2) / (2.0 * ARM_L1 * ARM_L2)
    if np.any(c2 > 1.0 + 1e-12) or np.any(c2 < -1.0 - 1e-12):
        raise TrajectoryInfeasibleError(
            "end-effector path leaves the reachable annulus of the two-link arm"
        )
    q2 = np.arccos(np.clip(c2, -1.0, 1.0))
    q1 = np.arctan2(pz, px) - np.arctan2(ARM_L2 * np.sin(q2), ARM_L1 + ARM_L2 * np.cos(q2))
    return q1, q2


def arm_inverse_dynamics(q1, q2, dq1, dq2, ddq1, ddq2, payload_mass):
    """Joint torques of the vertical-plane two-link arm with a point payload
    at the end effector.

    Links are uniform rods; every coefficient is affine in ``payload_mass``,
    so the returned torques are too.
    """
    lc1 = ARM_L1 / 2.0
    lc2 = ARM_L2 / 2.0
    i1 = ARM_M1 * ARM_L1**2 / 12.0
    i2 = ARM_M2 * ARM_L2**2 / 12.0
    mp = payload_mass

    c2 = np.cos(q2)
    s2 = np.sin(q2)
    c1 = np.cos(q1)
    c12 = np.cos(q1 + q2)

    h11 = (
        ARM_M1 * lc1**2
        + i1
        + ARM_M2 * (ARM_L1**2 + lc2**2 + 2.0 * ARM_L1 * lc2 * c2)
        + i2
        + mp * (ARM_L1**2 + ARM_L2**2 + 2.0 * ARM_L1 * ARM_L2 * c2)
    )
    h12 = ARM_M2 * (lc2**2 + ARM_L1 * lc2 * c2) + i2 + mp * (ARM_L2**2 + ARM_L1 * ARM_L2 * c2)
    h22 = ARM_M2 * lc2**2 + i2 + mp * ARM_L2**2
    coriolis = ARM_M2 * ARM_L1 * lc2 * s2 + mp * ARM_L1 * ARM_L2 * s2

    g1 = (ARM_M1 * lc1 + ARM_M2 * ARM_L1 + mp * ARM_L1) * GRAVITY * c1 + (
        ARM_M2 * lc2 + mp * ARM_L2
    ) * GRAVITY * c12
    g2 = (ARM_M2 * lc2 + mp * ARM_L2) * GRAVITY * c12

    tau1 = h11 * ddq1 + h12 * ddq2 - coriolis * (2.0 * dq1 * dq2 + dq2 * dq2) + g1
    tau2 = h12 * ddq1 + h22 * ddq2 + coriolis * dq1 * dq1 + g2
    return tau1, tau2


def simulate_arm(
    params: ArmParams,
    traj: TrajectorySpec | None = None,
    dt: float = 1.0 / BALL_RATE,
) -> Rollout:
    """Torque rollout of the arm tracking the circular path.

    Joint kinematics come from closed-form IK and analytic path derivatives,
    torques from closed-form inverse dynamics; nothing is integrated, so the
    result is exactly reproducible.
    """
    if traj is None:
        traj = TrajectorySpec()
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(traj.duration / dt))
    t = np.arange(n) * dt
    px, pz, vx, vz, ax, az = _circle_path(traj, t)
    q1, q2 = arm_inverse_kinematics(px, pz)

    s1 = np.sin(q1)
    c1 = np.cos(q1)
    s12 = np.sin(q1 + q2)
    c12 = np.cos(q1 + q2)

    # Jacobian of the forward map and its inverse (elbow-up keeps det != 0).
    j11 = -ARM_L1 * s1 - ARM_L2 * s12
    j12 = -ARM_L2 * s12
    j21 = ARM_L1 * c1 + ARM_L2 * c12
    j22 = ARM_L2 * c12
    det = j11 * j22 - j12 * j21
    dq1 = (j22 * vx - j12 * vz) / det
    dq2 = (-j21 * vx + j11 * vz) / det

    # dJ/dt * dq, then ddq = J^-1 (a - dJ dq)
    dsum = dq1 + dq2
    dj11 = -ARM_L1 * c1 * dq1 - ARM_L2 * c12 * dsum
    dj12 = -ARM_L2 * c12 * dsum
    dj21 = -ARM_L1 * s1 * dq1 - ARM_L2 * s12 * dsum
    dj22 = -ARM_L2 * s12 * dsum
    rx = ax - (dj11 * dq1 + dj12 * dq2)
    rz = az - (dj21 * dq1 + dj22 * dq2)
    ddq1 = (j22 * rx - j12 * rz) / det
    ddq2 = (-j21 * rx + j11 * rz) / det

    tau1, tau2 = arm_inverse_dynamics(q1, q2, dq1, dq2, ddq1, ddq2, params.payload_mass)
    frames = np.column_stack([tau1, tau2])
    return Rollout(dt=dt, frames=frames, labels=("tau_shoulder", "tau_elbow"))


def observe_identity(rollout: Rollout) -> Observation:
    """Identity observation: one channel per state dimension, verbatim."""
    if rollout.n_frames < 2:
        raise DimensionError("rollout too short to observe")
    return Observation(channels=rollout.frames.T.copy(), sample_rate=1.0 / rollout.dt)


def observe_projected(
    rollout: Rollout, camera_seed: int, noise_std: float = 0.01
) -> Observation:
    """Synthetic single-channel camera observation of a ball rollout.

    A pinhole camera at a randomised pose (radius U(5,10) m, azimuth
    U(0,2pi), height U(5,8) m, aimed at (0,0,2)) projects the ball centre;
    the vertical image coordinate plus Gaussian pixel noise is returned,
    normalised to [0, 1].  Higher ball positions map to smaller values.
    """
    if rollout.state_dim != 3:
        raise DimensionError("projected observation requires a 3-D position rollout")
    rng = np.random.default_rng(camera_seed)
    r = rng.uniform(5.0, 10.0)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    zc = rng.uniform(5.0, 8.0)
    cam = np.array([r * np.cos(theta), r * np.sin(theta), zc])
    aim = np.array([0.0, 0.0, 2.0])

    fwd = aim - cam
    fwd = fwd / np.linalg.norm(fwd)
    horiz = np.hypot(fwd[0], fwd[1])
    right = np.array([fwd[1], -fwd[0], 0.0]) / horiz
    up = np.cross(right, fwd)

    rel = rollout.frames - cam
    depth = rel @ fwd
    y_img = (rel @ up) / depth
    # focal 0.5 => 90 degree vertical field of view
    v = 0.5 - 0.5 * y_img
    if noise_std > 0:
        v = v + rng.normal(0.0, noise_std, size=v.shape)
    v = np.clip(v, 0.0, 1.0)
    return Observation(channels=v[np.newaxis, :], sample_rate=1.0 / rollout.dt)
