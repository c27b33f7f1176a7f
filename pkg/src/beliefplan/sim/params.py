"""Parameter types for the impedance-controlled planar simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..geom2d import Pose2, Twist2, Wrench2, pose_error


def critical_damping(kp: float, m: float) -> float:
    """Damping gain that makes the second-order response aperiodic."""
    return 2.0 * math.sqrt(kp * m)


@dataclass(frozen=True)
class ImpedanceParams:
    """Diagonal Cartesian impedance gains.

    kp_* are stiffnesses (N/m, N*m/rad); kd_* are damping gains. Use
    `critically_damped` to derive the damping from the body so the
    closed-loop response has no overshoot.
    """

    kp_trans: float
    kp_rot: float
    kd_trans: float
    kd_rot: float

    def __post_init__(self) -> None:
        if min(self.kp_trans, self.kp_rot) <= 0.0 or min(self.kd_trans, self.kd_rot) < 0.0:
            raise ValueError("stiffness must be positive and damping non-negative")

    @staticmethod
    def critically_damped(kp_trans: float, kp_rot: float, body: "BodyParams") -> "ImpedanceParams":
        return ImpedanceParams(
            kp_trans=kp_trans,
            kp_rot=kp_rot,
            kd_trans=critical_damping(kp_trans, body.mass),
            kd_rot=critical_damping(kp_rot, body.inertia),
        )


@dataclass(frozen=True)
class BodyParams:
    """Rigid-body mass properties; the body frame origin is the center of mass."""

    mass: float
    inertia: float

    def __post_init__(self) -> None:
        if self.mass <= 0.0 or self.inertia <= 0.0:
            raise ValueError("mass and inertia must be positive")


@dataclass(frozen=True)
class SimLimits:
    """Interaction wrench limits; a particle exceeding either is removed."""

    f_max: float
    tau_max: float

    def __post_init__(self) -> None:
        if self.f_max <= 0.0 or self.tau_max <= 0.0:
            raise ValueError("wrench limits must be positive")


@dataclass(frozen=True)
class ContactParams:
    """Sequential-impulse solver constants."""

    mu: float = 0.3
    baumgarte: float = 0.2
    slop: float = 1e-4
    iterations: int = 16

    def __post_init__(self) -> None:
        if not 0.0 <= self.mu:
            raise ValueError("friction coefficient must be non-negative")
        if not 0.0 < self.baumgarte <= 1.0:
            raise ValueError("baumgarte factor must be in (0, 1]")
        if self.iterations < 1:
            raise ValueError("need at least one solver iteration")


@dataclass(frozen=True)
class Particle:
    """One hypothesis of the true object state."""

    pose: Pose2
    twist: Twist2
    alive: bool = True


def impedance_wrench(
    pose: Pose2,
    twist: Twist2,
    setpoint_pose: Pose2,
    setpoint_twist: Twist2,
    gains: ImpedanceParams,
) -> Wrench2:
    """Deflection wrench h = K_P (x - x_d) + K_D (xdot - xdot_d).

    This is the wrench the virtual spring-damper is stretched by; the
    controller applies -h to the object (restoring). Cost and wrench
    limits are both defined on this quantity.
    """
    ex, ey, et = pose_error(pose, setpoint_pose)
    return Wrench2(
        gains.kp_trans * ex + gains.kd_trans * (twist.vx - setpoint_twist.vx),
        gains.kp_trans * ey + gains.kd_trans * (twist.vy - setpoint_twist.vy),
        gains.kp_rot * et + gains.kd_rot * (twist.omega - setpoint_twist.omega),
    )
