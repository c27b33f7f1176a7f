"""Belief representation: a particle set over object states plus the
shared controller set-point.

All particles share one impedance set-point trajectory (the robot acts
on the real object; the particles are hypotheses of where that object
is). Each particle carries a constant grasp offset: the unknown error
between the commanded frame and the object it actually holds. The
offset displaces that particle's effective set-point for the entire
plan; it never decays, which is what makes unmodeled grasp error
dangerous. A particle that violated the wrench limit is dead: it stays
in the arrays but is excluded from goal and validity fractions and
contributes zero cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom2d import Pose2, wrap_angle

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class Belief:
    """Particle belief state.

    pose (N,3), twist (N,3) and grasp (N,3) are float64, alive (N,) is
    uint8; all four are read-only views. grasp rows are constant per
    particle: particle i tracks the set-point displaced by grasp[i].
    steps counts fixed substeps since the query start (time = steps *
    dt), cost is the accumulated objective.
    """

    pose: np.ndarray
    twist: np.ndarray
    grasp: np.ndarray
    alive: np.ndarray
    setpoint_pose: np.ndarray   # (3,)
    setpoint_twist: np.ndarray  # (3,)
    steps: int
    cost: float

    @property
    def n(self) -> int:
        return self.pose.shape[0]

    @property
    def alive_count(self) -> int:
        return int(np.count_nonzero(self.alive))

    @property
    def alive_frac(self) -> float:
        return self.alive_count / self.n

    def mean_pose(self) -> Pose2:
        """Mean pose of the live particles (circular mean for theta)."""
        m = self.alive != 0
        cnt = int(np.count_nonzero(m))
        if cnt == 0:
            raise ValueError("belief has no live particles")
        x = float(np.sum(self.pose[m, 0])) / cnt
        y = float(np.sum(self.pose[m, 1])) / cnt
        th = self.pose[m, 2]
        tm = math.atan2(float(np.sum(np.sin(th))), float(np.sum(np.cos(th))))
        return Pose2(x, y, wrap_angle(tm))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def make_belief(pose, twist, grasp, alive, setpoint_pose, setpoint_twist, steps, cost) -> Belief:
    return Belief(
        pose=_freeze(np.asarray(pose, dtype=np.float64)),
        twist=_freeze(np.asarray(twist, dtype=np.float64)),
        grasp=_freeze(np.asarray(grasp, dtype=np.float64)),
        alive=_freeze(np.asarray(alive, dtype=np.uint8)),
        setpoint_pose=_freeze(np.asarray(setpoint_pose, dtype=np.float64)),
        setpoint_twist=_freeze(np.asarray(setpoint_twist, dtype=np.float64)),
        steps=int(steps),
        cost=float(cost),
    )


@dataclass(frozen=True)
class UncertaintyModel:
    """Gaussian grasp-offset uncertainty (independent per axis).

    An offset is the constant error between the commanded frame and the
    held object; it shifts both the object's start pose and, because the
    controller cannot observe it, the particle's effective set-point for
    the entire execution.
    """

    sigma_trans: float
    sigma_rot: float

    def sample_offset(self, rng: np.random.Generator) -> np.ndarray:
        """One offset draw (three normals: x, y, theta)."""
        z = rng.standard_normal(3)
        return np.array([
            self.sigma_trans * z[0],
            self.sigma_trans * z[1],
            self.sigma_rot * z[2],
        ])

    def sample_pose(self, nominal: Pose2, rng: np.random.Generator) -> Pose2:
        """One noisy draw of the true start pose."""
        g = self.sample_offset(rng)
        return Pose2(
            nominal.x + g[0],
            nominal.y + g[1],
            wrap_angle(nominal.theta + g[2]),
        )


def sample_initial_belief(
    nominal: Pose2, model: UncertaintyModel, n: int, rng: np.random.Generator
) -> Belief:
    """Initial belief: n grasp-offset hypotheses about the nominal start.

    Particle poses start displaced by their offsets with zero spring
    deflection (the controller believes it is exactly at the nominal
    grasp). n == 1 is the no-uncertainty baseline: the single particle
    sits exactly at the nominal pose, zero offset, and no noise is
    drawn, which is what a planner ignoring uncertainty would use.
    """
    if n < 1:
        raise ValueError("need at least one particle")
    pose = np.empty((n, 3))
    pose[:] = (nominal.x, nominal.y, nominal.theta)
    grasp = np.zeros((n, 3))
    if n > 1:
        z = rng.standard_normal((n, 3))
        grasp[:, 0] = model.sigma_trans * z[:, 0]
        grasp[:, 1] = model.sigma_trans * z[:, 1]
        grasp[:, 2] = model.sigma_rot * z[:, 2]
        pose[:, 0] += grasp[:, 0]
        pose[:, 1] += grasp[:, 1]
        for i in range(n):
            pose[i, 2] = wrap_angle(pose[i, 2] + grasp[i, 2])
    return make_belief(
        pose=pose,
        twist=np.zeros((n, 3)),
        grasp=grasp,
        alive=np.ones(n, dtype=np.uint8),
        setpoint_pose=nominal.as_array(),
        setpoint_twist=np.zeros(3),
        steps=0,
        cost=0.0,
    )


@dataclass(frozen=True)
class GoalRegion:
    """Goal ball in the weighted pose metric.

    A pose is inside when dx^2 + dy^2 + (rot_weight * dtheta)^2 <
    radius^2 (strict). gamma is the fraction of the belief's particles
    that must be alive and inside for the belief to satisfy the goal.
    """

    pose: Pose2
    radius: float
    rot_weight: float = 0.1
    gamma: float = 0.9

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("goal radius must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")


def weighted_distance(a: Pose2, b: Pose2, rot_weight: float) -> float:
    """Pose metric sqrt(dx^2 + dy^2 + (w * dtheta)^2) with wrapped angle."""
    dx = a.x - b.x
    dy = a.y - b.y
    dth = wrap_angle(a.theta - b.theta)
    return math.sqrt(dx * dx + dy * dy + (rot_weight * dth) * (rot_weight * dth))


def pose_in_goal(pose: Pose2, goal: GoalRegion) -> bool:
    dx = pose.x - goal.pose.x
    dy = pose.y - goal.pose.y
    dth = wrap_angle(pose.theta - goal.pose.theta)
    d2 = dx * dx + dy * dy + (goal.rot_weight * dth) * (goal.rot_weight * dth)
    # bool() so numpy-scalar components cannot leak numpy types outward.
    return bool(d2 < goal.radius * goal.radius)


def in_goal(belief: Belief, goal: GoalRegion) -> bool:
    """True when at least gamma * N particles are alive and inside the ball."""
    dx = belief.pose[:, 0] - goal.pose.x
    dy = belief.pose[:, 1] - goal.pose.y
    dth = belief.pose[:, 2] - goal.pose.theta
    dth = dth - TWO_PI * np.round(dth / TWO_PI)
    d2 = dx * dx + dy * dy + (goal.rot_weight * dth) ** 2
    ok = (belief.alive != 0) & (d2 < goal.radius * goal.radius)
    return int(np.count_nonzero(ok)) >= goal.gamma * belief.n


def is_valid(belief: Belief, eta: float) -> bool:
    """True when at least eta * N particles are alive."""
    return belief.alive_count >= eta * belief.n
