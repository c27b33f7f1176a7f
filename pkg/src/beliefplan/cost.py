"""Trajectory cost: accumulated spring-stretch power.

The impedance controller applies the restoring wrench -h to the object.
Whenever the object moves against that wrench (the virtual spring is
being stretched, e.g. the part is wedged while the set-point keeps
moving), the controller pumps energy into the deflection; that power is
the immediate cost. Motion with the restoring wrench (relaxation) is
free. A small positive floor epsilon keeps every reachable belief at
strictly positive running cost so an optimizing outer loop always has
room to improve and plan duration is weakly penalized.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geom2d import Twist2, Wrench2


@dataclass(frozen=True)
class CostParams:
    """epsilon: rate floor in watts; rate_clip: optional cap on the belief rate."""

    epsilon: float = 1e-3
    rate_clip: float | None = None

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be strictly positive")
        if self.rate_clip is not None and self.rate_clip <= self.epsilon:
            raise ValueError("rate_clip must exceed epsilon")


def immediate_particle_cost(applied: Wrench2, twist: Twist2) -> float:
    """Stretch power of one particle given the wrench applied to the object.

    P = applied . twist is the power delivered to the object; cost is
    -P when P < 0 (object moving against the applied wrench) else 0.
    """
    p = applied.fx * twist.vx + applied.fy * twist.vy + applied.tau * twist.omega
    return 0.0 if p >= 0.0 else -p


def belief_rate_from_sum(total: float, n: int, params: CostParams) -> float:
    """Belief cost rate from the sum of live-particle costs."""
    rate = params.epsilon + total / n
    if params.rate_clip is not None and rate > params.rate_clip:
        rate = params.rate_clip
    return rate


def immediate_belief_cost(particle_costs, alive, params: CostParams) -> float:
    """Belief cost rate: epsilon + the mean particle cost (dead count as zero)."""
    total = 0.0
    n = len(particle_costs)
    for i in range(n):
        if alive[i]:
            total += float(particle_costs[i])
    return belief_rate_from_sum(total, n, params)


def accumulate(acc: float, rate: float, dt: float) -> float:
    """Left-Riemann cost integration: one substep at the start-of-step rate."""
    return acc + rate * dt
