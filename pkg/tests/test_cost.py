"""Spring-stretch cost definitions."""

import pytest

from beliefplan.cost import (
    CostParams,
    accumulate,
    belief_rate_from_sum,
    immediate_belief_cost,
    immediate_particle_cost,
)
from beliefplan.geom2d import Twist2, Wrench2


class TestParticleCost:
    def test_relaxation_is_free(self):
        # Object moving with the applied restoring wrench (settling
        # toward the set-point) extracts nothing from the controller.
        applied = Wrench2(10.0, 0.0, 0.0)
        v = Twist2(0.5, 0.0, 0.0)
        assert immediate_particle_cost(applied, v) == 0.0

    def test_stretching_costs_power(self):
        # Object dragged against the applied wrench: P = -5 W, cost 5.
        applied = Wrench2(10.0, 0.0, 0.0)
        v = Twist2(-0.5, 0.0, 0.0)
        assert immediate_particle_cost(applied, v) == pytest.approx(5.0)

    def test_all_axes_contribute(self):
        applied = Wrench2(-1.0, -2.0, -3.0)
        v = Twist2(1.0, 1.0, 1.0)
        assert immediate_particle_cost(applied, v) == pytest.approx(6.0)

    def test_zero_at_rest(self):
        assert immediate_particle_cost(Wrench2(5, 5, 5), Twist2(0, 0, 0)) == 0.0


class TestBeliefRate:
    def test_floor(self):
        p = CostParams(epsilon=1e-3)
        assert belief_rate_from_sum(0.0, 10, p) == pytest.approx(1e-3)

    def test_mean_over_all_particles(self):
        # Dead particles contribute zero but stay in the denominator.
        p = CostParams(epsilon=1e-3)
        got = immediate_belief_cost([2.0, 4.0, 6.0, 999.0], [1, 1, 1, 0], p)
        assert got == pytest.approx(1e-3 + (2 + 4 + 6) / 4)

    def test_clip(self):
        p = CostParams(epsilon=1e-3, rate_clip=1.0)
        assert belief_rate_from_sum(100.0, 10, p) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            CostParams(epsilon=0.0)
        with pytest.raises(ValueError):
            CostParams(epsilon=1e-3, rate_clip=1e-4)


def test_accumulate_left_riemann():
    acc = 0.0
    for r in (1.0, 2.0, 3.0):
        acc = accumulate(acc, r, 0.5)
    assert acc == pytest.approx(3.0)
