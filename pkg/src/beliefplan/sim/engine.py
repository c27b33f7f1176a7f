"""Belief propagation engine.

Builds kernel inputs for a control segment, drives the selected backend
chunk by chunk, and applies the planner's in-flight gates (cost budget,
validity). All floating-point reductions that feed results (cost rates,
the accumulated cost) are done in canonical particle-index / time order
by shared code, so the compiled and pure-Python backends, any worker
count, and any chunk size produce bit-identical accepted results.

Free-space substeps use the exact map of the per-axis damped oscillator
about the moving set-point instead of an Euler step: the world axes
decouple (diagonal gains), and the exact map keeps the contact-free
response within measurement precision of the closed form and free of
spurious overshoot at critical damping. Substeps that start in contact
fall back to explicit force integration plus sequential impulses.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import cost as cost_mod
from ..belief import Belief, make_belief
from ..cost import CostParams
from ..geom2d import ConvexPolygon, Pose2, Twist2, wrap_angle
from .params import BodyParams, ContactParams, ImpedanceParams, Particle, SimLimits
from .scene import pack_shapes

DEFAULT_CHUNK = 64


@dataclass(frozen=True)
class ControlSegment:
    """One piecewise-linear set-point twist ramp.

    The set-point twist ramps linearly from v0 to v1 over `steps`
    substeps; per substep k the ramp is sampled at its midpoint,
    vd_k = v0 + (v1 - v0) (k + 0.5) / steps, and the set-point pose
    advances by vd_k * dt. Durations are whole numbers of substeps so
    replay is exact.
    """

    v0: tuple[float, float, float]
    v1: tuple[float, float, float]
    steps: int

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("segment needs at least one substep")

    def duration(self, dt: float) -> float:
        return self.steps * dt


@dataclass(frozen=True)
class SegmentTrace:
    """Per-substep record of one propagation.

    rates/alive_counts cover the substeps actually simulated; max_force
    and max_torque are over wrenches carried by live particles (a
    particle's fatal wrench is not included: it was never applied).
    aborted is None, "cost", or "validity".
    """

    rates: np.ndarray
    alive_counts: np.ndarray
    max_force: float
    max_torque: float
    substeps: int
    aborted: str | None


def exact_map(k: float, c: float, m: float, dt: float) -> tuple[float, float, float, float]:
    """One-substep transition matrix of m u'' + c u' + k u = 0.

    Returns row-major (E00, E01, E10, E11) with (u, u')_{t+dt} =
    E (u, u')_t. Stable across under/over/critically damped cases; a
    series branch avoids catastrophic cancellation near critical
    damping.
    """
    alpha = c / (2.0 * m)
    om2 = k / m
    delta = alpha * alpha - om2
    z = delta * dt * dt
    if abs(z) < 1e-8:
        s1 = dt * (1.0 + z / 6.0 + z * z / 120.0 + z * z * z / 5040.0)
        c1 = 1.0 + z / 2.0 + z * z / 24.0 + z * z * z / 720.0
    elif delta > 0.0:
        mu = math.sqrt(delta)
        s1 = math.sinh(mu * dt) / mu
        c1 = math.cosh(mu * dt)
    else:
        mu = math.sqrt(-delta)
        s1 = math.sin(mu * dt) / mu
        c1 = math.cos(mu * dt)
    e = math.exp(-alpha * dt)
    return (
        e * (c1 + alpha * s1),
        e * s1,
        -e * om2 * s1,
        e * (c1 - alpha * s1),
    )


class SimContext:
    """Immutable bundle of everything a propagation needs."""

    __slots__ = (
        "gains", "body", "limits", "contact", "cost", "dt", "gravity",
        "shapes", "emap", "ustar", "fmax2", "tmax2", "bias_coef",
    )

    def __init__(
        self,
        part: list[ConvexPolygon],
        scene: list[tuple[ConvexPolygon, Pose2]],
        gains: ImpedanceParams,
        body: BodyParams,
        limits: SimLimits,
        contact: ContactParams,
        cost_params: CostParams,
        dt: float,
        gravity: tuple[float, float] = (0.0, 0.0),
    ) -> None:
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        self.gains = gains
        self.body = body
        self.limits = limits
        self.contact = contact
        self.cost = cost_params
        self.dt = dt
        self.gravity = (float(gravity[0]), float(gravity[1]))
        self.shapes = pack_shapes(part, scene)
        emap = np.empty((3, 4))
        emap[0] = exact_map(gains.kp_trans, gains.kd_trans, body.mass, dt)
        emap[1] = emap[0]
        emap[2] = exact_map(gains.kp_rot, gains.kd_rot, body.inertia, dt)
        emap.flags.writeable = False
        self.emap = emap
        # Gravity shifts the free-space equilibrium deflection by m g / kp.
        ustar = np.array([
            body.mass * self.gravity[0] / gains.kp_trans,
            body.mass * self.gravity[1] / gains.kp_trans,
            0.0,
        ])
        ustar.flags.writeable = False
        self.ustar = ustar
        self.fmax2 = limits.f_max * limits.f_max
        self.tmax2 = limits.tau_max * limits.tau_max
        self.bias_coef = contact.baumgarte / dt


def _selected_kernel():
    from . import get_kernel

    return get_kernel()


def env_workers() -> int:
    try:
        w = int(os.environ.get("BELIEFPLAN_WORKERS", "1"))
    except ValueError:
        return 1
    return max(1, w)


_pools: dict[int, ThreadPoolExecutor] = {}


def _pool(workers: int) -> ThreadPoolExecutor:
    pool = _pools.get(workers)
    if pool is None:
        pool = ThreadPoolExecutor(max_workers=workers)
        _pools[workers] = pool
    return pool


def setpoint_arrays(start: np.ndarray, seg: ControlSegment, dt: float):
    """Substep-start set-point poses (M+1,3) and twists (M,3) for a segment.

    Row k+1 of the pose array is row k plus vd_k * dt, accumulated in
    time order, which is exactly the update the kernels apply.
    """
    m = seg.steps
    v0 = np.asarray(seg.v0, dtype=np.float64)
    v1 = np.asarray(seg.v1, dtype=np.float64)
    frac = (np.arange(m, dtype=np.float64) + 0.5) / m
    vd = v0 + frac[:, None] * (v1 - v0)
    stacked = np.empty((m + 1, 3))
    stacked[0] = start
    stacked[1:] = vd * dt
    sp = np.add.accumulate(stacked, axis=0)
    return sp, vd


def _kernel_tail(ctx: SimContext):
    g = ctx.gains
    sh = ctx.shapes
    return (
        ctx.dt, g.kp_trans, g.kp_rot, g.kd_trans, g.kd_rot,
        ctx.body.mass, ctx.body.inertia, ctx.gravity[0], ctx.gravity[1],
        ctx.fmax2, ctx.tmax2, ctx.contact.mu, ctx.bias_coef, ctx.contact.slop,
        ctx.contact.iterations, ctx.emap, ctx.ustar,
        sh.part_verts, sh.part_normals, sh.part_offsets, sh.part_circles,
        sh.scene_verts, sh.scene_normals, sh.scene_offsets, sh.scene_circles,
    )


def _split_ranges(n: int, workers: int) -> list[tuple[int, int]]:
    base = n // workers
    rem = n % workers
    ranges = []
    lo = 0
    for w in range(workers):
        hi = lo + base + (1 if w < rem else 0)
        if hi > lo:
            ranges.append((lo, hi))
        lo = hi
    return ranges


def _dispatch(kernel, workers, pose, twist, grasp, alive, death, cout, maxw_rows,
              spp, spt, k0, tail) -> None:
    n = pose.shape[0]
    if workers <= 1 or n == 1:
        kernel.run_chunk(pose, twist, grasp, alive, death, cout, maxw_rows[0],
                         spp, spt, 0, n, k0, *tail)
        return
    ranges = _split_ranges(n, workers)
    pool = _pool(workers)
    futures = [
        pool.submit(kernel.run_chunk, pose, twist, grasp, alive, death, cout,
                    maxw_rows[w], spp, spt, lo, hi, k0, *tail)
        for w, (lo, hi) in enumerate(ranges)
    ]
    for f in futures:
        f.result()


def propagate(
    belief: Belief,
    seg: ControlSegment,
    ctx: SimContext,
    *,
    eta: float | None = None,
    cost_budget: float | None = None,
    chunk: int = DEFAULT_CHUNK,
    workers: int | None = None,
    kernel=None,
):
    """Propagate a belief through one control segment.

    Gates: with a cost_budget the propagation aborts once the
    accumulated segment cost would reach it; with eta it aborts when the
    live fraction drops below eta at any substep. Aborted propagations
    return (None, trace); accepted ones return the successor belief and
    the full trace. Gates only reject, they never alter accepted
    results, so chunk size and worker count cannot change outcomes.
    """
    if kernel is None:
        kernel = _selected_kernel()
    if workers is None:
        workers = env_workers()
    n = belief.n
    m = seg.steps
    sp_pose, sp_twist = setpoint_arrays(belief.setpoint_pose, seg, ctx.dt)
    pose = belief.pose.copy()
    twist = belief.twist.copy()
    grasp = belief.grasp
    alive = belief.alive.copy()
    death = np.full(n, -1, dtype=np.int32)
    cost_out = np.empty((n, m))
    maxw_rows = np.zeros((max(1, workers), 2))
    tail = _kernel_tail(ctx)
    n_alive = int(np.count_nonzero(alive))
    eta_thresh = None if eta is None else eta * n
    budget = math.inf if cost_budget is None else cost_budget
    acc = 0.0
    rates: list[float] = []
    counts: list[int] = []
    aborted: str | None = None
    done = 0
    for k0 in range(0, m, chunk):
        mc = min(chunk, m - k0)
        spp = sp_pose[k0:k0 + mc + 1]
        spt = sp_twist[k0:k0 + mc]
        cout = cost_out[:, k0:k0 + mc]
        _dispatch(kernel, workers, pose, twist, grasp, alive, death, cout,
                  maxw_rows, spp, spt, k0, tail)
        # Canonical reduction: particle-index-order column sums, then a
        # time-ordered scalar walk shared by every backend/worker count.
        colsum = np.zeros(mc)
        for i in range(n):
            colsum += cout[i]
        csl = colsum.tolist()
        deaths = sorted(int(d) for d in death.tolist() if k0 <= d < k0 + mc)
        di = 0
        for kk in range(mc):
            ka = k0 + kk
            while di < len(deaths) and deaths[di] == ka:
                n_alive -= 1
                di += 1
            rate = cost_mod.belief_rate_from_sum(csl[kk], n, ctx.cost)
            acc = cost_mod.accumulate(acc, rate, ctx.dt)
            rates.append(rate)
            counts.append(n_alive)
            done += 1
            if acc >= budget:
                aborted = "cost"
                break
            if eta_thresh is not None and n_alive < eta_thresh:
                aborted = "validity"
                break
        if aborted is not None:
            break
    maxw = maxw_rows.max(axis=0)
    trace = SegmentTrace(
        rates=np.array(rates),
        alive_counts=np.array(counts, dtype=np.int32),
        max_force=math.sqrt(float(maxw[0])),
        max_torque=math.sqrt(float(maxw[1])),
        substeps=done,
        aborted=aborted,
    )
    if aborted is not None:
        return None, trace
    end_sp = sp_pose[m].copy()
    end_sp[2] = wrap_angle(end_sp[2])
    new_belief = make_belief(
        pose, twist, grasp, alive, end_sp, np.asarray(seg.v1, dtype=np.float64),
        belief.steps + m, belief.cost + acc,
    )
    return new_belief, trace


def step(
    particle: Particle,
    setpoint_pose: Pose2,
    setpoint_twist: Twist2,
    ctx: SimContext,
    kernel=None,
) -> Particle:
    """Advance a single particle by one substep dt.

    The set-point pose is the substep-start value; it advances by
    setpoint_twist * dt over the substep. Equivalent to one row of a
    propagate() call.
    """
    if kernel is None:
        kernel = _selected_kernel()
    pose = np.array(
        [[particle.pose.x, particle.pose.y, particle.pose.theta]], dtype=np.float64
    )
    twist = np.array(
        [[particle.twist.vx, particle.twist.vy, particle.twist.omega]],
        dtype=np.float64,
    )
    grasp = np.zeros((1, 3))
    alive = np.array([1 if particle.alive else 0], dtype=np.uint8)
    death = np.full(1, -1, dtype=np.int32)
    cost_out = np.empty((1, 1))
    maxw = np.zeros(2)
    spt = np.array(
        [[setpoint_twist.vx, setpoint_twist.vy, setpoint_twist.omega]],
        dtype=np.float64,
    )
    spp = np.empty((2, 3))
    spp[0] = (setpoint_pose.x, setpoint_pose.y, setpoint_pose.theta)
    spp[1] = spp[0] + spt[0] * ctx.dt
    kernel.run_chunk(pose, twist, grasp, alive, death, cost_out, maxw, spp, spt,
                     0, 1, 0, *_kernel_tail(ctx))
    return Particle(
        pose=Pose2(float(pose[0, 0]), float(pose[0, 1]), float(pose[0, 2])),
        twist=Twist2(float(twist[0, 0]), float(twist[0, 1]), float(twist[0, 2])),
        alive=bool(alive[0]),
    )
