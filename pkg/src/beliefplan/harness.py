"""Experiment harness: plan, replay, evaluate, sweep.

A plan artifact is a JSON document that pins everything needed to
reproduce a planning result exactly: the task content hash, the seed,
the particle count, the planner configuration, and the control
segments themselves. Replay refuses to run against a task whose hash
differs, re-derives the belief trajectory from the segments alone, and
checks the recorded cost for exact float equality.

Evaluation rolls a plan out on freshly drawn single-particle initial
states (the grasp-noise model the plan was built to survive) and
reports the success statistics the benchmark criteria are written
against.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .belief import (
    Belief,
    in_goal,
    make_belief,
    pose_in_goal,
    sample_initial_belief,
)
from .geom2d import Pose2, wrap_angle
from .planner import PlannerConfig, ao_b_est, b_est
from .sim.engine import ControlSegment, propagate
from .stats import WelchResult, fisher_exact, welch_t
from .tasks import Task, task_hash

PLAN_FORMAT = "beliefplan-plan/1"

__all__ = [
    "PlanArtifact", "plan", "save_plan", "load_plan", "plan_to_dict",
    "plan_from_dict", "ReplayResult", "replay", "Rollout", "EvalReport",
    "evaluate", "SweepRow", "sweep", "write_sweep_csv", "read_sweep_csv",
    "SweepStats", "sweep_stats",
]


@dataclass(frozen=True)
class PlanArtifact:
    task_name: str
    task_hash: str
    seed: int
    n_particles: int
    mode: str                                   # "first" or "ao"
    budget: int
    planner: PlannerConfig
    segments: tuple[ControlSegment, ...]
    cost: float
    steps: int
    iterations: int
    rounds: int
    improvements: tuple[tuple[int, float], ...]
    elapsed_s: float


def _root_belief(task: Task, seed: int, n_particles: int) -> tuple[Belief, np.random.Generator]:
    rng = np.random.default_rng(seed)
    root = sample_initial_belief(task.start, task.uncertainty, n_particles, rng)
    return root, rng


def plan(
    task: Task,
    seed: int,
    n_particles: int = 10,
    mode: str = "first",
    budget: int | None = None,
    config: PlannerConfig | None = None,
    wall_clock_s: float | None = None,
) -> PlanArtifact | None:
    """Plan on a task; returns None when the budget yields no feasible plan.

    mode "first" stops at the first feasible trajectory; "ao" keeps
    planning under a tightening cost bound until the budget is spent.
    wall_clock_s adds a machine-dependent time cutoff on top of the
    iteration budget; leave it None for reproducible results.
    """
    if mode not in ("first", "ao"):
        raise ValueError(f"unknown mode {mode!r}")
    cfg = config if config is not None else task.planner
    if budget is None:
        budget = cfg.budget
    ctx = task.context()
    root, rng = _root_belief(task, seed, n_particles)
    t0 = time.perf_counter()
    deadline = None if wall_clock_s is None else t0 + wall_clock_s
    if mode == "first":
        run = b_est(root, task.goal, ctx, cfg, rng, max_iters=budget,
                    deadline=deadline)
        traj, iters, rounds = run.trajectory, run.iterations, 1
        improvements = ((iters, traj.cost),) if traj is not None else ()
    else:
        res = ao_b_est(root, task.goal, ctx, cfg, rng, total_iters=budget,
                       deadline=deadline)
        traj, iters, rounds = res.trajectory, res.iterations, res.rounds
        improvements = tuple(res.improvements)
    elapsed = time.perf_counter() - t0
    if traj is None:
        return None
    return PlanArtifact(
        task_name=task.name,
        task_hash=task_hash(task),
        seed=seed,
        n_particles=n_particles,
        mode=mode,
        budget=budget,
        planner=cfg,
        segments=tuple(traj.segments),
        cost=traj.cost,
        steps=traj.steps,
        iterations=iters,
        rounds=rounds,
        improvements=improvements,
        elapsed_s=elapsed,
    )


def plan_to_dict(art: PlanArtifact) -> dict:
    return {
        "format": PLAN_FORMAT,
        "task_name": art.task_name,
        "task_hash": art.task_hash,
        "seed": art.seed,
        "n_particles": art.n_particles,
        "mode": art.mode,
        "budget": art.budget,
        "planner": {
            "t_seg_max": art.planner.t_seg_max,
            "v_max": art.planner.v_max,
            "w_max": art.planner.w_max,
            "eta": art.planner.eta,
            "cell_xy": art.planner.cell_xy,
            "cell_theta": art.planner.cell_theta,
            "horizon_steps": art.planner.horizon_steps,
            "budget": art.planner.budget,
        },
        "segments": [
            {"v0": list(s.v0), "v1": list(s.v1), "steps": s.steps}
            for s in art.segments
        ],
        "cost": art.cost,
        "steps": art.steps,
        "iterations": art.iterations,
        "rounds": art.rounds,
        "improvements": [[i, c] for i, c in art.improvements],
        "elapsed_s": art.elapsed_s,
    }


def plan_from_dict(d: dict) -> PlanArtifact:
    if d.get("format") != PLAN_FORMAT:
        raise ValueError(f"not a plan document (format={d.get('format')!r})")
    return PlanArtifact(
        task_name=d["task_name"],
        task_hash=d["task_hash"],
        seed=d["seed"],
        n_particles=d["n_particles"],
        mode=d["mode"],
        budget=d["budget"],
        planner=PlannerConfig(**d["planner"]),
        segments=tuple(
            ControlSegment(
                v0=tuple(s["v0"]), v1=tuple(s["v1"]), steps=s["steps"]
            )
            for s in d["segments"]
        ),
        cost=d["cost"],
        steps=d["steps"],
        iterations=d["iterations"],
        rounds=d["rounds"],
        improvements=tuple((i, c) for i, c in d["improvements"]),
        elapsed_s=d["elapsed_s"],
    )


def save_plan(art: PlanArtifact, path: str) -> None:
    with open(path, "w") as f:
        json.dump(plan_to_dict(art), f, indent=2)
        f.write("\n")


def load_plan(path: str) -> PlanArtifact:
    with open(path) as f:
        return plan_from_dict(json.load(f))


@dataclass(frozen=True)
class ReplayResult:
    beliefs: tuple[Belief, ...]                 # root first, one per segment after
    cost: float
    cost_matches: bool
    endpoint_in_goal: bool
    max_force: float
    max_torque: float


def replay(art: PlanArtifact, task: Task) -> ReplayResult:
    """Re-derive the belief trajectory a plan artifact recorded.

    Refuses to run when the task content hash differs from the one the
    plan was made for. The replayed cost must equal the recorded cost
    exactly; any difference means the artifact and code disagree.
    """
    h = task_hash(task)
    if h != art.task_hash:
        raise ValueError(
            f"task hash mismatch: plan was made for {art.task_hash[:12]}, "
            f"got {h[:12]}; refusing to replay"
        )
    ctx = task.context()
    root, _ = _root_belief(task, art.seed, art.n_particles)
    beliefs = [root]
    max_f = 0.0
    max_t = 0.0
    cur = root
    for seg in art.segments:
        nxt, trace = propagate(
            cur, seg, ctx, eta=art.planner.eta, chunk=art.planner.chunk
        )
        if nxt is None:
            raise ValueError("recorded segment failed the validity gate on replay")
        max_f = max(max_f, trace.max_force)
        max_t = max(max_t, trace.max_torque)
        beliefs.append(nxt)
        cur = nxt
    return ReplayResult(
        beliefs=tuple(beliefs),
        cost=cur.cost,
        cost_matches=(cur.cost == art.cost),
        endpoint_in_goal=in_goal(cur, task.goal),
        max_force=max_f,
        max_torque=max_t,
    )


@dataclass(frozen=True)
class Rollout:
    success: bool
    alive: bool
    in_goal: bool
    cost: float
    max_force: float
    max_torque: float


@dataclass(frozen=True)
class EvalReport:
    rollouts: tuple[Rollout, ...]
    successes: int
    failure_rate: float
    max_force_over_successes: float
    max_torque_over_successes: float


def evaluate(art: PlanArtifact, task: Task, n_rollouts: int, eval_seed: int) -> EvalReport:
    """Execute a plan open-loop on noisy single-hypothesis initial states.

    Each rollout draws its own start pose from the grasp-noise model
    (stream SeedSequence([eval_seed, j]), independent of how many
    rollouts run) and plays the recorded set-point schedule. A rollout
    succeeds when its particle survives every force limit and ends
    inside the goal region.
    """
    h = task_hash(task)
    if h != art.task_hash:
        raise ValueError("task hash mismatch; refusing to evaluate")
    ctx = task.context()
    start_sp = task.start.as_array()
    out = []
    for j in range(n_rollouts):
        rng = np.random.default_rng(np.random.SeedSequence([eval_seed, j]))
        g = task.uncertainty.sample_offset(rng)
        pose = np.array([[
            task.start.x + g[0],
            task.start.y + g[1],
            wrap_angle(task.start.theta + g[2]),
        ]])
        bel = make_belief(
            pose=pose,
            twist=np.zeros((1, 3)),
            grasp=g.reshape(1, 3),
            alive=np.ones(1, dtype=np.uint8),
            setpoint_pose=start_sp.copy(),
            setpoint_twist=np.zeros(3),
            steps=0,
            cost=0.0,
        )
        max_f = 0.0
        max_t = 0.0
        for seg in art.segments:
            bel, trace = propagate(bel, seg, ctx)
            max_f = max(max_f, trace.max_force)
            max_t = max(max_t, trace.max_torque)
        alive = bool(bel.alive[0])
        final = bel.pose[0]
        ok_goal = pose_in_goal(Pose2(final[0], final[1], final[2]), task.goal)
        out.append(Rollout(
            success=alive and ok_goal,
            alive=alive,
            in_goal=ok_goal,
            cost=bel.cost,
            max_force=max_f,
            max_torque=max_t,
        ))
    wins = sum(r.success for r in out)
    succ_f = max((r.max_force for r in out if r.success), default=0.0)
    succ_t = max((r.max_torque for r in out if r.success), default=0.0)
    return EvalReport(
        rollouts=tuple(out),
        successes=wins,
        failure_rate=1.0 - wins / n_rollouts if n_rollouts else 0.0,
        max_force_over_successes=succ_f,
        max_torque_over_successes=succ_t,
    )


@dataclass(frozen=True)
class SweepRow:
    task: str
    n_particles: int
    seed: int
    planned: bool
    plan_iterations: int
    plan_cost: float                            # nan when not planned
    rollouts: int
    successes: int
    failure_rate: float                         # 1.0 when not planned


def sweep(
    task: Task,
    n_values: tuple[int, ...] = (1, 4, 10),
    seeds: tuple[int, ...] = tuple(range(20)),
    n_rollouts: int = 100,
    eval_seed: int = 1_000_003,
    budget: int | None = None,
    progress=None,
) -> list[SweepRow]:
    """Plan/evaluate grid over particle counts and seeds.

    A seed whose budget produces no feasible plan counts as a full
    failure (rate 1.0), matching how an execution system would score a
    planner that returns nothing.
    """
    rows = []
    for n in n_values:
        for seed in seeds:
            art = plan(task, seed=seed, n_particles=n, mode="first", budget=budget)
            if art is None:
                rows.append(SweepRow(
                    task=task.name, n_particles=n, seed=seed, planned=False,
                    plan_iterations=0, plan_cost=math.nan,
                    rollouts=0, successes=0, failure_rate=1.0,
                ))
            else:
                rep = evaluate(art, task, n_rollouts=n_rollouts, eval_seed=eval_seed)
                rows.append(SweepRow(
                    task=task.name, n_particles=n, seed=seed, planned=True,
                    plan_iterations=art.iterations, plan_cost=art.cost,
                    rollouts=n_rollouts, successes=rep.successes,
                    failure_rate=rep.failure_rate,
                ))
            if progress is not None:
                progress(rows[-1])
    return rows


_CSV_FIELDS = [
    "task", "n_particles", "seed", "planned", "plan_iterations",
    "plan_cost", "rollouts", "successes", "failure_rate",
]


def write_sweep_csv(rows: list[SweepRow], path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(_CSV_FIELDS)
        for r in rows:
            w.writerow([
                r.task, r.n_particles, r.seed, int(r.planned),
                r.plan_iterations, repr(r.plan_cost), r.rollouts,
                r.successes, repr(r.failure_rate),
            ])


def read_sweep_csv(path: str) -> list[SweepRow]:
    rows = []
    with open(path, newline="") as f:
        rd = csv.DictReader(f)
        if rd.fieldnames != _CSV_FIELDS:
            raise ValueError(f"unexpected sweep csv header: {rd.fieldnames}")
        for rec in rd:
            rows.append(SweepRow(
                task=rec["task"],
                n_particles=int(rec["n_particles"]),
                seed=int(rec["seed"]),
                planned=bool(int(rec["planned"])),
                plan_iterations=int(rec["plan_iterations"]),
                plan_cost=float(rec["plan_cost"]),
                rollouts=int(rec["rollouts"]),
                successes=int(rec["successes"]),
                failure_rate=float(rec["failure_rate"]),
            ))
    return rows


@dataclass(frozen=True)
class SweepStats:
    median_failure: dict[int, float]
    fisher_table: tuple[int, int, int, int]     # (s_lo, f_lo, s_hi, f_hi)
    fisher_p: float
    welch: WelchResult
    n_lo: int
    n_hi: int


def sweep_stats(rows: list[SweepRow]) -> SweepStats:
    """Compare the lowest and highest particle counts in a sweep.

    Fisher runs on the pooled success/failure counts (every rollout one
    trial; an unplanned seed contributes its rollout budget as
    failures); Welch runs on the per-seed failure rates.
    """
    by_n: dict[int, list[SweepRow]] = {}
    for r in rows:
        by_n.setdefault(r.n_particles, []).append(r)
    if len(by_n) < 2:
        raise ValueError("sweep stats need at least two particle counts")
    medians = {
        n: statistics.median([r.failure_rate for r in rs])
        for n, rs in sorted(by_n.items())
    }
    n_lo, n_hi = min(by_n), max(by_n)
    budget = max((r.rollouts for r in rows), default=0)

    def pooled(rs):
        s = sum(r.successes for r in rs)
        t = sum(r.rollouts if r.planned else budget for r in rs)
        return s, t - s

    s_lo, f_lo = pooled(by_n[n_lo])
    s_hi, f_hi = pooled(by_n[n_hi])
    return SweepStats(
        median_failure=medians,
        fisher_table=(s_lo, f_lo, s_hi, f_hi),
        fisher_p=fisher_exact(s_lo, f_lo, s_hi, f_hi),
        welch=welch_t(
            [r.failure_rate for r in by_n[n_lo]],
            [r.failure_rate for r in by_n[n_hi]],
        ),
        n_lo=n_lo,
        n_hi=n_hi,
    )
