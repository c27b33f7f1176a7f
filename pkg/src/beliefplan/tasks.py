"""Benchmark task definitions: geometry, physics, uncertainty, goal.

A task file is a self-contained JSON document; everything that affects
simulation results lives in it (including contact-solver constants), so
a plan artifact can pin the exact world it was computed for via the
task hash. Three builtin tasks cover the benchmark suite:

* peg2d: peg-in-hole with 0.5 mm clearance per side, the classic
  compliant-insertion funnel.
* rail2d: a two-prong fork seating onto a rail ridge with zero nominal
  clearance; only wedging against the ridge aligns the part.
* puzzle2d: a dog-leg pocket behind an overhang; no straight-line
  insertion exists, the plan must go down a shaft then translate
  sideways.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .belief import GoalRegion, UncertaintyModel
from .cost import CostParams
from .geom2d import ConvexPolygon, Pose2, contacts
from .planner import PlannerConfig
from .sim import BodyParams, ContactParams, ImpedanceParams, SimContext, SimLimits

FORMAT = "beliefplan-task/1"


@dataclass(frozen=True)
class Task:
    name: str
    part: tuple[ConvexPolygon, ...]
    scene: tuple[tuple[ConvexPolygon, Pose2], ...]
    body: BodyParams
    gains: ImpedanceParams
    limits: SimLimits
    contact: ContactParams
    cost: CostParams
    uncertainty: UncertaintyModel
    start: Pose2
    goal: GoalRegion
    planner: PlannerConfig
    dt: float = 1e-3
    gravity: tuple[float, float] = (0.0, 0.0)

    def context(self) -> SimContext:
        return SimContext(
            part=list(self.part),
            scene=list(self.scene),
            gains=self.gains,
            body=self.body,
            limits=self.limits,
            contact=self.contact,
            cost_params=self.cost,
            dt=self.dt,
            gravity=self.gravity,
        )


def _max_penetration(task: Task, pose: Pose2) -> float:
    worst = 0.0
    for shape in task.part:
        for obstacle, opose in task.scene:
            for c in contacts(shape, pose, obstacle, opose):
                worst = max(worst, c.depth)
    return worst


def validate_task(task: Task) -> None:
    """Reject tasks whose start or goal pose already penetrates the scene.

    Surface touching up to the solver slop is fine (seated goals rest on
    their fixtures); real overlap means the task is ill-posed.
    """
    slop = task.contact.slop
    pen = _max_penetration(task, task.start)
    if pen > slop:
        raise ValueError(f"start pose penetrates the scene by {pen:.2e} m")
    pen = _max_penetration(task, task.goal.pose)
    if pen > slop:
        raise ValueError(f"goal pose penetrates the scene by {pen:.2e} m")


def _poly_list(polys) -> list[list[list[float]]]:
    return [[[float(x), float(y)] for x, y in p.vertices] for p in polys]


def task_to_dict(task: Task) -> dict:
    return {
        "format": FORMAT,
        "name": task.name,
        "dt": task.dt,
        "gravity": [task.gravity[0], task.gravity[1]],
        "body": {"mass": task.body.mass, "inertia": task.body.inertia},
        "gains": {
            "kp_trans": task.gains.kp_trans,
            "kp_rot": task.gains.kp_rot,
            "kd_trans": task.gains.kd_trans,
            "kd_rot": task.gains.kd_rot,
        },
        "limits": {"f_max": task.limits.f_max, "tau_max": task.limits.tau_max},
        "contact": {
            "mu": task.contact.mu,
            "baumgarte": task.contact.baumgarte,
            "slop": task.contact.slop,
            "iterations": task.contact.iterations,
        },
        "cost": {"epsilon": task.cost.epsilon, "rate_clip": task.cost.rate_clip},
        "uncertainty": {
            "sigma_trans": task.uncertainty.sigma_trans,
            "sigma_rot": task.uncertainty.sigma_rot,
        },
        "start": [task.start.x, task.start.y, task.start.theta],
        "goal": {
            "pose": [task.goal.pose.x, task.goal.pose.y, task.goal.pose.theta],
            "radius": task.goal.radius,
            "rot_weight": task.goal.rot_weight,
            "gamma": task.goal.gamma,
        },
        "part": _poly_list(task.part),
        "scene": [
            {
                "vertices": [[float(x), float(y)] for x, y in poly.vertices],
                "pose": [pose.x, pose.y, pose.theta],
            }
            for poly, pose in task.scene
        ],
        "planner": {
            "t_seg_max": task.planner.t_seg_max,
            "v_max": task.planner.v_max,
            "w_max": task.planner.w_max,
            "eta": task.planner.eta,
            "cell_xy": task.planner.cell_xy,
            "cell_theta": task.planner.cell_theta,
            "horizon_steps": task.planner.horizon_steps,
            "budget": task.planner.budget,
        },
    }


def task_from_dict(d: dict) -> Task:
    if d.get("format") != FORMAT:
        raise ValueError(f"not a task document (format={d.get('format')!r})")
    g = d["goal"]
    task = Task(
        name=d["name"],
        part=tuple(ConvexPolygon(v) for v in d["part"]),
        scene=tuple(
            (ConvexPolygon(s["vertices"]), Pose2(*s["pose"])) for s in d["scene"]
        ),
        body=BodyParams(**d["body"]),
        gains=ImpedanceParams(**d["gains"]),
        limits=SimLimits(**d["limits"]),
        contact=ContactParams(**d["contact"]),
        cost=CostParams(**d["cost"]),
        uncertainty=UncertaintyModel(**d["uncertainty"]),
        start=Pose2(*d["start"]),
        goal=GoalRegion(
            pose=Pose2(*g["pose"]),
            radius=g["radius"],
            rot_weight=g["rot_weight"],
            gamma=g["gamma"],
        ),
        planner=PlannerConfig(**d["planner"]),
        dt=d["dt"],
        gravity=(d["gravity"][0], d["gravity"][1]),
    )
    validate_task(task)
    return task


def task_hash(task: Task) -> str:
    """Canonical content hash; replay refuses a plan whose hash differs."""
    blob = json.dumps(task_to_dict(task), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def save_task(task: Task, path: str) -> None:
    validate_task(task)
    with open(path, "w") as f:
        json.dump(task_to_dict(task), f, indent=2)
        f.write("\n")


def load_task(path: str) -> Task:
    with open(path) as f:
        return task_from_dict(json.load(f))


def _box(cx: float, cy: float, hw: float, hh: float) -> ConvexPolygon:
    return ConvexPolygon([
        (cx - hw, cy - hh), (cx + hw, cy - hh), (cx + hw, cy + hh), (cx - hw, cy + hh),
    ])


# Shared physical setup for the builtins: a lumped 1 kg part on a planar
# air table (no in-plane gravity), the impedance gains and noise of a
# position-controlled arm with a wrist F/T limit.
_BODY = BodyParams(mass=1.0, inertia=3e-3)
_GAINS = ImpedanceParams.critically_damped(1000.0, 60.0, _BODY)
_LIMITS = SimLimits(f_max=30.0, tau_max=3.0)
_NOISE = UncertaintyModel(sigma_trans=2.5e-3, sigma_rot=0.015)


def _peg2d() -> Task:
    # Peg 30 mm wide, 50 mm long; slot 5% wider (31.5 mm), 25 mm deep.
    peg_hw, peg_hh = 0.015, 0.025
    slot_hw, slot_depth = 1.05 * 0.015, 0.025
    # Left and right shoulders flank the slot; a base closes its bottom.
    # The table extends well past the slot so the search cannot wander
    # around its edge into pockets that dilute the density grid.
    span = 0.18
    left = _box(-(span + slot_hw) / 2, -slot_depth / 2, (span - slot_hw) / 2, slot_depth / 2)
    right = _box((span + slot_hw) / 2, -slot_depth / 2, (span - slot_hw) / 2, slot_depth / 2)
    base = _box(0.0, -slot_depth - 0.008, span, 0.008)
    scene = ((left, Pose2(0, 0, 0)), (right, Pose2(0, 0, 0)), (base, Pose2(0, 0, 0)))
    return Task(
        name="peg2d",
        part=(_box(0.0, 0.0, peg_hw, peg_hh),),
        scene=scene,
        body=_BODY,
        gains=_GAINS,
        limits=_LIMITS,
        contact=ContactParams(),
        cost=CostParams(),
        uncertainty=_NOISE,
        start=Pose2(0.0, 0.040, 0.0),
        # Full insertion: peg tip on the slot bottom.
        goal=GoalRegion(pose=Pose2(0.0, 0.0, 0.0), radius=0.004),
        planner=PlannerConfig(
            t_seg_max=0.4, v_max=0.05, w_max=0.15, eta=0.8,
            cell_xy=0.005, cell_theta=0.1, horizon_steps=20000,
            # The hardest of 20 reference seeds needs ~2.7e5 iterations.
            budget=300_000,
        ),
        dt=1e-3,
    )


def _rail2d() -> Task:
    # Hat-profile rail (crown on a base plate); the clip is two convex
    # lobes whose gap equals the crown width exactly, so the fit has
    # zero nominal clearance. The crown's top corners and the lobe tips
    # carry 45 degree chamfers: a misgrasped part gets no lateral spring
    # pull toward the slot, so only contact redirection off a chamfer
    # can recenter it (at 45 degrees the tangential/normal ratio is 1,
    # well above mu, so the part slides rather than sticking).
    crown_hw, crown_h, crown_ch = 0.007, 0.008, 0.003
    lobe_hw, lobe_len, lobe_ch = 0.004, 0.010, 0.0025
    crown = ConvexPolygon([
        (-crown_hw, 0.0),
        (crown_hw, 0.0),
        (crown_hw, crown_h - crown_ch),
        (crown_hw - crown_ch, crown_h),
        (-(crown_hw - crown_ch), crown_h),
        (-crown_hw, crown_h - crown_ch),
    ])
    plate = _box(0.0, -0.006 / 2, 0.04, 0.006 / 2)
    # Part frame: origin at the lobe tops; lobes hang below with the
    # chamfer on each inner tip corner.
    llobe = ConvexPolygon([
        (-(crown_hw + lobe_hw), -lobe_len),
        (-(crown_hw + lobe_ch), -lobe_len),
        (-crown_hw, -(lobe_len - lobe_ch)),
        (-crown_hw, 0.0),
        (-(crown_hw + lobe_hw), 0.0),
    ])
    rlobe = ConvexPolygon([
        (crown_hw + lobe_ch, -lobe_len),
        (crown_hw + lobe_hw, -lobe_len),
        (crown_hw + lobe_hw, 0.0),
        (crown_hw, 0.0),
        (crown_hw, -(lobe_len - lobe_ch)),
    ])
    # Seated: lobe tips rest on the plate, straddling the crown.
    seat_y = lobe_len
    return Task(
        name="rail2d",
        part=(llobe, rlobe),
        scene=((crown, Pose2(0, 0, 0)), (plate, Pose2(0, 0, 0))),
        body=_BODY,
        gains=_GAINS,
        limits=_LIMITS,
        contact=ContactParams(slop=2e-4),
        cost=CostParams(),
        uncertainty=_NOISE,
        start=Pose2(0.0, seat_y + 0.016, 0.0),
        goal=GoalRegion(pose=Pose2(0.0, seat_y, 0.0), radius=0.003),
        planner=PlannerConfig(
            t_seg_max=0.4, v_max=0.05, w_max=0.05, eta=0.8,
            cell_xy=0.005, cell_theta=0.1, horizon_steps=20000,
        ),
        dt=1e-3,
    )


def _puzzle2d() -> Task:
    # Stepped tenon: a bar with a stem on its right shoulder. Mating
    # takes two consecutive motions: descend the open shaft, then slide
    # left along the corridor until the bar's left half tucks under the
    # overhang and the stem wedges against the overhang's edge. The
    # straight start-to-goal line passes through the overhang slab.
    bar_hw, bar_hh = 0.010, 0.005
    stem = _box(0.006, 0.010, 0.004, 0.005)          # on top, right shoulder
    # Shaft x in [-12, 12] mm from y=0 down to -24 mm; corridor to the
    # left of the shaft bottom, y in [-24, -12] mm, reaching x = -44 mm.
    left_top = _box(-0.056, -0.006, 0.044, 0.006)    # overhang: corridor ceiling
    left_wall = _box(-0.072, -0.018, 0.028, 0.006)   # closes the corridor's far end
    right_col = _box(0.056, -0.012, 0.044, 0.012)
    base = _box(0.0, -0.027, 0.10, 0.003)
    return Task(
        name="puzzle2d",
        part=(_box(0.0, 0.0, bar_hw, bar_hh), stem),
        scene=(
            (left_top, Pose2(0, 0, 0)),
            (left_wall, Pose2(0, 0, 0)),
            (right_col, Pose2(0, 0, 0)),
            (base, Pose2(0, 0, 0)),
        ),
        body=_BODY,
        gains=_GAINS,
        limits=_LIMITS,
        contact=ContactParams(),
        cost=CostParams(),
        uncertainty=_NOISE,
        start=Pose2(0.0, 0.040, 0.0),
        # Seated in the corner formed by the base and the overhang edge.
        goal=GoalRegion(pose=Pose2(-0.014, -0.019, 0.0), radius=0.004),
        planner=PlannerConfig(
            t_seg_max=0.4, v_max=0.05, w_max=0.15, eta=0.8,
            cell_xy=0.005, cell_theta=0.1, horizon_steps=20000,
        ),
        dt=1e-3,
    )


_BUILTINS = {"peg2d": _peg2d, "rail2d": _rail2d, "puzzle2d": _puzzle2d}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin_task(name: str) -> Task:
    try:
        task = _BUILTINS[name]()
    except KeyError:
        raise ValueError(f"unknown task {name!r}; builtins: {', '.join(builtin_names())}")
    validate_task(task)
    return task


def resolve_task(name_or_path: str) -> Task:
    """Accept either a builtin task name or a path to a task JSON file."""
    if name_or_path in _BUILTINS:
        return builtin_task(name_or_path)
    return load_task(name_or_path)
