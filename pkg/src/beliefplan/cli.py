"""Command-line front end.

Subcommands mirror the library workflow: task (inspect/export), plan,
replay, evaluate, sweep, stats. Environment knobs: BELIEFPLAN_BACKEND
selects the simulation kernel (auto/c/py), BELIEFPLAN_WORKERS the
propagation thread count; neither changes numerical results.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys

from . import harness, tasks


def _cmd_task(args) -> int:
    task = tasks.resolve_task(args.task)
    if args.out:
        tasks.save_task(task, args.out)
        print(f"wrote {args.out}")
    d = tasks.task_to_dict(task)
    print(f"task {task.name}")
    print(f"  hash        {tasks.task_hash(task)}")
    print(f"  part polys  {len(task.part)}  scene polys {len(task.scene)}")
    print(f"  start       {d['start']}")
    print(f"  goal        {d['goal']['pose']} r={task.goal.radius} gamma={task.goal.gamma}")
    print(f"  noise       sigma_trans={task.uncertainty.sigma_trans} "
          f"sigma_rot={task.uncertainty.sigma_rot}")
    print(f"  budget      {task.planner.budget}")
    return 0


def _cmd_plan(args) -> int:
    task = tasks.resolve_task(args.task)
    art = harness.plan(
        task, seed=args.seed, n_particles=args.particles,
        mode=args.mode, budget=args.budget, wall_clock_s=args.wall_clock,
    )
    if art is None:
        print("no feasible trajectory within budget", file=sys.stderr)
        return 1
    harness.save_plan(art, args.out)
    print(f"wrote {args.out}")
    print(f"  cost        {art.cost:.6f}")
    print(f"  segments    {len(art.segments)}  substeps {art.steps}")
    print(f"  iterations  {art.iterations}  rounds {art.rounds}")
    print(f"  elapsed     {art.elapsed_s:.1f}s")
    if args.mode == "ao":
        for it, c in art.improvements:
            print(f"    improvement at iter {it}: {c:.6f}")
    return 0


def _cmd_replay(args) -> int:
    task = tasks.resolve_task(args.task)
    art = harness.load_plan(args.plan)
    rep = harness.replay(art, task)
    print(f"replayed {len(art.segments)} segments, {art.steps} substeps")
    print(f"  cost        {rep.cost:.6f} ({'exact match' if rep.cost_matches else 'MISMATCH'})")
    print(f"  endpoint    {'in goal' if rep.endpoint_in_goal else 'NOT in goal'}")
    print(f"  max force   {rep.max_force:.2f} N   max torque {rep.max_torque:.3f} N·m")
    return 0 if rep.cost_matches and rep.endpoint_in_goal else 1


def _cmd_evaluate(args) -> int:
    task = tasks.resolve_task(args.task)
    art = harness.load_plan(args.plan)
    rep = harness.evaluate(art, task, n_rollouts=args.rollouts, eval_seed=args.eval_seed)
    print(f"{rep.successes}/{len(rep.rollouts)} rollouts succeeded "
          f"(failure rate {rep.failure_rate:.3f})")
    print(f"  max force over successes  {rep.max_force_over_successes:.2f} N")
    print(f"  max torque over successes {rep.max_torque_over_successes:.3f} N·m")
    if args.out:
        doc = {
            "plan": args.plan,
            "task_hash": art.task_hash,
            "rollouts": len(rep.rollouts),
            "eval_seed": args.eval_seed,
            "successes": rep.successes,
            "failure_rate": rep.failure_rate,
            "max_force_over_successes": rep.max_force_over_successes,
            "max_torque_over_successes": rep.max_torque_over_successes,
        }
        with open(args.out, "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    task = tasks.resolve_task(args.task)
    n_values = tuple(int(v) for v in args.particles.split(","))
    seeds = tuple(range(args.seeds))

    def progress(row):
        state = f"cost={row.plan_cost:.5f}" if row.planned else "no plan"
        print(f"  N={row.n_particles} seed={row.seed}: {state} "
              f"failure_rate={row.failure_rate:.2f}", flush=True)

    rows = harness.sweep(
        task, n_values=n_values, seeds=seeds, n_rollouts=args.rollouts,
        eval_seed=args.eval_seed, budget=args.budget, progress=progress,
    )
    harness.write_sweep_csv(rows, args.out)
    print(f"wrote {args.out}")
    for n in n_values:
        rates = [r.failure_rate for r in rows if r.n_particles == n]
        print(f"  N={n}: median failure rate {statistics.median(rates):.3f}")
    return 0


def _cmd_stats(args) -> int:
    rows = harness.read_sweep_csv(args.sweep)
    st = harness.sweep_stats(rows)
    print("median failure rate by particle count:")
    for n, m in st.median_failure.items():
        print(f"  N={n:>3}: {m:.3f}")
    if args.test == "fisher":
        s_lo, f_lo, s_hi, f_hi = st.fisher_table
        print(f"pooled rollouts N={st.n_lo}: {s_lo} ok / {f_lo} fail; "
              f"N={st.n_hi}: {s_hi} ok / {f_hi} fail")
        print(f"fisher exact (pooled success/failure): p = {st.fisher_p:.3e}")
    else:
        print(f"welch t (per-seed failure rates, N={st.n_lo} vs N={st.n_hi}): "
              f"t = {st.welch.statistic:.3f}, dof = {st.welch.dof:.1f}, "
              f"p = {st.welch.pvalue:.3e}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="beliefplan",
        description="Belief-space planning benchmark for compliant planar assembly.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("task", help="inspect a builtin task or task file")
    p.add_argument("task", help="builtin name (peg2d, rail2d, puzzle2d) or JSON path")
    p.add_argument("--out", help="export the task as JSON")
    p.set_defaults(fn=_cmd_task)

    p = sub.add_parser("plan", help="plan on a task and write a plan artifact")
    p.add_argument("task")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--particles", type=int, default=10)
    p.add_argument("--mode", choices=("first", "ao"), default="first")
    p.add_argument("--budget", type=int, default=None,
                   help="iteration budget (default: task planner budget)")
    p.add_argument("--wall-clock", type=float, default=None, metavar="S",
                   help="optional wall-clock cutoff in seconds (not reproducible)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_plan)

    p = sub.add_parser("replay", help="re-derive a plan's belief trajectory")
    p.add_argument("plan")
    p.add_argument("--task", required=True)
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("evaluate", help="roll a plan out on noisy starts")
    p.add_argument("plan")
    p.add_argument("--task", required=True)
    p.add_argument("--rollouts", type=int, default=100)
    p.add_argument("--eval-seed", type=int, default=1_000_003)
    p.add_argument("--out", help="write a JSON report")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("sweep", help="plan/evaluate grid over particle counts")
    p.add_argument("task")
    p.add_argument("--particles", default="1,4,10", help="comma list of N values")
    p.add_argument("--seeds", type=int, default=20, help="seeds 0..S-1")
    p.add_argument("--rollouts", type=int, default=100)
    p.add_argument("--eval-seed", type=int, default=1_000_003)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("stats", help="hypothesis tests on a sweep CSV")
    p.add_argument("test", choices=("fisher", "welch"),
                   help="fisher: pooled 2x2 exact test; welch: per-seed rate t-test")
    p.add_argument("sweep")
    p.set_defaults(fn=_cmd_stats)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
