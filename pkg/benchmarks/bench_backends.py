"""Compare the compiled and pure-Python simulation kernels.

Runs the same belief propagation workload through both backends,
checks the outputs are bit-identical, and reports throughput.

Usage: python3 benchmarks/bench_backends.py [--particles N] [--substeps M] [--repeat R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from beliefplan import tasks
from beliefplan.belief import sample_initial_belief
from beliefplan.sim import _kernel_py
from beliefplan.sim.engine import ControlSegment, propagate


def bench(kernel, root, seg, ctx, repeat: int) -> tuple[float, object]:
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = propagate(root, seg, ctx, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--particles", type=int, default=100)
    ap.add_argument("--substeps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    task = tasks.builtin_task("peg2d")
    ctx = task.context()
    rng = np.random.default_rng(0)
    root = sample_initial_belief(task.start, task.uncertainty, args.particles, rng)
    # Descend into contact so the workload covers both kernel branches.
    seg = ControlSegment(
        v0=(0.0, 0.0, 0.0), v1=(0.005, -0.03, 0.02), steps=args.substeps
    )

    try:
        from beliefplan.sim import _core
    except ImportError:
        print("compiled backend not built; only timing the pure-Python kernel")
        t_py, _ = bench(_kernel_py, root, seg, ctx, args.repeat)
        print(f"py: {t_py:.3f}s")
        return 0

    t_c, (b_c, _) = bench(_core, root, seg, ctx, args.repeat)
    t_py, (b_py, _) = bench(_kernel_py, root, seg, ctx, args.repeat)

    same = (
        np.array_equal(b_c.pose, b_py.pose)
        and np.array_equal(b_c.twist, b_py.twist)
        and np.array_equal(b_c.alive, b_py.alive)
        and b_c.cost == b_py.cost
    )
    work = args.particles * args.substeps
    print(f"workload: {args.particles} particles x {args.substeps} substeps")
    print(f"c : {t_c:8.3f}s  ({work / t_c / 1e6:6.2f} M particle-substeps/s)")
    print(f"py: {t_py:8.3f}s  ({work / t_py / 1e6:6.2f} M particle-substeps/s)")
    print(f"speedup: {t_py / t_c:.1f}x")
    print(f"bit-identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
