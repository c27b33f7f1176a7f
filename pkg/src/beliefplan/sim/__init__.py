"""Impedance-controlled planar rigid-body simulator.

Two interchangeable kernels implement the per-particle substep loop: a
compiled Cython core (built at install time) and a pure-Python twin.
They execute identical floating-point operations, so results are
bit-identical; the compiled one is just fast. Selection happens here at
import: the compiled core when available, overridable with
BELIEFPLAN_BACKEND=py|c|auto. BELIEFPLAN_WORKERS sets the default
thread count for propagation (any value yields the same bits).
"""

from __future__ import annotations

import os

from .params import (
    BodyParams,
    ContactParams,
    ImpedanceParams,
    Particle,
    SimLimits,
    critical_damping,
    impedance_wrench,
)
from .scene import PackedShapes, pack_shapes

_BACKEND = ""
_KERNEL = None


def _select() -> None:
    global _BACKEND, _KERNEL
    pref = os.environ.get("BELIEFPLAN_BACKEND", "auto").lower()
    if pref not in ("auto", "c", "py"):
        raise ValueError(f"BELIEFPLAN_BACKEND must be auto, c, or py (got {pref!r})")
    if pref in ("auto", "c"):
        try:
            from . import _core

            _BACKEND, _KERNEL = "c", _core
            return
        except ImportError:
            if pref == "c":
                raise
    from . import _kernel_py

    _BACKEND, _KERNEL = "py", _kernel_py


_select()


def get_backend() -> str:
    """Name of the active kernel backend: "c" or "py"."""
    return _BACKEND


def get_kernel():
    return _KERNEL


from .engine import (  # noqa: E402  (engine needs the kernel selection above)
    ControlSegment,
    SegmentTrace,
    SimContext,
    env_workers,
    exact_map,
    propagate,
    setpoint_arrays,
    step,
)

__all__ = [
    "BodyParams", "ContactParams", "ImpedanceParams", "Particle", "SimLimits",
    "critical_damping", "impedance_wrench", "PackedShapes", "pack_shapes",
    "ControlSegment", "SegmentTrace", "SimContext", "env_workers", "exact_map",
    "propagate", "setpoint_arrays", "step", "get_backend", "get_kernel",
]
