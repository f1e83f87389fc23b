"""Timing harness for the kernel backends.

Measures the fused per-tick safety filter over a realistic workload (the
default environment's obstacle field, randomized states and commands,
wall rows included) and reports a per-call median for each backend that
is importable, so the compiled versus pure-Python tradeoff is a number
rather than folklore.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from ._kernels import fallback
from .config import SessionConfig
from .dynamics import StateVec
from .rng import SplitMix64
from .session import build_environment
from .world import wall_rows

try:
    from ._kernels import _core
except ImportError:
    _core = None

ROUNDS = 5


@dataclass(frozen=True)
class BenchResult:
    backend: str
    us_per_tick: float
    ticks: int


def _workload(ticks: int, seed: int):
    cfg = SessionConfig(seed=seed)
    env = build_environment(cfg)
    rng = SplitMix64(seed)
    calls = []
    for _ in range(ticks):
        px = rng.uniform(0.2, env.width - 0.2)
        py = rng.uniform(0.2, env.height - 0.2)
        vx, vy = rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)
        state = StateVec((px, py), (vx, vy), 0.0)
        ex = wall_rows(state, env, cfg.gains)
        calls.append(
            (
                px, py, vx, vy,
                rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                env.cx, env.cy, env.radii, env.uav_radius,
                cfg.gains.k1, cfg.gains.k2,
                cfg.cull_radius, cfg.dynamics.u_max,
                ex[0], ex[1], ex[2],
                1e-9,
            )
        )
    return calls


def _time_backend(fn, calls) -> float:
    best = float("inf")
    for _ in range(ROUNDS):
        t0 = time.perf_counter()
        for args in calls:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best / len(calls) * 1e6


def bench_kernels(ticks: int = 20_000, seed: int = 0) -> list[BenchResult]:
    """Best-of-five per-tick timings; compiled first when available."""
    calls = _workload(ticks, seed)
    results = []
    if _core is not None:
        results.append(
            BenchResult("compiled", _time_backend(_core.safety_filter, calls), ticks)
        )
    results.append(
        BenchResult("python", _time_backend(fallback.safety_filter, calls), ticks)
    )
    return results
