"""Procedural obstacle course, contact detection, inspection, trial lifecycle.

The arena is a width x height rectangle with its corner at the origin,
populated by rejection sampling from a seeded deterministic generator:
obstacles first, then targets, then the spawn pose, each draw consuming a
fixed number of RNG values so layouts are reproducible bit-for-bit from
(params, seed) alone.

A trial is a tiny state machine: idle until the first nonzero velocity
command, then running until every target is inspected (success), the
vehicle penetrates an obstacle deeper than crash_depth (failure), or the
session gives up (timeout/abort, applied by the session loop).  Light
contact, penetration within crash_depth, is survivable by design and only
accrues collision time in the metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .cbf import EcbfGains, LinearConstraint, Obstacle, barrier
from .dynamics import StateVec, Vec2
from .rng import SplitMix64

# Barrier value reported when there are no obstacles to evaluate.
H_MIN_SENTINEL = _kernels.FAR


class OvercrowdedError(RuntimeError):
    """Rejection sampling ran out of attempts while placing an entity."""


class DegenerateTrialError(RuntimeError):
    """A trial that never ran cannot produce metrics."""


@dataclass
class Target:
    """Inspection target: center [m], acceptance radius [m], inspected flag."""

    center: Vec2
    radius: float
    inspected: bool = False

    def __post_init__(self):
        self.center = (float(self.center[0]), float(self.center[1]))
        self.radius = float(self.radius)
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"target radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class EnvironmentParams:
    """Arena dimensions, entity counts and radii, and placement clearances.

    corridor_min is the minimum surface-to-surface obstacle gap;
    target_clearance keeps target centers off obstacle surfaces by at
    least that much beyond the inflated radius; spawn_clearance does the
    same for the spawn point.  Each entity gets attempts_per_entity
    placement draws before generation fails as overcrowded.
    """

    width: float = 25.0
    height: float = 15.0
    n_obstacles: int = 45
    obstacle_radius: float = 0.5
    n_targets: int = 4
    target_radius: float = 0.5
    uav_radius: float = 0.25
    corridor_min: float = 1.0
    target_clearance: float = 0.5
    spawn_clearance: float = 0.5
    attempts_per_entity: int = 10_000

    def __post_init__(self):
        for name in ("width", "height", "obstacle_radius", "target_radius", "uav_radius"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v}")
        for name in ("corridor_min", "target_clearance", "spawn_clearance"):
            v = getattr(self, name)
            if not (v >= 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be nonnegative, got {v}")
        if self.n_obstacles < 0 or self.n_targets < 0:
            raise ValueError("entity counts must be nonnegative")
        if self.attempts_per_entity < 1:
            raise ValueError("attempts_per_entity must be at least 1")


@dataclass(frozen=True)
class Environment:
    """Generated world: geometry is immutable; only target inspected flags mutate."""

    width: float
    height: float
    obstacles: tuple[Obstacle, ...]
    targets: tuple[Target, ...]
    uav_radius: float
    seed: int
    spawn: Vec2
    spawn_yaw: float
    # Obstacle geometry flattened for the kernels, built once.
    cx: np.ndarray = field(init=False, repr=False, compare=False)
    cy: np.ndarray = field(init=False, repr=False, compare=False)
    radii: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.obstacles)
        cx = np.empty(n, dtype=np.float64)
        cy = np.empty(n, dtype=np.float64)
        radii = np.empty(n, dtype=np.float64)
        for i, obs in enumerate(self.obstacles):
            cx[i] = obs.center[0]
            cy[i] = obs.center[1]
            radii[i] = obs.radius
        object.__setattr__(self, "cx", cx)
        object.__setattr__(self, "cy", cy)
        object.__setattr__(self, "radii", radii)

    def spawn_state(self) -> StateVec:
        return StateVec(self.spawn, (0.0, 0.0), self.spawn_yaw)

    def targets_remaining(self) -> tuple[Vec2, ...]:
        return tuple(t.center for t in self.targets if not t.inspected)

    def reset_targets(self) -> None:
        for t in self.targets:
            t.inspected = False

    def to_dict(self) -> dict:
        return {
            "format": "cbf-teleop-env/1",
            "width": self.width,
            "height": self.height,
            "uav_radius": self.uav_radius,
            "seed": self.seed,
            "spawn": {"x": self.spawn[0], "y": self.spawn[1], "yaw": self.spawn_yaw},
            "obstacles": [
                {"x": o.center[0], "y": o.center[1], "radius": o.radius}
                for o in self.obstacles
            ],
            "targets": [
                {"x": t.center[0], "y": t.center[1], "radius": t.radius}
                for t in self.targets
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Environment":
        fmt = d.get("format")
        if fmt != "cbf-teleop-env/1":
            raise ValueError(f"unsupported environment format {fmt!r}")
        return cls(
            width=float(d["width"]),
            height=float(d["height"]),
            obstacles=tuple(
                Obstacle((o["x"], o["y"]), o["radius"]) for o in d["obstacles"]
            ),
            targets=tuple(
                Target((t["x"], t["y"]), t["radius"]) for t in d["targets"]
            ),
            uav_radius=float(d["uav_radius"]),
            seed=int(d["seed"]),
            spawn=(float(d["spawn"]["x"]), float(d["spawn"]["y"])),
            spawn_yaw=float(d["spawn"]["yaw"]),
        )


def generate_environment(params: EnvironmentParams, seed: int) -> Environment:
    """Sample a world satisfying every placement invariant, or fail loudly.

    Placement order is obstacles, targets, spawn, yaw; every attempt draws
    exactly two uniforms, so the layout is a pure function of (params,
    seed).  Raises OvercrowdedError naming the first entity that could not
    be placed within its attempt budget.
    """
    rng = SplitMix64(seed)
    p = params

    obstacles: list[Obstacle] = []
    r = p.obstacle_radius
    for i in range(p.n_obstacles):
        placed = False
        for _ in range(p.attempts_per_entity):
            x = rng.uniform(r, p.width - r)
            y = rng.uniform(r, p.height - r)
            ok = True
            for o in obstacles:
                dx = x - o.center[0]
                dy = y - o.center[1]
                need = r + o.radius + p.corridor_min
                if dx * dx + dy * dy < need * need:
                    ok = False
                    break
            if ok:
                obstacles.append(Obstacle((x, y), r))
                placed = True
                break
        if not placed:
            raise OvercrowdedError(
                f"overcrowded: obstacle {i} found no valid position in "
                f"{p.attempts_per_entity} attempts"
            )

    targets: list[Target] = []
    tr = p.target_radius
    for i in range(p.n_targets):
        placed = False
        for _ in range(p.attempts_per_entity):
            x = rng.uniform(tr, p.width - tr)
            y = rng.uniform(tr, p.height - tr)
            ok = True
            for o in obstacles:
                dx = x - o.center[0]
                dy = y - o.center[1]
                need = p.uav_radius + o.radius + p.target_clearance
                if dx * dx + dy * dy < need * need:
                    ok = False
                    break
            if ok:
                targets.append(Target((x, y), tr))
                placed = True
                break
        if not placed:
            raise OvercrowdedError(
                f"overcrowded: target {i} found no valid position in "
                f"{p.attempts_per_entity} attempts"
            )

    spawn: Optional[Vec2] = None
    for _ in range(p.attempts_per_entity):
        x = rng.uniform(p.uav_radius, p.width - p.uav_radius)
        y = rng.uniform(p.uav_radius, p.height - p.uav_radius)
        ok = True
        for o in obstacles:
            dx = x - o.center[0]
            dy = y - o.center[1]
            need = p.uav_radius + o.radius + p.spawn_clearance
            if dx * dx + dy * dy < need * need:
                ok = False
                break
        if ok:
            spawn = (x, y)
            break
    if spawn is None:
        raise OvercrowdedError(
            f"overcrowded: spawn found no valid position in "
            f"{p.attempts_per_entity} attempts"
        )
    yaw = rng.uniform(-math.pi, math.pi)

    return Environment(
        width=p.width,
        height=p.height,
        obstacles=tuple(obstacles),
        targets=tuple(targets),
        uav_radius=p.uav_radius,
        seed=seed,
        spawn=spawn,
        spawn_yaw=yaw,
    )


def validate_environment(env: Environment, params: EnvironmentParams) -> None:
    """Re-check every placement invariant; raises ValueError on the first hole."""
    for i, o in enumerate(env.obstacles):
        x, y = o.center
        if not (o.radius <= x <= env.width - o.radius and o.radius <= y <= env.height - o.radius):
            raise ValueError(f"obstacle {i} leaves the arena")
        for j in range(i):
            q = env.obstacles[j]
            d = math.dist(o.center, q.center)
            if d < o.radius + q.radius + params.corridor_min:
                raise ValueError(f"obstacles {j} and {i} closer than corridor_min")
    for i, t in enumerate(env.targets):
        x, y = t.center
        if not (t.radius <= x <= env.width - t.radius and t.radius <= y <= env.height - t.radius):
            raise ValueError(f"target {i} leaves the arena")
        for j, o in enumerate(env.obstacles):
            if math.dist(t.center, o.center) < env.uav_radius + o.radius + params.target_clearance:
                raise ValueError(f"target {i} too close to obstacle {j}")
    for j, o in enumerate(env.obstacles):
        if barrier(env.spawn, o, env.uav_radius) <= 0.0:
            raise ValueError(f"spawn overlaps obstacle {j}")


@dataclass(frozen=True)
class ContactReport:
    """Worst-case obstacle proximity at one position.

    h_min is the minimum barrier value (H_MIN_SENTINEL with no
    obstacles); in_contact means some obstacle surface is touching or
    overlapping the vehicle disc; max_penetration is the deepest overlap,
    0 when clear; contact_indices lists every touching obstacle.
    """

    h_min: float
    in_contact: bool
    max_penetration: float
    contact_indices: tuple[int, ...] = ()


def contact_query(x1: Vec2, env: Environment) -> ContactReport:
    """Evaluate the barrier against every obstacle at position x1."""
    h_min, min_clear, _ = _kernels.contact_min(
        x1[0], x1[1], env.cx, env.cy, env.radii, env.uav_radius
    )
    if min_clear > 0.0:
        return ContactReport(h_min, False, 0.0, ())
    dx = x1[0] - env.cx
    dy = x1[1] - env.cy
    clear = np.sqrt(dx * dx + dy * dy) - (env.uav_radius + env.radii)
    touching = tuple(int(i) for i in np.nonzero(clear <= 0.0)[0])
    return ContactReport(h_min, True, max(0.0, -min_clear), touching)


def wall_rows(
    state: StateVec, env: Environment, gains: EcbfGains
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Four half-plane barrier rows keeping the vehicle disc inside the arena.

    Wall barriers are linear in position (g = signed clearance), so their
    second-order safety condition has no drift term: a . u >= -(k1 g +
    k2 g_dot) with a the inward wall normal.  Optional; the default
    configuration protects only obstacles.
    """
    px, py = state.x1
    vx, vy = state.x2
    r = env.uav_radius
    ax = np.array([1.0, -1.0, 0.0, 0.0])
    ay = np.array([0.0, 0.0, 1.0, -1.0])
    b = np.array(
        [
            -(gains.k1 * (px - r) + gains.k2 * vx),
            -(gains.k1 * ((env.width - px) - r) + gains.k2 * (-vx)),
            -(gains.k1 * (py - r) + gains.k2 * vy),
            -(gains.k1 * ((env.height - py) - r) + gains.k2 * (-vy)),
        ]
    )
    return ax, ay, b


def wall_constraints(state: StateVec, env: Environment, gains: EcbfGains) -> list[LinearConstraint]:
    ax, ay, b = wall_rows(state, env, gains)
    return [LinearConstraint((float(ax[i]), float(ay[i])), float(b[i])) for i in range(4)]


class Phase(str, Enum):
    """Trial lifecycle phase.

    idle/running/succeeded/failed are driven by update_trial; timeout and
    aborted are terminal phases the session loop applies when it stops a
    running trial from outside (tick cap, disconnect).
    """

    IDLE = "idle"
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"
    TIMEOUT = "timeout"
    ABORTED = "aborted"

    @property
    def terminal(self) -> bool:
        return self not in (Phase.IDLE, Phase.RUNNING)


@dataclass(frozen=True)
class TrialState:
    """Lifecycle snapshot: phase, ticks elapsed, timestamps, inspection count."""

    phase: Phase = Phase.IDLE
    tick: int = 0
    t_start: Optional[float] = None
    t_end: Optional[float] = None
    inspected_count: int = 0
    failure_cause: Optional[str] = None


@dataclass(frozen=True)
class TrialParams:
    """Lifecycle thresholds: loop period, crash depth, inspection goal."""

    dt: float = 0.02
    crash_depth: float = 0.05
    target_count: int = 4
    hover_speed_max: float = 0.5

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.crash_depth > 0.0 and math.isfinite(self.crash_depth)):
            raise ValueError(f"crash_depth must be positive, got {self.crash_depth}")
        if self.target_count < 1:
            raise ValueError(f"target_count must be at least 1, got {self.target_count}")
        if not (self.hover_speed_max > 0.0 and math.isfinite(self.hover_speed_max)):
            raise ValueError(f"hover_speed_max must be positive, got {self.hover_speed_max}")


def update_trial(
    trial: TrialState,
    desired_velocity: Vec2,
    report: ContactReport,
    inspections: int,
    params: TrialParams,
) -> TrialState:
    """Advance the lifecycle by one tick.

    The tick starts motion (idle -> running on the first nonzero desired
    velocity, stamping t_start at the tick's start), then resolves the
    end-of-tick contact report and this tick's accepted inspections.
    Failure wins over success within a tick.  Terminal states are fixed
    points: the input comes back unchanged.
    """
    if trial.phase.terminal:
        return trial

    phase = trial.phase
    t_start = trial.t_start
    t_end = trial.t_end
    cause = trial.failure_cause

    if phase == Phase.IDLE and (desired_velocity[0] != 0.0 or desired_velocity[1] != 0.0):
        phase = Phase.RUNNING
        t_start = trial.tick * params.dt

    count = trial.inspected_count + inspections
    tick = trial.tick + 1

    if phase == Phase.RUNNING:
        if report.max_penetration > params.crash_depth:
            phase = Phase.FAILED
            t_end = tick * params.dt
            which = ",".join(str(i) for i in report.contact_indices)
            cause = (
                f"penetrated obstacle {which} by "
                f"{report.max_penetration:.4f} m (limit {params.crash_depth} m)"
            )
        elif count >= params.target_count:
            phase = Phase.SUCCEEDED
            t_end = tick * params.dt

    return TrialState(phase, tick, t_start, t_end, count, cause)


def end_trial(trial: TrialState, phase: Phase, params: TrialParams) -> TrialState:
    """Session-applied terminal transition (timeout or abort) for a live trial."""
    if trial.phase.terminal:
        return trial
    if phase not in (Phase.TIMEOUT, Phase.ABORTED):
        raise ValueError(f"end_trial only applies timeout/aborted, got {phase}")
    return TrialState(
        phase,
        trial.tick,
        trial.t_start,
        trial.tick * params.dt,
        trial.inspected_count,
        trial.failure_cause,
    )


@dataclass(frozen=True)
class InspectionResult:
    """Outcome of one inspect press: the target marked, or a rejection reason."""

    accepted: bool
    target_index: int = -1
    reason: str = ""


def attempt_inspection(
    state: StateVec,
    env: Environment,
    trial: TrialState,
    hover_speed_max: float = 0.5,
) -> InspectionResult:
    """Resolve one inspect press: hovering over an uninspected target marks it.

    Accepts iff some uninspected target has the vehicle within its radius
    and the speed is at most hover_speed_max; the nearest eligible target
    is marked, one per press.  Rejections carry one of the reasons
    no-target-in-range, already-inspected, moving-too-fast.
    """
    if trial.phase != Phase.RUNNING:
        raise ValueError(f"inspection requires a running trial, phase is {trial.phase.value}")
    in_range: list[tuple[float, int]] = []
    any_in_range = False
    for i, tgt in enumerate(env.targets):
        d = math.dist(state.x1, tgt.center)
        if d <= tgt.radius:
            any_in_range = True
            if not tgt.inspected:
                in_range.append((d, i))
    if not any_in_range:
        return InspectionResult(False, reason="no-target-in-range")
    if not in_range:
        return InspectionResult(False, reason="already-inspected")
    if state.speed > hover_speed_max:
        return InspectionResult(False, reason="moving-too-fast")
    in_range.sort(key=lambda di: (di[0], di[1]))
    idx = in_range[0][1]
    env.targets[idx].inspected = True
    return InspectionResult(True, target_index=idx)
