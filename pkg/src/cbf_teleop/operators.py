"""Scripted operator policies standing in for human pilots, plus replay.

The policies are deliberately obstacle-blind: they see only their own
state, the remaining targets, and the feedback force.  Whatever safety
emerges in a trial is then attributable to the filter, not to operator
cleverness.  Every policy is deterministic, so identical configurations
reproduce identical command streams bit-for-bit.

The waypoint policy flies greedily at the nearest remaining target at a
speed scaled by its aggressiveness, tapering on approach, and presses
inspect once slow and close.  Because it cannot see obstacles it can end
up pushing straight into one and being held there by the filter; a stall
detector then swerves the commanded direction for a while, cycling
through alternating escape angles until progress resumes.  With
alpha_force > 0 the same policy becomes an admittance model: the felt
force displaces the commanded stylus proportionally, which is the
mechanism by which haptic feedback can align the operator with the
filter.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .dynamics import (
    InputMap,
    OperatorCommand,
    StateVec,
    Vec2,
    inverse_map_velocity,
    make_command,
)


@dataclass(frozen=True)
class OperatorObservation:
    """What a policy may see: own state, felt force [N], target centers, tick."""

    state: StateVec
    force: Vec2
    targets_remaining: tuple[Vec2, ...]
    tick: int


@dataclass(frozen=True)
class OperatorParams:
    """Policy knobs.

    gain_p [cm/(m/s)] scales the stylus correction for velocity tracking
    error; waypoint_tolerance [m] is the press-inspect distance (keep it
    below the target acceptance radius); aggressiveness >= 1 multiplies
    cruise speed; alpha_force [cm/N] is the admittance compliance, 0 for a
    force-ignoring operator.
    """

    gain_p: float = 0.5
    waypoint_tolerance: float = 0.35
    aggressiveness: float = 1.0
    alpha_force: float = 0.0

    def __post_init__(self):
        if not (self.gain_p > 0.0 and math.isfinite(self.gain_p)):
            raise ValueError(f"gain_p must be positive, got {self.gain_p}")
        if not (self.waypoint_tolerance > 0.0 and math.isfinite(self.waypoint_tolerance)):
            raise ValueError(
                f"waypoint_tolerance must be positive, got {self.waypoint_tolerance}"
            )
        if not (self.aggressiveness >= 1.0 and math.isfinite(self.aggressiveness)):
            raise ValueError(f"aggressiveness must be >= 1, got {self.aggressiveness}")
        if not (self.alpha_force >= 0.0 and math.isfinite(self.alpha_force)):
            raise ValueError(f"alpha_force must be nonnegative, got {self.alpha_force}")


class WaypointOperator:
    """Greedy nearest-target pursuit with stall escape and optional admittance."""

    CRUISE_SPEED = 2.0
    APPROACH_RATE = 1.5
    STALL_SPEED = 0.1
    STALL_TICKS = 50
    ESCAPE_TICKS = 100
    ESCAPE_ANGLES = (1.3, -1.3, 2.2, -2.2)
    # Velocity shift per unit felt force at alpha_force=1; keeps compliance
    # comparable to cruise speed instead of swamping it through the stylus
    # gain.
    FORCE_TO_VELOCITY = 0.4
    # Compliance is a leaky integrator, not an instantaneous offset: the
    # bias ramps toward alpha_force * FORCE_TO_VELOCITY * force at this
    # per-tick rate (time constant 1 s at a 50 Hz tick) and decays the
    # same way once the force stops.  Sustained pressure can therefore
    # halt or reverse the intent and back the vehicle out of a pocket,
    # while a brief brush barely deflects it.
    COMPLY_GAIN = 0.02
    # Escape also fires when the distance to the nearest target has not
    # improved by PROGRESS_EPS within PROGRESS_TICKS ticks (orbit traps
    # keep the speed too high for the stall detector).
    PROGRESS_TICKS = 400
    PROGRESS_EPS = 0.1

    def __init__(self, imap: InputMap, params: OperatorParams, press_speed: float = 0.45):
        self.imap = imap
        self.params = params
        self.press_speed = press_speed
        self.reset()

    def reset(self) -> None:
        self._stall_ticks = 0
        self._escape_until = -1
        self._escape_dir: Vec2 = (1.0, 0.0)
        self._escape_idx = 0
        self._escape_streak = 0
        self._commanded = False
        self._best_dist = math.inf
        self._progress_tick = 0
        self._goal: Vec2 | None = None
        self._bias: Vec2 = (0.0, 0.0)

    def _compose(
        self,
        v_des: Vec2,
        obs: OperatorObservation,
        inspect: bool,
        comply: bool = True,
    ) -> OperatorCommand:
        state = obs.state
        yaw = state.yaw
        if self.params.alpha_force > 0.0:
            k = self.params.alpha_force * self.FORCE_TO_VELOCITY
            tx = k * obs.force[0] if comply else 0.0
            ty = k * obs.force[1] if comply else 0.0
            g = self.COMPLY_GAIN
            self._bias = (
                self._bias[0] + g * (tx - self._bias[0]),
                self._bias[1] + g * (ty - self._bias[1]),
            )
            v_des = (v_des[0] + self._bias[0], v_des[1] + self._bias[1])
        sx, sy = inverse_map_velocity(v_des, yaw, self.imap)
        c = math.cos(-yaw)
        s = math.sin(-yaw)
        evx = v_des[0] - state.x2[0]
        evy = v_des[1] - state.x2[1]
        sx += self.params.gain_p * (c * evx - s * evy)
        sy += self.params.gain_p * (s * evx + c * evy)
        return make_command((sx, sy), self.imap, 0, inspect)

    def step(self, obs: OperatorObservation) -> OperatorCommand:
        if not obs.targets_remaining:
            return self._compose((0.0, 0.0), obs, False)
        pos = obs.state.x1
        best_d = math.inf
        goal = obs.targets_remaining[0]
        for tc in obs.targets_remaining:
            d = math.dist(pos, tc)
            if d < best_d:
                best_d = d
                goal = tc
        dist = best_d

        # Presses only register once the trial is live, so command motion
        # at least once before pressing even if spawned on top of a target.
        if (
            self._commanded
            and dist <= self.params.waypoint_tolerance
            and obs.state.speed <= self.press_speed
        ):
            self._stall_ticks = 0
            return self._compose((0.0, 0.0), obs, True)

        speed_cmd = min(self.params.aggressiveness * self.CRUISE_SPEED, self.APPROACH_RATE * dist)
        if dist > 1e-9:
            ux = (goal[0] - pos[0]) / dist
            uy = (goal[1] - pos[1]) / dist
        else:
            ux, uy = 1.0, 0.0
            speed_cmd = self.STALL_SPEED

        if goal != self._goal:
            self._goal = goal
            self._best_dist = dist
            self._progress_tick = obs.tick
            self._escape_streak = 0
        elif dist < self._best_dist - self.PROGRESS_EPS:
            self._best_dist = dist
            self._progress_tick = obs.tick
            self._escape_streak = 0

        if obs.tick >= self._escape_until:
            stalled = False
            if dist > self.params.waypoint_tolerance and obs.state.speed < self.STALL_SPEED:
                self._stall_ticks += 1
            else:
                self._stall_ticks = 0
            if self._stall_ticks >= self.STALL_TICKS:
                stalled = True
            elif (
                dist > self.params.waypoint_tolerance
                and obs.tick - self._progress_tick >= self.PROGRESS_TICKS
            ):
                stalled = True
            if stalled:
                # Lock a world-frame direction at trigger time; re-aiming
                # against the live goal bearing every tick turns the escape
                # into an orbit around the blockage.  After a full cycle of
                # failed angles commit for longer before giving up on one.
                ang = self.ESCAPE_ANGLES[self._escape_idx % len(self.ESCAPE_ANGLES)]
                ca = math.cos(ang)
                sa = math.sin(ang)
                self._escape_dir = (ca * ux - sa * uy, sa * ux + ca * uy)
                self._escape_idx += 1
                dur = self.ESCAPE_TICKS * (
                    1 + self._escape_streak // len(self.ESCAPE_ANGLES)
                )
                self._escape_until = obs.tick + dur
                self._escape_streak += 1
                self._stall_ticks = 0
                self._progress_tick = obs.tick
                self._best_dist = dist
        escaping = obs.tick < self._escape_until
        if escaping:
            ux, uy = self._escape_dir
            speed_cmd = self.params.aggressiveness * self.CRUISE_SPEED

        self._commanded = True
        # Escapes are committed blind so a saturated force cannot cancel
        # the very maneuver meant to break its deadlock.
        return self._compose(
            (ux * speed_cmd, uy * speed_cmd), obs, False, comply=not escaping
        )


class ForceFollowingOperator(WaypointOperator):
    """Waypoint pursuit that complies with the felt force (alpha_force > 0)."""

    def __init__(self, imap: InputMap, params: OperatorParams, press_speed: float = 0.45):
        if not params.alpha_force > 0.0:
            raise ValueError("force-following operator requires alpha_force > 0")
        super().__init__(imap, params, press_speed)


class ReplayExhausted(Exception):
    """Replay ran past the end of the recorded command stream."""


class ReplayOperator:
    """Feeds back a recorded command stream verbatim, indexed by tick."""

    def __init__(self, commands: Sequence[OperatorCommand]):
        self.commands = list(commands)

    def reset(self) -> None:
        pass

    def step(self, obs: OperatorObservation) -> OperatorCommand:
        if obs.tick >= len(self.commands):
            raise ReplayExhausted(
                f"no recorded command for tick {obs.tick} "
                f"(log holds {len(self.commands)})"
            )
        return self.commands[obs.tick]


class DelayOperator:
    """Wraps a policy with an N-tick command latency (zero commands prime the line)."""

    def __init__(self, inner, delay: int):
        if delay < 0:
            raise ValueError(f"delay must be nonnegative, got {delay}")
        self.inner = inner
        self.delay = delay
        self.reset()

    def reset(self) -> None:
        self.inner.reset()
        self._queue = deque(
            OperatorCommand((0.0, 0.0)) for _ in range(self.delay)
        )

    def step(self, obs: OperatorObservation) -> OperatorCommand:
        self._queue.append(self.inner.step(obs))
        return self._queue.popleft()


def make_operator(
    spec: str,
    imap: InputMap,
    press_speed: float = 0.45,
    replay_commands: Optional[Sequence[OperatorCommand]] = None,
):
    """Build an operator from a spec string.

    Grammar: ``name[:key=value,...]``.  Names: ``waypoint`` and
    ``force_following`` (keys gain_p, waypoint_tolerance, aggressiveness,
    alpha_force, delay; force_following additionally demands
    alpha_force > 0) and ``replay`` (commands supplied by the caller).
    """
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    kwargs: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"bad operator option {item!r} in spec {spec!r}")
            try:
                kwargs[key.strip()] = float(value)
            except ValueError:
                raise ValueError(f"bad operator option value {item!r} in spec {spec!r}") from None

    if name == "replay":
        if kwargs:
            raise ValueError("replay operator takes no options")
        if replay_commands is None:
            raise ValueError("replay operator requires a recorded command stream")
        return ReplayOperator(replay_commands)

    if name not in ("waypoint", "force_following"):
        raise ValueError(f"unknown operator {name!r} in spec {spec!r}")

    delay = int(kwargs.pop("delay", 0))
    allowed = {"gain_p", "waypoint_tolerance", "aggressiveness", "alpha_force"}
    unknown = set(kwargs) - allowed
    if unknown:
        raise ValueError(f"unknown operator options {sorted(unknown)} in spec {spec!r}")
    params = OperatorParams(**kwargs)
    cls = ForceFollowingOperator if name == "force_following" else WaypointOperator
    op = cls(imap, params, press_speed)
    if delay > 0:
        return DelayOperator(op, delay)
    return op
