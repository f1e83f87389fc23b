"""Planar UAV plant and operator-input mapping.

The vehicle is a planar double integrator: position x1, velocity x2, with
the acceleration command u as input.  Yaw is kinematic and independent of
the translational dynamics (the obstacle barrier does not depend on it).
The operator's stylus displacement maps to a desired velocity through a
deadzone-plus-gain rate-control law, and the reference acceleration is the
one-step velocity error divided by the loop period.

All functions here are pure and operate on small value types; vectors are
plain ``(x, y)`` float tuples so results are deterministic and hashable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec2 = tuple[float, float]

_TWO_PI = 2.0 * math.pi

ZERO2: Vec2 = (0.0, 0.0)


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    while a > math.pi:
        a -= _TWO_PI
    while a <= -math.pi:
        a += _TWO_PI
    return a


def _check_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {values!r}")


@dataclass(frozen=True)
class StateVec:
    """UAV state: position x1 [m], velocity x2 [m/s], yaw [rad] in (-pi, pi]."""

    x1: Vec2
    x2: Vec2
    yaw: float = 0.0

    def __post_init__(self):
        x1 = (float(self.x1[0]), float(self.x1[1]))
        x2 = (float(self.x2[0]), float(self.x2[1]))
        _check_finite("x1", *x1)
        _check_finite("x2", *x2)
        _check_finite("yaw", self.yaw)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    @property
    def speed(self) -> float:
        return math.sqrt(self.x2[0] * self.x2[0] + self.x2[1] * self.x2[1])


@dataclass(frozen=True)
class ControlInput:
    """Planar acceleration command [m/s^2].

    ``compute_u_ref`` clamps operator commands to ``u_max``; the safety
    filter's output is deliberately not clamped (the projection needs full
    authority to keep its guarantee), so only reference inputs carry the
    magnitude bound.
    """

    u: Vec2

    def __post_init__(self):
        u = (float(self.u[0]), float(self.u[1]))
        _check_finite("u", *u)
        object.__setattr__(self, "u", u)

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.u[0] * self.u[0] + self.u[1] * self.u[1])


ZERO_CONTROL = ControlInput(ZERO2)


@dataclass(frozen=True)
class DynamicsParams:
    """Control-loop period dt [s], acceleration clamp u_max [m/s^2], yaw rate [rad/s]."""

    dt: float = 0.02
    u_max: float = 10.0
    yaw_rate: float = math.pi / 4.0

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.u_max > 0.0 and math.isfinite(self.u_max)):
            raise ValueError(f"u_max must be positive, got {self.u_max}")
        if not (self.yaw_rate > 0.0 and math.isfinite(self.yaw_rate)):
            raise ValueError(f"yaw_rate must be positive, got {self.yaw_rate}")


@dataclass(frozen=True)
class InputMap:
    """Stylus-to-velocity mapping: gain kv [(m/s)/cm], deadzone and saturation radii [cm]."""

    kv: float = 2.0
    deadzone: float = 1.0
    stylus_max: float = 5.0

    def __post_init__(self):
        if not (self.kv > 0.0 and math.isfinite(self.kv)):
            raise ValueError(f"kv must be positive, got {self.kv}")
        if not (0.0 <= self.deadzone < self.stylus_max):
            raise ValueError(
                f"need 0 <= deadzone < stylus_max, got deadzone={self.deadzone} "
                f"stylus_max={self.stylus_max}"
            )

    @property
    def max_speed(self) -> float:
        """Largest commandable speed: kv * (stylus_max - deadzone)."""
        return self.kv * (self.stylus_max - self.deadzone)


@dataclass(frozen=True)
class OperatorCommand:
    """One operator input sample: stylus displacement [cm, body frame], yaw button, inspect button."""

    stylus: Vec2
    yaw_input: int = 0
    inspect_pressed: bool = False

    def __post_init__(self):
        stylus = (float(self.stylus[0]), float(self.stylus[1]))
        _check_finite("stylus", *stylus)
        object.__setattr__(self, "stylus", stylus)
        if self.yaw_input not in (-1, 0, 1):
            raise ValueError(f"yaw_input must be -1, 0 or +1, got {self.yaw_input}")


def make_command(
    stylus: Vec2,
    imap: InputMap,
    yaw_input: int = 0,
    inspect_pressed: bool = False,
) -> OperatorCommand:
    """Build an OperatorCommand, saturating the stylus to ``imap.stylus_max``."""
    sx, sy = float(stylus[0]), float(stylus[1])
    mag = math.sqrt(sx * sx + sy * sy)
    if mag > imap.stylus_max:
        k = imap.stylus_max / mag
        sx *= k
        sy *= k
    return OperatorCommand((sx, sy), yaw_input, inspect_pressed)


def map_stylus_to_desired_velocity(cmd: OperatorCommand, yaw: float, imap: InputMap) -> Vec2:
    """Desired world-frame velocity [m/s] for a stylus displacement.

    Inside the deadzone the command is exactly zero; outside, the gain
    applies to the excess displacement beyond the deadzone so the mapping
    is continuous at the boundary.  The body-frame direction is rotated
    into the world frame by the current yaw.
    """
    sx, sy = cmd.stylus
    mag = math.sqrt(sx * sx + sy * sy)
    if mag <= imap.deadzone:
        return ZERO2
    scale = imap.kv * (mag - imap.deadzone) / mag
    bx = sx * scale
    by = sy * scale
    c = math.cos(yaw)
    s = math.sin(yaw)
    return (c * bx - s * by, s * bx + c * by)


def inverse_map_velocity(v: Vec2, yaw: float, imap: InputMap) -> Vec2:
    """Stylus displacement [cm, body frame] whose mapped velocity is ``v`` (pre-saturation).

    Exact inverse of ``map_stylus_to_desired_velocity`` for speeds up to
    ``imap.max_speed``; larger speeds produce displacements beyond
    ``stylus_max`` and saturate downstream.
    """
    vx, vy = float(v[0]), float(v[1])
    speed = math.sqrt(vx * vx + vy * vy)
    if speed == 0.0:
        return ZERO2
    c = math.cos(-yaw)
    s = math.sin(-yaw)
    bx = c * vx - s * vy
    by = s * vx + c * vy
    mag = imap.deadzone + speed / imap.kv
    return (bx / speed * mag, by / speed * mag)


def compute_u_ref(x2d: Vec2, x2: Vec2, params: DynamicsParams) -> ControlInput:
    """Reference acceleration: velocity error over one loop period, clamped to u_max."""
    ax = (float(x2d[0]) - float(x2[0])) / params.dt
    ay = (float(x2d[1]) - float(x2[1])) / params.dt
    n = math.sqrt(ax * ax + ay * ay)
    if n > params.u_max:
        k = params.u_max / n
        ax *= k
        ay *= k
    return ControlInput((ax, ay))


def step(state: StateVec, u: ControlInput, yaw_input: int, params: DynamicsParams) -> StateVec:
    """One semi-implicit Euler step of the double integrator plus yaw kinematics.

    Velocity updates first, position integrates the new velocity; identical
    inputs always produce bit-identical outputs.
    """
    dt = params.dt
    vx = state.x2[0] + u.u[0] * dt
    vy = state.x2[1] + u.u[1] * dt
    px = state.x1[0] + vx * dt
    py = state.x1[1] + vy * dt
    yaw = wrap_angle(state.yaw + yaw_input * params.yaw_rate * dt)
    return StateVec((px, py), (vx, vy), yaw)
