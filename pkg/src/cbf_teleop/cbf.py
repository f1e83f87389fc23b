"""Obstacle barriers, their Lie derivatives, and safety constraint assembly.

Each circular obstacle induces a barrier h(x) = ||x1 - c||^2 - r^2 with r
the obstacle radius inflated by the vehicle radius; h >= 0 means the two
discs do not overlap.  Acceleration enters h only at the second
derivative, so the safety condition pairs h with its rate:

    h_ddot + k2 * h_dot + k1 * h >= 0

which is linear in u and becomes one half-plane constraint per obstacle.
The gain pair must make s^2 + k2 s + k1 Hurwitz or the condition stops
being attractive toward the safe set; ``validate_gains`` enforces that and
cross-checks itself by actually computing the roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import StateVec, Vec2


@dataclass(frozen=True)
class EcbfGains:
    """Gains (k1, k2) weighting h and h_dot in the safety condition.

    Construction only requires finiteness so that invalid pairs can be
    built and then rejected with a reason; run ``validate_gains`` before
    using a pair in a filter.
    """

    k1: float = 2.0
    k2: float = 3.0

    def __post_init__(self):
        k1, k2 = float(self.k1), float(self.k2)
        if not (math.isfinite(k1) and math.isfinite(k2)):
            raise ValueError(f"gains must be finite, got ({self.k1}, {self.k2})")
        object.__setattr__(self, "k1", k1)
        object.__setattr__(self, "k2", k2)

    def poles(self) -> tuple[complex, complex]:
        """Roots of s^2 + k2 s + k1."""
        disc = self.k2 * self.k2 - 4.0 * self.k1
        if disc >= 0.0:
            sq = math.sqrt(disc)
            return (complex((-self.k2 - sq) / 2.0), complex((-self.k2 + sq) / 2.0))
        sq = math.sqrt(-disc)
        return (complex(-self.k2 / 2.0, -sq / 2.0), complex(-self.k2 / 2.0, sq / 2.0))


@dataclass(frozen=True)
class Obstacle:
    """Circular obstacle: center [m] and radius [m]."""

    center: Vec2
    radius: float

    def __post_init__(self):
        center = (float(self.center[0]), float(self.center[1]))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not (math.isfinite(center[0]) and math.isfinite(center[1])):
            raise ValueError(f"center must be finite, got {center!r}")


@dataclass(frozen=True)
class BarrierEval:
    """Barrier value and derivatives at one state against one obstacle.

    h [m^2] and lf_h [m^2/s] are the barrier and its rate; lf2_h_drift
    [m^2/s^2] is the control-independent part of the second derivative and
    lg_lf_h multiplies the acceleration command.
    """

    h: float
    lf_h: float
    lf2_h_drift: float
    lg_lf_h: Vec2


@dataclass(frozen=True)
class LinearConstraint:
    """Half-plane a . u >= b on the acceleration command."""

    a: Vec2
    b: float


def barrier(x1: Vec2, obs: Obstacle, uav_radius: float) -> float:
    """h = ||x1 - center||^2 - (uav_radius + obstacle radius)^2."""
    r = uav_radius + obs.radius
    dx = x1[0] - obs.center[0]
    dy = x1[1] - obs.center[1]
    return dx * dx + dy * dy - r * r


def lie_derivatives(state: StateVec, obs: Obstacle, uav_radius: float) -> BarrierEval:
    """Analytic derivatives of the barrier along the double-integrator flow.

    lf_h = 2 (x1-c).x2, lf2_h_drift = 2 ||x2||^2, lg_lf_h = 2 (x1-c).
    """
    r = uav_radius + obs.radius
    dx = state.x1[0] - obs.center[0]
    dy = state.x1[1] - obs.center[1]
    vx, vy = state.x2
    return BarrierEval(
        h=dx * dx + dy * dy - r * r,
        lf_h=2.0 * (dx * vx + dy * vy),
        lf2_h_drift=2.0 * (vx * vx + vy * vy),
        lg_lf_h=(2.0 * dx, 2.0 * dy),
    )


def build_constraints(
    state: StateVec,
    obstacles: list[Obstacle],
    uav_radius: float,
    gains: EcbfGains,
) -> list[LinearConstraint]:
    """One half-plane per obstacle, in obstacle order.

    a = lg_lf_h and b = -(lf2_h_drift + k1 h + k2 lf_h); any u with
    a . u >= b keeps h_ddot + k2 h_dot + k1 h >= 0 at this state.
    """
    out = []
    for obs in obstacles:
        ev = lie_derivatives(state, obs, uav_radius)
        b = -(ev.lf2_h_drift + gains.k1 * ev.h + gains.k2 * ev.lf_h)
        out.append(LinearConstraint(ev.lg_lf_h, b))
    return out


def validate_gains(gains: EcbfGains) -> None:
    """Raise ValueError unless s^2 + k2 s + k1 is Hurwitz.

    For this quadratic, stability is exactly k1 > 0 and k2 > 0.  The root
    computation below is a redundant guard on that algebra: if the sign
    test ever disagreed with the actual pole locations we fail loudly
    rather than run an unstable filter.
    """
    if not gains.k1 > 0.0:
        raise ValueError(f"k1 must be positive for a stable safety condition, got k1={gains.k1}")
    if not gains.k2 > 0.0:
        raise ValueError(f"k2 must be positive for a stable safety condition, got k2={gains.k2}")
    p1, p2 = gains.poles()
    # Roundoff allowance: for k1 << k2^2 the fast pole -k1/k2 can round to
    # +-0.0 even though the true real part is negative.
    tol = 1e-12 * (1.0 + gains.k2)
    if not (p1.real < tol and p2.real < tol):
        raise ArithmeticError(
            f"gain sign test accepted ({gains.k1}, {gains.k2}) but the poles "
            f"are {p1}, {p2}; refusing to run"
        )
