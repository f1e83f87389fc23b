"""Condition dispatch: which command flies the plant, what force comes back.

Four teleoperation conditions share one rule table.  The applied command
is always exactly one of the two inputs, never a blend, and the feedback
force is the gain-scaled difference between the safe and the reference
command, clamped in magnitude with its direction preserved:

    NA   -> (u_ref, 0)          HSC  -> (u_ref, F)
    SA   -> (u_cbf, 0)          HSA  -> (u_cbf, F)

with F = clamp(kf * (u_cbf - u_ref), f_max).  The force tells the
operator where the filter wanted to go; under HSC it is advice only,
under HSA it accompanies an already-filtered plant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .dynamics import ControlInput, Vec2


class Condition(str, Enum):
    """Teleoperation condition."""

    NA = "NA"
    HSC = "HSC"
    SA = "SA"
    HSA = "HSA"

    @classmethod
    def parse(cls, text: str) -> "Condition":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(
                f"unknown condition {text!r}; expected one of na, hsc, sa, hsa"
            ) from None

    @property
    def filtered(self) -> bool:
        """True when the safe command drives the plant."""
        return self in (Condition.SA, Condition.HSA)

    @property
    def haptic(self) -> bool:
        """True when force feedback is rendered."""
        return self in (Condition.HSC, Condition.HSA)


@dataclass(frozen=True)
class ParadigmConfig:
    """Force gain kf [N/(m/s^2)] and magnitude clamp f_max [N]."""

    kf: float = 0.5
    f_max: float = 3.0

    def __post_init__(self):
        if not (self.kf >= 0.0 and math.isfinite(self.kf)):
            raise ValueError(f"kf must be nonnegative, got {self.kf}")
        if not (self.f_max > 0.0 and math.isfinite(self.f_max)):
            raise ValueError(f"f_max must be positive, got {self.f_max}")


@dataclass(frozen=True)
class ParadigmOutput:
    """Command sent to the plant and force [N] rendered to the operator."""

    u_applied: ControlInput
    force: Vec2


def compute_force(u_ref: ControlInput, u_cbf: ControlInput, cfg: ParadigmConfig) -> Vec2:
    """F = kf * (u_cbf - u_ref), magnitude-clamped to f_max."""
    fx = cfg.kf * (u_cbf.u[0] - u_ref.u[0])
    fy = cfg.kf * (u_cbf.u[1] - u_ref.u[1])
    n = math.sqrt(fx * fx + fy * fy)
    if n > cfg.f_max:
        s = cfg.f_max / n
        fx *= s
        fy *= s
    return (fx, fy)


def apply_condition(
    cond: Condition,
    u_ref: ControlInput,
    u_cbf: ControlInput,
    cfg: ParadigmConfig,
) -> ParadigmOutput:
    """Select the plant command and feedback force for one tick.

    The returned u_applied is the same object as the selected input, so
    equality with it is exact by construction.
    """
    u_applied = u_cbf if cond.filtered else u_ref
    force = compute_force(u_ref, u_cbf, cfg) if cond.haptic else (0.0, 0.0)
    return ParadigmOutput(u_applied, force)
