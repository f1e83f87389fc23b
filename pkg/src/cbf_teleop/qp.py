"""Minimal-deviation projection of the reference command onto the safe set.

The filter solves

    min  0.5 ||u - u_ref||^2    s.t.  a_i . u >= b_i,   u in R^2

by exact active-set enumeration: with two decision variables the optimum
is u_ref itself, the projection onto a single boundary, or the vertex of
two boundaries, so checking every candidate is complete and exact.  The
only numeric knob is the absolute feasibility slack used when testing
candidates; all problem data here is O(1)-O(100) in SI units, so 1e-9
leaves wide headroom.

When the half-planes have empty intersection, ``solve_relaxed`` finds the
smallest shared slack delta making a_i . u >= b_i - delta feasible by
bisection, then projects at that slack.  That limit is what a quadratic
slack penalty converges to as the penalty grows, so the penalty weight
only exists as a documented knob and does not enter the arithmetic.

``oracle_solve`` is an intentionally crude grid search kept as an
independent cross-check on the enumeration; tests compare the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .cbf import LinearConstraint
from .dynamics import ControlInput

FEAS_TOL = 1e-9

DEFAULT_PENALTY = 1e4

# Relative gap at which the slack bisection stops.
_SLACK_RTOL = 1e-12


class QpStatus(str, Enum):
    """How the filtered command was obtained."""

    UNCONSTRAINED = "unconstrained"
    OPTIMAL = "optimal"
    RELAXED = "relaxed"


@dataclass(frozen=True)
class QpSolution:
    """Filtered command, active constraint indices, status, and slack used."""

    u: ControlInput
    active_set: tuple[int, ...]
    status: QpStatus
    slack: float = 0.0


class InfeasibleAtResolution(Exception):
    """Grid oracle found no feasible point inside its search box."""


def constraints_to_arrays(
    constraints: Sequence[LinearConstraint],
) -> tuple[np.ndarray, np.ndarray]:
    """Stack constraints into (m, 2) coefficient and (m,) bound arrays."""
    m = len(constraints)
    A = np.empty((m, 2), dtype=np.float64)
    b = np.empty(m, dtype=np.float64)
    for i, c in enumerate(constraints):
        A[i, 0] = c.a[0]
        A[i, 1] = c.a[1]
        b[i] = c.b
    return A, b


def _project_arrays(
    u_ref: ControlInput, A: np.ndarray, b: np.ndarray, tol: float
) -> Optional[QpSolution]:
    urx, ury = u_ref.u
    ux, uy, status, a0, a1 = _kernels.qp_project(urx, ury, A, b, tol)
    if status < 0:
        return None
    if status == 0:
        return QpSolution(u_ref, (), QpStatus.UNCONSTRAINED)
    active = tuple(i for i in (a0, a1) if i >= 0)
    return QpSolution(ControlInput((ux, uy)), active, QpStatus.OPTIMAL)


def solve_projection(
    u_ref: ControlInput,
    constraints: Sequence[LinearConstraint],
    tol: float = FEAS_TOL,
) -> QpSolution:
    """Project u_ref onto the intersection of the half-planes.

    Feasible u_ref comes back verbatim as ``unconstrained``; an empty
    intersection falls through to the shared-slack relaxation rather than
    raising, so the caller always gets a command.
    """
    if not constraints:
        return QpSolution(u_ref, (), QpStatus.UNCONSTRAINED)
    A, b = constraints_to_arrays(constraints)
    sol = _project_arrays(u_ref, A, b, tol)
    if sol is None:
        return solve_relaxed(u_ref, constraints, tol=tol)
    return sol


def solve_relaxed(
    u_ref: ControlInput,
    constraints: Sequence[LinearConstraint],
    penalty: float = DEFAULT_PENALTY,
    tol: float = FEAS_TOL,
) -> QpSolution:
    """Resolve conflicting constraints with the smallest shared slack.

    Bisects delta between 0 and the largest violation at u_ref (u_ref
    satisfies every row at that slack, so the upper end is always
    feasible).  ``penalty`` is accepted for configurability but the
    bisection already computes its large-penalty limit, so it does not
    influence the result; anything >= 1 behaves identically.
    """
    if penalty <= 0.0:
        raise ValueError(f"penalty must be positive, got {penalty}")
    A, b = constraints_to_arrays(constraints)
    sol = _project_arrays(u_ref, A, b, tol)
    if sol is not None:
        return sol
    urx, ury = u_ref.u
    hi = 0.0
    for i in range(len(constraints)):
        v = float(b[i] - (A[i, 0] * urx + A[i, 1] * ury))
        if v > hi:
            hi = v
    lo = 0.0
    while hi - lo > _SLACK_RTOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _project_arrays(u_ref, A, b - mid, tol) is not None:
            hi = mid
        else:
            lo = mid
    sol = _project_arrays(u_ref, A, b - hi, tol)
    if sol is None:
        # The bisection keeps hi on the feasible side by construction.
        raise ArithmeticError("slack bisection lost feasibility")
    return QpSolution(sol.u, sol.active_set, QpStatus.RELAXED, hi)


def oracle_solve(
    u_ref: ControlInput,
    constraints: Sequence[LinearConstraint],
    box: float,
    resolution: float,
) -> ControlInput:
    """Nearest feasible point to u_ref on a regular grid over [-box, box]^2.

    Brute force by construction; exists to cross-check solve_projection,
    which must land within one grid diagonal of this answer.  Raises
    InfeasibleAtResolution when no grid point satisfies every constraint.
    """
    if not (box > 0.0 and resolution > 0.0):
        raise ValueError(f"box and resolution must be positive, got {box}, {resolution}")
    A, b = constraints_to_arrays(constraints)
    urx, ury = u_ref.u
    ux, uy, found = _kernels.qp_oracle(urx, ury, A, b, box, resolution)
    if not found:
        raise InfeasibleAtResolution(
            f"no feasible grid point in [-{box}, {box}]^2 at resolution {resolution}"
        )
    return ControlInput((ux, uy))


def check_kkt(
    u_ref: ControlInput,
    constraints: Sequence[LinearConstraint],
    sol: QpSolution,
) -> float:
    """KKT residual of a solution: 0 means exact first-order optimality.

    Largest of the primal violation and the best stationarity certificate
    over multiplier supports drawn from the tight constraints.  The
    reported active set is always one candidate, but at a degenerate
    vertex (three or more boundaries through one point) the certifying
    pair can differ from the pair the solver used to construct the point,
    so every tight singleton and pair competes.  Pure diagnostics; solvers
    never call this.
    """
    ux, uy = sol.u.u
    urx, ury = u_ref.u
    gx = ux - urx
    gy = uy - ury
    unorm = math.sqrt(ux * ux + uy * uy)
    violation = 0.0
    tight: list[int] = []
    for i, c in enumerate(constraints):
        resid = c.b - (c.a[0] * ux + c.a[1] * uy)
        violation = max(violation, resid)
        scale = 1.0 + abs(c.b) + math.hypot(c.a[0], c.a[1]) * unorm
        if abs(resid) <= 1e-7 * scale:
            tight.append(i)

    def support_residual(idx: tuple[int, ...]) -> float:
        if len(idx) == 0:
            return max(abs(gx), abs(gy))
        if len(idx) == 1:
            a = constraints[idx[0]].a
            nn = a[0] * a[0] + a[1] * a[1]
            if nn == 0.0:
                return math.inf
            lam = (a[0] * gx + a[1] * gy) / nn
            return max(-lam, abs(gx - lam * a[0]), abs(gy - lam * a[1]))
        a0 = constraints[idx[0]].a
        a1 = constraints[idx[1]].a
        det = a0[0] * a1[1] - a0[1] * a1[0]
        if det == 0.0:
            return math.inf
        lam0 = (gx * a1[1] - gy * a1[0]) / det
        lam1 = (gy * a0[0] - gx * a0[1]) / det
        return max(
            -lam0,
            -lam1,
            abs(gx - lam0 * a0[0] - lam1 * a1[0]),
            abs(gy - lam0 * a0[1] - lam1 * a1[1]),
        )

    candidates = {tuple(sol.active_set), ()}
    for i in tight:
        candidates.add((i,))
    for ii in range(len(tight)):
        for jj in range(ii + 1, len(tight)):
            candidates.add((tight[ii], tight[jj]))
    return max(violation, min(support_residual(c) for c in candidates))
