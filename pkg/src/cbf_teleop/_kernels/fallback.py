"""Pure-Python reference backend for the numeric kernels.

Every function here has a compiled twin in ``_core.pyx``.  The two are
kept bit-identical: same expression order, same parenthesization, same
tie-breaking, square roots via the correctly-rounded sqrt, and the
extension is compiled with FMA contraction disabled.  When editing either
file, mirror the change in the other and run the parity suite.

Conventions shared by both backends:

- Constraint rows mean a . u >= b.
- ``qp_project`` status: 0 = u_ref already feasible (returned verbatim),
  1 = projection found, -1 = empty feasible set.  The two trailing ints
  are active row indices, -1 when unused.
- Candidate searches update strictly (<), so the first candidate in the
  fixed enumeration order wins ties.
- Sentinel for "no obstacle": barrier/clearance 1e30, index -1.
"""

from __future__ import annotations

import math

import numpy as np

FAR = 1e30


def qp_project(urx, ury, A, b, tol):
    """Exact projection of (urx, ury) onto the intersection of half-planes.

    Enumerates u_ref, single-constraint projections, and pair vertices;
    returns the nearest feasible candidate.  Complete for two decision
    variables.  A is (m, 2) float64, b is (m,).
    """
    m = b.shape[0]
    ax_ = A[:, 0].tolist()
    ay_ = A[:, 1].tolist()
    b_ = b.tolist()

    feasible = True
    for i in range(m):
        if ax_[i] * urx + ay_[i] * ury < b_[i] - tol:
            feasible = False
            break
    if feasible:
        return urx, ury, 0, -1, -1

    found = False
    best_d2 = math.inf
    bux = urx
    buy = ury
    ba0 = -1
    ba1 = -1

    for i in range(m):
        ax = ax_[i]
        ay = ay_[i]
        nn = ax * ax + ay * ay
        if nn == 0.0:
            continue
        t = (b_[i] - (ax * urx + ay * ury)) / nn
        px = urx + ax * t
        py = ury + ay * t
        ok = True
        for j in range(m):
            if j == i:
                continue
            if ax_[j] * px + ay_[j] * py < b_[j] - tol:
                ok = False
                break
        if not ok:
            continue
        dx = px - urx
        dy = py - ury
        d2 = dx * dx + dy * dy
        if d2 < best_d2:
            found = True
            best_d2 = d2
            bux = px
            buy = py
            ba0 = i
            ba1 = -1

    for i in range(m):
        for j in range(i + 1, m):
            det = ax_[i] * ay_[j] - ay_[i] * ax_[j]
            if det == 0.0:
                continue
            px = (b_[i] * ay_[j] - ay_[i] * b_[j]) / det
            py = (ax_[i] * b_[j] - b_[i] * ax_[j]) / det
            ok = True
            for k in range(m):
                if k == i or k == j:
                    continue
                if ax_[k] * px + ay_[k] * py < b_[k] - tol:
                    ok = False
                    break
            if not ok:
                continue
            dx = px - urx
            dy = py - ury
            d2 = dx * dx + dy * dy
            if d2 < best_d2:
                found = True
                best_d2 = d2
                bux = px
                buy = py
                ba0 = i
                ba1 = j

    if not found:
        return urx, ury, -1, -1, -1
    return bux, buy, 1, ba0, ba1


def _span_best(fixed_val, glo, ghi, uref_along, slopes, rests, b_, res):
    """Best feasible grid index along one ring edge, or None.

    The edge holds one coordinate fixed (contributions precomputed in
    ``rests``) and varies the other over indices [glo, ghi].  Constraint i
    requires slopes[i] * t + rests[i] >= b_[i], a one-dimensional interval,
    so the edge reduces to an interval intersection plus one clamped
    quadratic minimization.  Ties round toward the lower index.
    """
    lo = glo
    hi = ghi
    for i in range(len(b_)):
        s = slopes[i]
        rest = rests[i]
        if s == 0.0:
            if rest >= b_[i]:
                continue
            return None
        q = (b_[i] - rest) / s
        if s > 0.0:
            if q > float(hi):
                return None
            if q > float(lo):
                lo = math.ceil(q)
        else:
            if q < float(lo):
                return None
            if q < float(hi):
                hi = math.floor(q)
    if lo > hi:
        return None
    tstar = uref_along / res
    if tstar >= float(hi):
        tc = hi
    elif tstar <= float(lo):
        tc = lo
    else:
        tc = math.ceil(tstar - 0.5)
        if tc < lo:
            tc = lo
        elif tc > hi:
            tc = hi
    x = tc * res
    dx = x - uref_along
    dy = fixed_val
    return dx * dx + dy * dy, tc


def qp_oracle(urx, ury, A, b, box, res):
    """Nearest feasible grid point to (urx, ury) on [-box, box]^2.

    Expanding-ring search around the grid point closest to u_ref; each
    ring edge is solved in closed form (interval intersection), and the
    scan stops once no unvisited ring can beat the incumbent.  Returns
    (x, y, found) with found 0 when nothing in the box is feasible.
    """
    m = b.shape[0]
    ax_ = A[:, 0].tolist()
    ay_ = A[:, 1].tolist()
    b_ = b.tolist()

    n = math.floor(box / res + 0.5)
    i0 = math.floor(urx / res + 0.5)
    if i0 < -n:
        i0 = -n
    elif i0 > n:
        i0 = n
    j0 = math.floor(ury / res + 0.5)
    if j0 < -n:
        j0 = -n
    elif j0 > n:
        j0 = n
    off = max(abs(urx - i0 * res), abs(ury - j0 * res))

    row_slopes = [ax_[i] * res for i in range(m)]
    col_slopes = [ay_[i] * res for i in range(m)]

    found = False
    best_d2 = math.inf
    best_i = i0
    best_j = j0

    def try_row(gj, glo, ghi):
        nonlocal found, best_d2, best_i, best_j
        if gj < -n or gj > n:
            return
        if glo < -n:
            glo = -n
        if ghi > n:
            ghi = n
        if glo > ghi:
            return
        y = gj * res
        rests = [ay_[i] * y for i in range(m)]
        hit = _span_best(y - ury, glo, ghi, urx, row_slopes, rests, b_, res)
        if hit is not None and hit[0] < best_d2:
            found = True
            best_d2 = hit[0]
            best_i = hit[1]
            best_j = gj

    def try_col(gi, glo, ghi):
        nonlocal found, best_d2, best_i, best_j
        if gi < -n or gi > n:
            return
        if glo < -n:
            glo = -n
        if ghi > n:
            ghi = n
        if glo > ghi:
            return
        x = gi * res
        rests = [ax_[i] * x for i in range(m)]
        hit = _span_best(x - urx, glo, ghi, ury, col_slopes, rests, b_, res)
        if hit is not None and hit[0] < best_d2:
            found = True
            best_d2 = hit[0]
            best_i = gi
            best_j = hit[1]

    kmax = max(i0 + n, n - i0, j0 + n, n - j0)
    k = 0
    while k <= kmax:
        if found:
            lb = k * res - off
            if lb > 0.0 and lb * lb > best_d2:
                break
        if k == 0:
            try_row(j0, i0, i0)
        else:
            try_row(j0 - k, i0 - k, i0 + k)
            try_row(j0 + k, i0 - k, i0 + k)
            try_col(i0 - k, j0 - k + 1, j0 + k - 1)
            try_col(i0 + k, j0 - k + 1, j0 + k - 1)
        k += 1

    if not found:
        return 0.0, 0.0, 0
    return best_i * res, best_j * res, 1


def ecbf_rows(px, py, vx, vy, cx, cy, radii, uav_radius, k1, k2):
    """Constraint rows a . u >= b for every obstacle, plus barrier values.

    Returns (A, b, h) with rows in obstacle order.
    """
    dx = px - cx
    dy = py - cy
    r = uav_radius + radii
    h = (dx * dx + dy * dy) - r * r
    lf = 2.0 * (dx * vx + dy * vy)
    drift = 2.0 * (vx * vx + vy * vy)
    a0 = 2.0 * dx
    a1 = 2.0 * dy
    b = -((drift + k1 * h) + k2 * lf)
    A = np.empty((cx.shape[0], 2), dtype=np.float64)
    A[:, 0] = a0
    A[:, 1] = a1
    return A, b, h


def contact_min(px, py, cx, cy, radii, uav_radius):
    """Minimum barrier and surface clearance over obstacles.

    Returns (h_min, min_clearance, nearest) where min_clearance < 0 means
    the vehicle disc overlaps an obstacle by that depth and nearest is the
    first index attaining the minimum clearance.  Sentinels (FAR, FAR, -1)
    when there are no obstacles.
    """
    if cx.shape[0] == 0:
        return FAR, FAR, -1
    dx = px - cx
    dy = py - cy
    r = uav_radius + radii
    dist2 = dx * dx + dy * dy
    h = dist2 - r * r
    clear = np.sqrt(dist2) - r
    idx = int(np.argmin(clear))
    return float(np.min(h)), float(clear[idx]), idx


def safety_filter(
    px, py, vx, vy, urx, ury,
    cx, cy, radii, uav_radius, k1, k2,
    cull_radius, u_bound,
    ex_ax, ex_ay, ex_b,
    tol,
):
    """One control tick: build rows, cull far obstacles, project, verify.

    Obstacles beyond cull_radius whose bound b is below -||a|| * u_bound
    cannot be active for any command of magnitude <= u_bound, so they are
    dropped before the projection.  Because the projected command is not
    magnitude-clamped, every culled row is then re-checked at the solution
    and the projection re-runs with the full set if any fails; the subset
    optimum that satisfies all culled rows is the full-set optimum, so the
    culling is exact, not just conservative.

    Extra rows (ex_*) are appended after the obstacle rows and are never
    culled; active indices count obstacles first, then extras.  Returns
    (ux, uy, status, a0, a1) with qp_project's conventions; on status -1
    the caller owns the relaxation fallback.
    """
    ncirc = cx.shape[0]
    nex = ex_b.shape[0]

    dx = px - cx
    dy = py - cy
    r = uav_radius + radii
    dist2 = dx * dx + dy * dy
    h = dist2 - r * r
    lf = 2.0 * (dx * vx + dy * vy)
    drift = 2.0 * (vx * vx + vy * vy)
    a0 = 2.0 * dx
    a1 = 2.0 * dy
    b = -((drift + k1 * h) + k2 * lf)

    na = np.sqrt(a0 * a0 + a1 * a1)
    cull = (dist2 > cull_radius * cull_radius) & (b < -(na * u_bound))
    kept = np.nonzero(~cull)[0]
    nk = kept.shape[0]

    A = np.empty((nk + nex, 2), dtype=np.float64)
    bb = np.empty(nk + nex, dtype=np.float64)
    A[:nk, 0] = a0[kept]
    A[:nk, 1] = a1[kept]
    bb[:nk] = b[kept]
    A[nk:, 0] = ex_ax
    A[nk:, 1] = ex_ay
    bb[nk:] = ex_b

    ux, uy, status, l0, l1 = qp_project(urx, ury, A, bb, tol)
    if status < 0:
        return urx, ury, -1, -1, -1

    if nk < ncirc:
        culled = np.nonzero(cull)[0]
        viol = (a0[culled] * ux + a1[culled] * uy) < (b[culled] - tol)
        if bool(np.any(viol)):
            Af = np.empty((ncirc + nex, 2), dtype=np.float64)
            bf = np.empty(ncirc + nex, dtype=np.float64)
            Af[:ncirc, 0] = a0
            Af[:ncirc, 1] = a1
            bf[:ncirc] = b
            Af[ncirc:, 0] = ex_ax
            Af[ncirc:, 1] = ex_ay
            bf[ncirc:] = ex_b
            ux, uy, status, l0, l1 = qp_project(urx, ury, Af, bf, tol)
            if status < 0:
                return urx, ury, -1, -1, -1
            return ux, uy, status, l0, l1

    c0 = -1
    c1 = -1
    if l0 >= 0:
        c0 = int(kept[l0]) if l0 < nk else ncirc + (l0 - nk)
    if l1 >= 0:
        c1 = int(kept[l1]) if l1 < nk else ncirc + (l1 - nk)
    return ux, uy, status, c0, c1
