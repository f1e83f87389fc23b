# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the numeric kernels; twin of ``fallback.py``.

Bit parity contract: every expression here keeps the fallback's operation
order and parenthesization, ties break the same way (strict < updates,
first candidate in enumeration order wins), square roots are the
correctly rounded libm/numpy ones, and setup.py disables FMA contraction
so the compiler cannot fuse multiply-adds into differently rounded ops.
When editing either backend, mirror the change in the other and run the
parity suite.
"""

from libc.math cimport ceil, floor, fabs, sqrt, INFINITY

import numpy as np

cimport numpy as cnp

cnp.import_array()

FAR = 1e30


cdef int _project_c(
    double urx, double ury,
    const double[:, ::1] A, const double[::1] b,
    Py_ssize_t m, double tol,
    double* out_ux, double* out_uy, int* out_a0, int* out_a1,
) noexcept:
    """Core of qp_project; returns the status code and fills the outputs."""
    cdef Py_ssize_t i, j, k
    cdef bint feasible = True
    cdef bint found = False
    cdef bint ok
    cdef double best_d2 = INFINITY
    cdef double bux = urx
    cdef double buy = ury
    cdef int ba0 = -1
    cdef int ba1 = -1
    cdef double ax, ay, nn, t, px, py, dx, dy, d2, det

    for i in range(m):
        if A[i, 0] * urx + A[i, 1] * ury < b[i] - tol:
            feasible = False
            break
    if feasible:
        out_ux[0] = urx
        out_uy[0] = ury
        out_a0[0] = -1
        out_a1[0] = -1
        return 0

    for i in range(m):
        ax = A[i, 0]
        ay = A[i, 1]
        nn = ax * ax + ay * ay
        if nn == 0.0:
            continue
        t = (b[i] - (ax * urx + ay * ury)) / nn
        px = urx + ax * t
        py = ury + ay * t
        ok = True
        for j in range(m):
            if j == i:
                continue
            if A[j, 0] * px + A[j, 1] * py < b[j] - tol:
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
            ba0 = <int>i
            ba1 = -1

    for i in range(m):
        for j in range(i + 1, m):
            det = A[i, 0] * A[j, 1] - A[i, 1] * A[j, 0]
            if det == 0.0:
                continue
            px = (b[i] * A[j, 1] - A[i, 1] * b[j]) / det
            py = (A[i, 0] * b[j] - b[i] * A[j, 0]) / det
            ok = True
            for k in range(m):
                if k == i or k == j:
                    continue
                if A[k, 0] * px + A[k, 1] * py < b[k] - tol:
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
                ba0 = <int>i
                ba1 = <int>j

    if not found:
        out_ux[0] = urx
        out_uy[0] = ury
        out_a0[0] = -1
        out_a1[0] = -1
        return -1
    out_ux[0] = bux
    out_uy[0] = buy
    out_a0[0] = ba0
    out_a1[0] = ba1
    return 1


def qp_project(double urx, double ury, A, b, double tol):
    """Exact projection of (urx, ury) onto the intersection of half-planes.

    Same contract as the fallback: returns (ux, uy, status, a0, a1).
    """
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t m = bv.shape[0]
    cdef double ux = 0.0, uy = 0.0
    cdef int a0 = -1, a1 = -1
    cdef int status = _project_c(urx, ury, Av, bv, m, tol, &ux, &uy, &a0, &a1)
    return ux, uy, status, a0, a1


cdef bint _span_best(
    double fixed_val, long glo, long ghi, double uref_along,
    const double* slopes, const double* rests, const double* b_,
    Py_ssize_t m, double res,
    double* out_d2, long* out_tc,
) noexcept:
    """Best feasible grid index along one ring edge; 0 when the edge is empty."""
    cdef long lo = glo
    cdef long hi = ghi
    cdef long tc
    cdef Py_ssize_t i
    cdef double s, rest, q, tstar, x, dx, dy
    for i in range(m):
        s = slopes[i]
        rest = rests[i]
        if s == 0.0:
            if rest >= b_[i]:
                continue
            return 0
        q = (b_[i] - rest) / s
        if s > 0.0:
            if q > <double>hi:
                return 0
            if q > <double>lo:
                lo = <long>ceil(q)
        else:
            if q < <double>lo:
                return 0
            if q < <double>hi:
                hi = <long>floor(q)
    if lo > hi:
        return 0
    tstar = uref_along / res
    if tstar >= <double>hi:
        tc = hi
    elif tstar <= <double>lo:
        tc = lo
    else:
        tc = <long>ceil(tstar - 0.5)
        if tc < lo:
            tc = lo
        elif tc > hi:
            tc = hi
    x = tc * res
    dx = x - uref_along
    dy = fixed_val
    out_d2[0] = dx * dx + dy * dy
    out_tc[0] = tc
    return 1


def qp_oracle(double urx, double ury, A, b, double box, double res):
    """Nearest feasible grid point to (urx, ury) on [-box, box]^2.

    Expanding-ring scan, closed-form edge intersection, same stop rule and
    tie-breaking as the fallback.  Returns (x, y, found).
    """
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t m = bv.shape[0]
    cdef Py_ssize_t i

    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(5 * m if m > 0 else 1, dtype=np.float64)
    cdef double* ax_ = &scratch[0]
    cdef double* ay_ = ax_ + m
    cdef double* b_ = ay_ + m
    cdef double* row_slopes = b_ + m
    cdef double* col_slopes = row_slopes + m
    cdef double* rests = NULL
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rest_buf = np.empty(m if m > 0 else 1, dtype=np.float64)
    rests = &rest_buf[0]

    for i in range(m):
        ax_[i] = Av[i, 0]
        ay_[i] = Av[i, 1]
        b_[i] = bv[i]
        row_slopes[i] = ax_[i] * res
        col_slopes[i] = ay_[i] * res

    cdef long n = <long>floor(box / res + 0.5)
    cdef long i0 = <long>floor(urx / res + 0.5)
    if i0 < -n:
        i0 = -n
    elif i0 > n:
        i0 = n
    cdef long j0 = <long>floor(ury / res + 0.5)
    if j0 < -n:
        j0 = -n
    elif j0 > n:
        j0 = n
    cdef double off = max(fabs(urx - i0 * res), fabs(ury - j0 * res))

    cdef bint found = False
    cdef double best_d2 = INFINITY
    cdef long best_i = i0
    cdef long best_j = j0

    cdef long kmax = max(i0 + n, n - i0, j0 + n, n - j0)
    cdef long k = 0
    cdef double lb, hit_d2, y, x
    cdef long hit_tc, gj, gi, glo, ghi

    while k <= kmax:
        if found:
            lb = k * res - off
            if lb > 0.0 and lb * lb > best_d2:
                break
        if k == 0:
            # try_row(j0, i0, i0)
            gj = j0
            glo = i0
            ghi = i0
            if not (gj < -n or gj > n):
                if glo < -n:
                    glo = -n
                if ghi > n:
                    ghi = n
                if glo <= ghi:
                    y = gj * res
                    for i in range(m):
                        rests[i] = ay_[i] * y
                    if _span_best(y - ury, glo, ghi, urx, row_slopes, rests, b_, m, res, &hit_d2, &hit_tc):
                        if hit_d2 < best_d2:
                            found = True
                            best_d2 = hit_d2
                            best_i = hit_tc
                            best_j = gj
        else:
            # try_row(j0 - k, i0 - k, i0 + k) then try_row(j0 + k, ...)
            gj = j0 - k
            while True:
                glo = i0 - k
                ghi = i0 + k
                if not (gj < -n or gj > n):
                    if glo < -n:
                        glo = -n
                    if ghi > n:
                        ghi = n
                    if glo <= ghi:
                        y = gj * res
                        for i in range(m):
                            rests[i] = ay_[i] * y
                        if _span_best(y - ury, glo, ghi, urx, row_slopes, rests, b_, m, res, &hit_d2, &hit_tc):
                            if hit_d2 < best_d2:
                                found = True
                                best_d2 = hit_d2
                                best_i = hit_tc
                                best_j = gj
                if gj == j0 + k:
                    break
                gj = j0 + k
            # try_col(i0 - k, j0 - k + 1, j0 + k - 1) then try_col(i0 + k, ...)
            gi = i0 - k
            while True:
                glo = j0 - k + 1
                ghi = j0 + k - 1
                if not (gi < -n or gi > n):
                    if glo < -n:
                        glo = -n
                    if ghi > n:
                        ghi = n
                    if glo <= ghi:
                        x = gi * res
                        for i in range(m):
                            rests[i] = ax_[i] * x
                        if _span_best(x - urx, glo, ghi, ury, col_slopes, rests, b_, m, res, &hit_d2, &hit_tc):
                            if hit_d2 < best_d2:
                                found = True
                                best_d2 = hit_d2
                                best_i = gi
                                best_j = hit_tc
                if gi == i0 + k:
                    break
                gi = i0 + k
        k += 1

    if not found:
        return 0.0, 0.0, 0
    return best_i * res, best_j * res, 1


def ecbf_rows(
    double px, double py, double vx, double vy,
    cx, cy, radii, double uav_radius, double k1, double k2,
):
    """Constraint rows a . u >= b for every obstacle, plus barrier values."""
    cdef double[::1] cxv = np.ascontiguousarray(cx, dtype=np.float64)
    cdef double[::1] cyv = np.ascontiguousarray(cy, dtype=np.float64)
    cdef double[::1] rv = np.ascontiguousarray(radii, dtype=np.float64)
    cdef Py_ssize_t n = cxv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.empty((n, 2), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = np.empty(n, dtype=np.float64)
    cdef double drift = 2.0 * (vx * vx + vy * vy)
    cdef Py_ssize_t i
    cdef double dx, dy, r, hi, lf
    for i in range(n):
        dx = px - cxv[i]
        dy = py - cyv[i]
        r = uav_radius + rv[i]
        hi = (dx * dx + dy * dy) - r * r
        lf = 2.0 * (dx * vx + dy * vy)
        A[i, 0] = 2.0 * dx
        A[i, 1] = 2.0 * dy
        h[i] = hi
        b[i] = -((drift + k1 * hi) + k2 * lf)
    return A, b, h


def contact_min(double px, double py, cx, cy, radii, double uav_radius):
    """Minimum barrier and surface clearance over obstacles.

    Returns (h_min, min_clearance, nearest); sentinels (FAR, FAR, -1) with
    no obstacles.  nearest is the first index attaining the minimum
    clearance, matching the fallback's argmin.
    """
    cdef double[::1] cxv = np.ascontiguousarray(cx, dtype=np.float64)
    cdef double[::1] cyv = np.ascontiguousarray(cy, dtype=np.float64)
    cdef double[::1] rv = np.ascontiguousarray(radii, dtype=np.float64)
    cdef Py_ssize_t n = cxv.shape[0]
    if n == 0:
        return 1e30, 1e30, -1
    cdef double h_min = INFINITY
    cdef double min_clear = INFINITY
    cdef Py_ssize_t idx = 0
    cdef Py_ssize_t i
    cdef double dx, dy, r, dist2, h, clear
    for i in range(n):
        dx = px - cxv[i]
        dy = py - cyv[i]
        r = uav_radius + rv[i]
        dist2 = dx * dx + dy * dy
        h = dist2 - r * r
        clear = sqrt(dist2) - r
        if h < h_min:
            h_min = h
        if clear < min_clear:
            min_clear = clear
            idx = i
    return h_min, min_clear, <int>idx


def safety_filter(
    double px, double py, double vx, double vy, double urx, double ury,
    cx, cy, radii, double uav_radius, double k1, double k2,
    double cull_radius, double u_bound,
    ex_ax, ex_ay, ex_b,
    double tol,
):
    """One control tick: build rows, cull far obstacles, project, verify.

    Same culling rule, verification, and index mapping as the fallback;
    see its docstring for the exactness argument.
    """
    cdef double[::1] cxv = np.ascontiguousarray(cx, dtype=np.float64)
    cdef double[::1] cyv = np.ascontiguousarray(cy, dtype=np.float64)
    cdef double[::1] rv = np.ascontiguousarray(radii, dtype=np.float64)
    cdef double[::1] exaxv = np.ascontiguousarray(ex_ax, dtype=np.float64)
    cdef double[::1] exayv = np.ascontiguousarray(ex_ay, dtype=np.float64)
    cdef double[::1] exbv = np.ascontiguousarray(ex_b, dtype=np.float64)
    cdef Py_ssize_t ncirc = cxv.shape[0]
    cdef Py_ssize_t nex = exbv.shape[0]

    cdef cnp.ndarray[cnp.float64_t, ndim=1] a0_arr = np.empty(ncirc if ncirc > 0 else 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a1_arr = np.empty(ncirc if ncirc > 0 else 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b_arr = np.empty(ncirc if ncirc > 0 else 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] kept_arr = np.empty(ncirc if ncirc > 0 else 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] cull_arr = np.zeros(ncirc if ncirc > 0 else 1, dtype=np.uint8)
    cdef double* a0 = &a0_arr[0]
    cdef double* a1 = &a1_arr[0]
    cdef double* bo = &b_arr[0]
    cdef cnp.int64_t* kept = &kept_arr[0]
    cdef cnp.uint8_t* culled = &cull_arr[0]

    cdef double drift = 2.0 * (vx * vx + vy * vy)
    cdef double cr2 = cull_radius * cull_radius
    cdef Py_ssize_t i, nk = 0
    cdef double dx, dy, r, dist2, h, lf, na
    for i in range(ncirc):
        dx = px - cxv[i]
        dy = py - cyv[i]
        r = uav_radius + rv[i]
        dist2 = dx * dx + dy * dy
        h = dist2 - r * r
        lf = 2.0 * (dx * vx + dy * vy)
        a0[i] = 2.0 * dx
        a1[i] = 2.0 * dy
        bo[i] = -((drift + k1 * h) + k2 * lf)
        na = sqrt(a0[i] * a0[i] + a1[i] * a1[i])
        if dist2 > cr2 and bo[i] < -(na * u_bound):
            culled[i] = 1
        else:
            kept[nk] = i
            nk += 1

    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.empty((nk + nex, 2), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bb = np.empty(nk + nex, dtype=np.float64)
    for i in range(nk):
        A[i, 0] = a0[kept[i]]
        A[i, 1] = a1[kept[i]]
        bb[i] = bo[kept[i]]
    for i in range(nex):
        A[nk + i, 0] = exaxv[i]
        A[nk + i, 1] = exayv[i]
        bb[nk + i] = exbv[i]

    cdef double ux = 0.0, uy = 0.0
    cdef int l0 = -1, l1 = -1
    cdef int status = _project_c(urx, ury, A, bb, nk + nex, tol, &ux, &uy, &l0, &l1)
    if status < 0:
        return urx, ury, -1, -1, -1

    cdef bint any_viol = False
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Af
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bf
    if nk < ncirc:
        for i in range(ncirc):
            if culled[i] and a0[i] * ux + a1[i] * uy < bo[i] - tol:
                any_viol = True
                break
        if any_viol:
            Af = np.empty((ncirc + nex, 2), dtype=np.float64)
            bf = np.empty(ncirc + nex, dtype=np.float64)
            for i in range(ncirc):
                Af[i, 0] = a0[i]
                Af[i, 1] = a1[i]
                bf[i] = bo[i]
            for i in range(nex):
                Af[ncirc + i, 0] = exaxv[i]
                Af[ncirc + i, 1] = exayv[i]
                bf[ncirc + i] = exbv[i]
            status = _project_c(urx, ury, Af, bf, ncirc + nex, tol, &ux, &uy, &l0, &l1)
            if status < 0:
                return urx, ury, -1, -1, -1
            return ux, uy, status, l0, l1

    cdef int c0 = -1
    cdef int c1 = -1
    if l0 >= 0:
        c0 = <int>kept[l0] if l0 < nk else <int>(ncirc + (l0 - nk))
    if l1 >= 0:
        c1 = <int>kept[l1] if l1 < nk else <int>(ncirc + (l1 - nk))
    return ux, uy, status, c0, c1
