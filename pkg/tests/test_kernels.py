from __future__ import annotations

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from cbf_teleop import _kernels
from cbf_teleop._kernels import fallback
from cbf_teleop.rng import SplitMix64

try:
    from cbf_teleop._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled extension not built")


def _random_rows(rng: SplitMix64, m: int, witness: tuple[float, float]):
    """Half-planes a . u >= b all satisfied at the witness point."""
    wx, wy = witness
    A = np.empty((m, 2))
    b = np.empty(m)
    for i in range(m):
        ang = rng.uniform(0.0, 2.0 * math.pi)
        scale = rng.uniform(0.2, 3.0)
        ax, ay = scale * math.cos(ang), scale * math.sin(ang)
        margin = rng.uniform(0.0, 3.0)
        A[i] = (ax, ay)
        b[i] = ax * wx + ay * wy - margin * math.hypot(ax, ay)
    return A, b


def test_active_backend_is_declared():
    assert _kernels.BACKEND in ("compiled", "python")
    assert _kernels.FAR == fallback.FAR


@needs_core
def test_qp_project_parity():
    rng = SplitMix64(11)
    for _ in range(300):
        urx, ury = rng.uniform(-10, 10), rng.uniform(-10, 10)
        wx, wy = urx + rng.uniform(-5, 5), ury + rng.uniform(-5, 5)
        A, b = _random_rows(rng, 1 + rng.next_u64() % 8, (wx, wy))
        got_c = _core.qp_project(urx, ury, A, b, 1e-9)
        got_py = fallback.qp_project(urx, ury, A, b, 1e-9)
        assert got_c == got_py, f"qp_project diverged: {got_c} vs {got_py}"


@needs_core
def test_qp_oracle_parity():
    rng = SplitMix64(12)
    for _ in range(40):
        urx, ury = rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)
        A, b = _random_rows(rng, 1 + rng.next_u64() % 4, (0.0, 0.0))
        got_c = _core.qp_oracle(urx, ury, A, b, 2.0, 0.05)
        got_py = fallback.qp_oracle(urx, ury, A, b, 2.0, 0.05)
        assert got_c == got_py, f"qp_oracle diverged: {got_c} vs {got_py}"


@needs_core
def test_ecbf_rows_parity():
    rng = SplitMix64(13)
    for _ in range(200):
        n = 1 + rng.next_u64() % 12
        cx = np.array([rng.uniform(-10, 10) for _ in range(n)])
        cy = np.array([rng.uniform(-10, 10) for _ in range(n)])
        radii = np.array([rng.uniform(0.2, 1.5) for _ in range(n)])
        args = (
            rng.uniform(-10, 10), rng.uniform(-10, 10),
            rng.uniform(-3, 3), rng.uniform(-3, 3),
            cx, cy, radii, 0.25, 2.0, 3.0,
        )
        Ac, bc, hc = _core.ecbf_rows(*args)
        Ap, bp, hp = fallback.ecbf_rows(*args)
        assert Ac.tobytes() == Ap.tobytes()
        assert bc.tobytes() == bp.tobytes()
        assert hc.tobytes() == hp.tobytes()


@needs_core
def test_contact_min_parity():
    rng = SplitMix64(14)
    for _ in range(200):
        n = rng.next_u64() % 10
        cx = np.array([rng.uniform(-10, 10) for _ in range(n)])
        cy = np.array([rng.uniform(-10, 10) for _ in range(n)])
        radii = np.array([rng.uniform(0.2, 1.5) for _ in range(n)])
        args = (rng.uniform(-10, 10), rng.uniform(-10, 10), cx, cy, radii, 0.25)
        assert _core.contact_min(*args) == fallback.contact_min(*args)


@needs_core
def test_safety_filter_parity():
    rng = SplitMix64(15)
    ex_ax = np.array([1.0, -1.0])
    ex_ay = np.array([0.0, 0.0])
    for _ in range(200):
        n = 1 + rng.next_u64() % 12
        cx = np.array([rng.uniform(-12, 12) for _ in range(n)])
        cy = np.array([rng.uniform(-12, 12) for _ in range(n)])
        radii = np.array([rng.uniform(0.2, 1.5) for _ in range(n)])
        ex_b = np.array([rng.uniform(-30, -5), rng.uniform(-30, -5)])
        args = (
            rng.uniform(-10, 10), rng.uniform(-10, 10),
            rng.uniform(-3, 3), rng.uniform(-3, 3),
            rng.uniform(-10, 10), rng.uniform(-10, 10),
            cx, cy, radii, 0.25, 2.0, 3.0,
            6.0, 20.0,
            ex_ax, ex_ay, ex_b,
            1e-9,
        )
        assert _core.safety_filter(*args) == fallback.safety_filter(*args)


def test_safety_filter_culling_is_exact():
    # A distant obstacle whose row gets culled must still hold at the output.
    cx = np.array([0.0, 40.0])
    cy = np.array([0.0, 0.0])
    radii = np.array([0.5, 0.5])
    ex = np.empty(0)
    ux, uy, status, _, _ = fallback.safety_filter(
        3.0, 0.0, -1.0, 0.0, -8.0, 0.0,
        cx, cy, radii, 0.25, 2.0, 3.0,
        6.0, 20.0, ex, ex, ex, 1e-9,
    )
    assert status >= 0
    A, b, _ = fallback.ecbf_rows(3.0, 0.0, -1.0, 0.0, cx, cy, radii, 0.25, 2.0, 3.0)
    for i in range(2):
        assert A[i, 0] * ux + A[i, 1] * uy >= b[i] - 1e-9


def test_env_var_selects_backend():
    code = "import cbf_teleop._kernels as k; print(k.BACKEND)"
    for choice, expect in (("py", "python"), ("", None)):
        env = dict(os.environ, CBF_TELEOP_KERNELS=choice)
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        if expect is not None:
            assert out.stdout.strip() == expect


def test_bench_smoke():
    from cbf_teleop.bench import bench_kernels

    results = bench_kernels(ticks=50, seed=0)
    assert {r.backend for r in results} <= {"compiled", "python"}
    assert all(r.us_per_tick > 0.0 for r in results)


def test_env_var_rejects_unknown_value():
    env = dict(os.environ, CBF_TELEOP_KERNELS="fortran")
    out = subprocess.run(
        [sys.executable, "-c", "import cbf_teleop._kernels"],
        env=env,
        capture_output=True,
        text=True,
    )
    assert out.returncode != 0
    assert "CBF_TELEOP_KERNELS" in out.stderr
