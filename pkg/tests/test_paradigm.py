from __future__ import annotations

import math

import pytest

from cbf_teleop.dynamics import ControlInput
from cbf_teleop.paradigm import Condition, ParadigmConfig, apply_condition, compute_force


CFG = ParadigmConfig()
U_REF = ControlInput((0.0, 0.0))
U_CBF = ControlInput((1.5625, 0.0))


def test_parse_accepts_any_case():
    assert Condition.parse("hsa") == Condition.HSA
    assert Condition.parse("NA") == Condition.NA
    assert Condition.parse("Sa") == Condition.SA


def test_parse_rejects_unknown():
    with pytest.raises(ValueError):
        Condition.parse("autopilot")


def test_condition_traits():
    assert not Condition.NA.filtered and not Condition.NA.haptic
    assert not Condition.HSC.filtered and Condition.HSC.haptic
    assert Condition.SA.filtered and not Condition.SA.haptic
    assert Condition.HSA.filtered and Condition.HSA.haptic


def test_force_worked_value():
    f = compute_force(U_REF, U_CBF, CFG)
    assert f == (0.78125, 0.0)


def test_force_clamps_to_f_max():
    f = compute_force(ControlInput((0.0, 0.0)), ControlInput((10.0, 0.0)), CFG)
    assert f[0] == pytest.approx(CFG.f_max, rel=1e-15)
    assert f[1] == 0.0


def test_force_clamp_preserves_direction():
    f = compute_force(ControlInput((0.0, 0.0)), ControlInput((8.0, 6.0)), CFG)
    assert math.hypot(*f) == pytest.approx(CFG.f_max)
    assert f[0] / f[1] == pytest.approx(8.0 / 6.0)


def test_applied_command_is_selected_object():
    # The dispatch hands back the exact object it selected, so logs and
    # audits can rely on bit-equality, not approximate equality.
    for cond in Condition:
        out = apply_condition(cond, U_REF, U_CBF, CFG)
        if cond.filtered:
            assert out.u_applied is U_CBF
        else:
            assert out.u_applied is U_REF


def test_force_only_under_haptic_conditions():
    for cond in Condition:
        out = apply_condition(cond, U_REF, U_CBF, CFG)
        if cond.haptic:
            assert out.force == compute_force(U_REF, U_CBF, CFG)
        else:
            assert out.force == (0.0, 0.0)


def test_paradigm_config_validation():
    ParadigmConfig(kf=0.0)  # no force feedback is a legal setting
    with pytest.raises(ValueError):
        ParadigmConfig(kf=-0.5)
    with pytest.raises(ValueError):
        ParadigmConfig(f_max=0.0)
