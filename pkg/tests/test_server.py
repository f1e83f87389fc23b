from __future__ import annotations

import pytest

pytest.importorskip("fastapi")

from fastapi.testclient import TestClient

from cbf_teleop.dynamics import OperatorCommand
from cbf_teleop.server import (
    PROTOCOL_VERSION,
    ProtocolError,
    _Mailbox,
    _parse_message,
    build_app,
)

from conftest import make_small_config


CFG = make_small_config(tick_cap=40)


def msg(**kw) -> dict:
    kw.setdefault("v", PROTOCOL_VERSION)
    return kw


# -- message parsing --------------------------------------------------------

def test_parse_rejects_missing_version():
    with pytest.raises(ProtocolError):
        _parse_message('{"type": "abort"}', CFG)


def test_parse_rejects_wrong_version():
    with pytest.raises(ProtocolError):
        _parse_message('{"v": "cbf-teleop/0", "type": "abort"}', CFG)


def test_parse_rejects_unknown_type():
    with pytest.raises(ProtocolError):
        _parse_message('{"v": "cbf-teleop/1", "type": "dance"}', CFG)


def test_parse_rejects_bad_json():
    with pytest.raises(ProtocolError):
        _parse_message("{oops", CFG)


def test_parse_start_trial():
    tag, (condition, seed) = _parse_message(
        '{"v": "cbf-teleop/1", "type": "start_trial", "condition": "hsa", "seed": 3}',
        CFG,
    )
    assert tag == "start_trial"
    assert condition.value == "HSA"
    assert seed == 3


def test_parse_input_builds_command():
    tag, (seq, cmd) = _parse_message(
        '{"v": "cbf-teleop/1", "type": "input", "seq": 2, "stylus": [3.0, 0.0],'
        ' "yaw_input": 1, "inspect": true}',
        CFG,
    )
    assert tag == "input"
    assert seq == 2
    assert isinstance(cmd, OperatorCommand)
    assert cmd.stylus == (3.0, 0.0)
    assert cmd.yaw_input == 1
    assert cmd.inspect_pressed


def test_parse_input_rejects_bad_fields():
    with pytest.raises(ProtocolError):
        _parse_message(
            '{"v": "cbf-teleop/1", "type": "input", "seq": 1.5, "stylus": [0, 0]}', CFG
        )
    with pytest.raises(ProtocolError):
        _parse_message(
            '{"v": "cbf-teleop/1", "type": "input", "seq": 1, "stylus": [0, 0],'
            ' "yaw_input": 5}',
            CFG,
        )


# -- mailbox ----------------------------------------------------------------

def test_mailbox_latest_input_wins():
    mb = _Mailbox()
    mb.offer_input(0, OperatorCommand((1.0, 0.0)))
    mb.offer_input(2, OperatorCommand((2.0, 0.0)))
    mb.offer_input(1, OperatorCommand((9.0, 0.0)))  # stale, dropped
    assert mb.take_command().stylus == (2.0, 0.0)


def test_mailbox_inspect_is_edge_consumed():
    mb = _Mailbox()
    mb.offer_input(0, OperatorCommand((0.0, 0.0), 0, True))
    first = mb.take_command()
    assert first.inspect_pressed
    second = mb.take_command()
    assert not second.inspect_pressed


def test_mailbox_holds_last_command():
    mb = _Mailbox()
    mb.offer_input(0, OperatorCommand((3.0, 0.0)))
    mb.take_command()
    # No new input: the held stylus keeps applying.
    assert mb.take_command().stylus == (3.0, 0.0)


# -- end-to-end over a live socket ------------------------------------------

def test_status_endpoint():
    client = TestClient(build_app(CFG, wall_pace=0.0))
    body = client.get("/").json()
    assert body["protocol"] == PROTOCOL_VERSION
    assert body["websocket"] == "/ws"


def test_trial_round_trip_free_run():
    client = TestClient(build_app(CFG, wall_pace=0.0))
    with client.websocket_connect("/ws") as ws:
        ws.send_json(msg(type="start_trial", condition="sa", seed=1))
        first = ws.receive_json()
        assert first["type"] == "trial_start"
        assert first["v"] == PROTOCOL_VERSION
        assert first["config"]["seed"] == 1
        assert first["environment"]["format"] == "cbf-teleop-env/1"

        ticks = []
        while True:
            m = ws.receive_json()
            assert m["v"] == PROTOCOL_VERSION
            if m["type"] == "trial_end":
                # Idle operator: the trial runs out the tick cap.
                assert m["outcome"] == "timeout"
                break
            assert m["type"] == "state"
            ticks.append(m["tick"])
            assert set(m) >= {
                "tick", "t", "x1", "x2", "yaw", "u_ref", "u_cbf",
                "u_applied", "force", "h_min", "targets", "phase",
            }
        # Records carry the pre-step tick index, so a capped trial
        # streams 0 .. tick_cap-1 and then ends.
        assert ticks == list(range(0, CFG.tick_cap))


def test_protocol_error_closes_with_message():
    client = TestClient(build_app(CFG, wall_pace=0.0))
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"type": "abort"})  # missing version
        reply = ws.receive_json()
        assert reply["type"] == "error"
        assert "version" in reply["reason"]


def test_second_trial_on_same_socket():
    small = make_small_config(tick_cap=10)
    client = TestClient(build_app(small, wall_pace=0.0))
    with client.websocket_connect("/ws") as ws:
        for seed in (1, 2):
            ws.send_json(msg(type="start_trial", condition="sa", seed=seed))
            start = ws.receive_json()
            assert start["type"] == "trial_start"
            assert start["config"]["seed"] == seed
            while True:
                m = ws.receive_json()
                if m["type"] == "trial_end":
                    break
