"""Live session service: one websocket connection drives one trial loop.

The server owns the control loop.  Clients send saturating stylus inputs
(latest seq wins, a held message persists between arrivals); the loop
ticks at wall pace, streams one State per tick, and logs exactly what a
headless run with the same command stream would log, which is what makes
live sessions replayable offline.

Message framing is JSON text, one object per message, each tagged
with ``type`` and carrying the protocol version under ``v``.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import SessionConfig, config_to_dict
from .dynamics import OperatorCommand, make_command
from .metrics_log import DegenerateTrialError, finalize
from .paradigm import Condition
from .session import TrialEngine, build_environment
from .world import Phase

PROTOCOL_VERSION = "cbf-teleop/1"
MAX_MISSED_TICKS = 5


class ProtocolError(Exception):
    """Client message the server refuses; the reason is sent back verbatim."""


class _Mailbox:
    """Per-connection inbox the tick loop reads once per tick."""

    def __init__(self) -> None:
        self.last_seq = -1
        self.command: Optional[OperatorCommand] = None
        self.inspect_pending = False
        self.start_request: Optional[tuple[str, int]] = None
        self.abort = False
        self.disconnected = False

    def offer_input(self, seq: int, cmd: OperatorCommand) -> None:
        if seq <= self.last_seq:
            return
        self.last_seq = seq
        self.command = cmd
        if cmd.inspect_pressed:
            self.inspect_pending = True

    def take_command(self) -> OperatorCommand:
        """Latest command, with the inspect press consumed as an edge event."""
        cmd = self.command
        if cmd is None:
            return OperatorCommand((0.0, 0.0), 0, False)
        pressed = self.inspect_pending
        self.inspect_pending = False
        if cmd.inspect_pressed != pressed:
            cmd = OperatorCommand(cmd.stylus, cmd.yaw_input, pressed)
            self.command = cmd
        return cmd


def _require_version(msg: dict) -> None:
    if msg.get("v") != PROTOCOL_VERSION:
        raise ProtocolError("version")


def _parse_message(text: str, cfg: SessionConfig) -> tuple[str, Any]:
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed json: {e}") from None
    if not isinstance(msg, dict):
        raise ProtocolError("message must be an object")
    _require_version(msg)
    tag = msg.get("type")
    if tag == "start_trial":
        try:
            condition = Condition.parse(str(msg["condition"]))
            seed = msg["seed"]
        except (KeyError, ValueError) as e:
            raise ProtocolError(f"bad start_trial: {e}") from None
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ProtocolError("bad start_trial: seed must be an integer")
        return "start_trial", (condition, seed)
    if tag == "input":
        try:
            seq = msg["seq"]
            sx, sy = msg["stylus"]
            yaw_input = msg.get("yaw_input", 0)
            inspect = bool(msg.get("inspect", False))
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(f"bad input: {e}") from None
        if not isinstance(seq, int) or isinstance(seq, bool):
            raise ProtocolError("bad input: seq must be an integer")
        if yaw_input not in (-1, 0, 1):
            raise ProtocolError("bad input: yaw_input must be -1, 0, or 1")
        try:
            cmd = make_command((float(sx), float(sy)), cfg.input_map, yaw_input, inspect)
        except (TypeError, ValueError) as e:
            raise ProtocolError(f"bad input: {e}") from None
        return "input", (seq, cmd)
    if tag == "abort":
        return "abort", None
    raise ProtocolError(f"unknown message type {tag!r}")


class LiveSession:
    """Connection handler: reads the mailbox, runs trials, streams state."""

    def __init__(self, cfg: SessionConfig, ws: WebSocket, wall_pace: float):
        self.base_cfg = cfg
        self.ws = ws
        self.wall_pace = wall_pace
        self.mailbox = _Mailbox()
        self.trial_index = 0

    async def send(self, obj: dict) -> None:
        obj["v"] = PROTOCOL_VERSION
        await self.ws.send_text(json.dumps(obj, sort_keys=True, separators=(",", ":")))

    async def send_error(self, reason: str) -> None:
        with contextlib.suppress(Exception):
            await self.send({"type": "error", "reason": reason})

    def _trial_log_path(self) -> Optional[str]:
        base = self.base_cfg.out_path
        if base is None:
            return None
        p = Path(base)
        if self.trial_index == 0:
            return str(p)
        return str(p.with_name(f"{p.stem}_{self.trial_index}{p.suffix}"))

    async def _reader(self) -> None:
        mb = self.mailbox
        try:
            while True:
                text = await self.ws.receive_text()
                tag, payload = _parse_message(text, self.base_cfg)
                if tag == "input":
                    mb.offer_input(*payload)
                elif tag == "start_trial":
                    if mb.start_request is not None:
                        raise ProtocolError("trial already requested")
                    mb.start_request = payload
                elif tag == "abort":
                    mb.abort = True
        except WebSocketDisconnect:
            mb.disconnected = True
        except ProtocolError as e:
            mb.disconnected = True
            await self.send_error(str(e))
            with contextlib.suppress(Exception):
                await self.ws.close()

    async def run(self) -> None:
        reader = asyncio.create_task(self._reader())
        try:
            while not self.mailbox.disconnected:
                if self.mailbox.start_request is None:
                    await asyncio.sleep(0.005)
                    continue
                condition, seed = self.mailbox.start_request
                await self._run_trial(condition, seed)
                self.mailbox.start_request = None
                self.mailbox.abort = False
                self.trial_index += 1
        finally:
            reader.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await reader

    async def _run_trial(self, condition: Condition, seed: int) -> None:
        cfg = replace(self.base_cfg, condition=condition, seed=seed, out_path=None)
        env = build_environment(cfg)
        engine = TrialEngine(cfg, env, self._trial_log_path())
        await self.send(
            {
                "type": "trial_start",
                "config": config_to_dict(cfg),
                "environment": env.to_dict(),
            }
        )

        dt = cfg.dynamics.dt
        paced = self.wall_pace > 0.0
        loop = asyncio.get_running_loop()
        deadline = loop.time() + (dt / self.wall_pace if paced else 0.0)
        mb = self.mailbox
        try:
            while not engine.trial.phase.terminal and engine.trial.tick < cfg.tick_cap:
                if mb.disconnected or mb.abort:
                    engine.stop(Phase.ABORTED)
                    break
                if paced:
                    step_wall = dt / self.wall_pace
                    now = loop.time()
                    if now < deadline:
                        await asyncio.sleep(deadline - now)
                    elif now - deadline > MAX_MISSED_TICKS * step_wall:
                        engine.stop(Phase.ABORTED)
                        await self.send_error("fell behind wall clock, trial aborted")
                        break
                    deadline += step_wall
                else:
                    await asyncio.sleep(0)

                record = engine.tick(mb.take_command())
                try:
                    await self.send(
                        {
                            "type": "state",
                            "tick": record.tick,
                            "t": record.t,
                            "x1": [record.x1[0], record.x1[1]],
                            "x2": [record.x2[0], record.x2[1]],
                            "yaw": record.yaw,
                            "u_ref": [record.u_ref.u[0], record.u_ref.u[1]],
                            "u_cbf": [record.u_cbf.u[0], record.u_cbf.u[1]],
                            "u_applied": [record.u_applied.u[0], record.u_applied.u[1]],
                            "force": [record.force[0], record.force[1]],
                            "h_min": record.h_min,
                            "targets": [
                                [c[0], c[1]] for c in engine.env.targets_remaining()
                            ],
                            "phase": engine.trial.phase.value,
                        }
                    )
                except (WebSocketDisconnect, RuntimeError):
                    mb.disconnected = True
                    engine.stop(Phase.ABORTED)
                    break
            if not engine.trial.phase.terminal:
                engine.stop(Phase.TIMEOUT)
        finally:
            engine.close()

        try:
            metrics = finalize(engine.acc, engine.trial).to_dict()
        except DegenerateTrialError:
            metrics = None
        with contextlib.suppress(Exception):
            await self.send(
                {
                    "type": "trial_end",
                    "outcome": engine.trial.phase.value,
                    "metrics": metrics,
                }
            )


def build_app(cfg: SessionConfig, wall_pace: float = 1.0) -> FastAPI:
    """The ASGI app; wall_pace scales sim time to wall time (0 = free-run)."""
    cfg.validate()
    app = FastAPI(title="cbf-teleop", docs_url=None, redoc_url=None)

    @app.get("/")
    async def status() -> dict:
        return {
            "service": "cbf-teleop",
            "protocol": PROTOCOL_VERSION,
            "websocket": "/ws",
        }

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        session = LiveSession(cfg, ws, wall_pace)
        try:
            await session.run()
        except WebSocketDisconnect:
            pass
        finally:
            with contextlib.suppress(Exception):
                await ws.close()

    return app


def serve_forever(
    cfg: SessionConfig, host: str = "127.0.0.1", port: int = 8765,
    wall_pace: float = 1.0,
) -> None:
    import uvicorn

    uvicorn.run(build_app(cfg, wall_pace), host=host, port=port, log_level="warning")
