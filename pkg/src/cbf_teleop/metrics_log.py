"""Per-trial metrics and the line-delimited trial log.

Metrics follow three per-tick integrals: path length (for average speed),
time in contact, and the norm of the filter's deviation from the operator
(disagreement).  The last two divide by trial duration at finalization,
so their values do not depend on the tick rate.

The log is JSON-lines: one header object carrying the full configuration
snapshot and a format tag, then one object per control tick.  Floats
serialize through repr, which round-trips IEEE doubles exactly, so
read(write(x)) reproduces every numeric field bit-for-bit and two
identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .dynamics import ControlInput, OperatorCommand, Vec2
from .paradigm import Condition
from .qp import QpStatus
from .world import DegenerateTrialError, TrialState

LOG_FORMAT = "cbf-teleop-log/1"

_DUMP_KW = {"sort_keys": True, "separators": (",", ":"), "allow_nan": False}


class LogFormatError(RuntimeError):
    """The log file is not something this version can read."""


@dataclass(frozen=True)
class StepRecord:
    """Everything about one control tick, enough to re-audit it offline.

    x1/x2/yaw are the state the tick's commands were computed from (before
    the plant step); h_min and in_contact describe that same state.
    """

    tick: int
    t: float
    x1: Vec2
    x2: Vec2
    yaw: float
    operator_command: OperatorCommand
    u_ref: ControlInput
    u_cbf: ControlInput
    u_applied: ControlInput
    force: Vec2
    h_min: float
    in_contact: bool
    qp_status: QpStatus
    condition: Condition


def record_to_obj(r: StepRecord) -> dict:
    return {
        "tick": r.tick,
        "t": r.t,
        "x1": [r.x1[0], r.x1[1]],
        "x2": [r.x2[0], r.x2[1]],
        "yaw": r.yaw,
        "cmd": {
            "stylus": [r.operator_command.stylus[0], r.operator_command.stylus[1]],
            "yaw_input": r.operator_command.yaw_input,
            "inspect": r.operator_command.inspect_pressed,
        },
        "u_ref": [r.u_ref.u[0], r.u_ref.u[1]],
        "u_cbf": [r.u_cbf.u[0], r.u_cbf.u[1]],
        "u_applied": [r.u_applied.u[0], r.u_applied.u[1]],
        "force": [r.force[0], r.force[1]],
        "h_min": r.h_min,
        "in_contact": r.in_contact,
        "qp_status": r.qp_status.value,
        "condition": r.condition.value,
    }


def record_from_obj(obj: dict) -> StepRecord:
    cmd = obj["cmd"]
    return StepRecord(
        tick=int(obj["tick"]),
        t=float(obj["t"]),
        x1=(obj["x1"][0], obj["x1"][1]),
        x2=(obj["x2"][0], obj["x2"][1]),
        yaw=float(obj["yaw"]),
        operator_command=OperatorCommand(
            (cmd["stylus"][0], cmd["stylus"][1]),
            int(cmd["yaw_input"]),
            bool(cmd["inspect"]),
        ),
        u_ref=ControlInput((obj["u_ref"][0], obj["u_ref"][1])),
        u_cbf=ControlInput((obj["u_cbf"][0], obj["u_cbf"][1])),
        u_applied=ControlInput((obj["u_applied"][0], obj["u_applied"][1])),
        force=(obj["force"][0], obj["force"][1]),
        h_min=float(obj["h_min"]),
        in_contact=bool(obj["in_contact"]),
        qp_status=QpStatus(obj["qp_status"]),
        condition=Condition(obj["condition"]),
    )


@dataclass
class MetricsAccumulator:
    """Running integrals over the ticks of one trial."""

    v_integral: float = 0.0
    collision_time: float = 0.0
    disagreement_integral: float = 0.0
    steps: int = 0


def accumulate_step(acc: MetricsAccumulator, record: StepRecord, dt: float) -> MetricsAccumulator:
    """Fold one tick into the running integrals."""
    vx, vy = record.x2
    acc.v_integral += math.sqrt(vx * vx + vy * vy) * dt
    if record.in_contact:
        acc.collision_time += dt
    dx = record.u_cbf.u[0] - record.u_ref.u[0]
    dy = record.u_cbf.u[1] - record.u_ref.u[1]
    acc.disagreement_integral += math.sqrt(dx * dx + dy * dy) * dt
    acc.steps += 1
    return acc


@dataclass(frozen=True)
class Metrics:
    """Per-trial results.

    v_avg [m/s] is path length over duration; t_collision [s] is total
    contact time; disagreement [m/s^2] is the time-averaged norm of
    u_cbf - u_ref.  Only succeeded trials count toward performance
    statistics, but every outcome carries its numbers.
    """

    v_avg: float
    t_collision: float
    disagreement: float
    duration: float
    outcome: str
    failure_cause: Optional[str] = None

    @property
    def performance_valid(self) -> bool:
        return self.outcome == "succeeded"

    def to_dict(self) -> dict:
        return {
            "v_avg": self.v_avg,
            "t_collision": self.t_collision,
            "disagreement": self.disagreement,
            "duration": self.duration,
            "outcome": self.outcome,
            "failure_cause": self.failure_cause,
        }


def finalize(acc: MetricsAccumulator, trial: TrialState) -> Metrics:
    """Close the integrals out against a finished trial."""
    if trial.t_start is None:
        raise DegenerateTrialError("trial never started, no metrics to report")
    if not trial.phase.terminal or trial.t_end is None:
        raise DegenerateTrialError("trial still running, metrics incomplete")
    duration = trial.t_end - trial.t_start
    if duration <= 0.0:
        raise DegenerateTrialError(f"degenerate trial duration {duration}")
    return Metrics(
        v_avg=acc.v_integral / duration,
        t_collision=acc.collision_time,
        disagreement=acc.disagreement_integral / duration,
        duration=duration,
        outcome=trial.phase.value,
        failure_cause=trial.failure_cause,
    )


class LogWriter:
    """Streams one trial to disk: header first, then a line per tick."""

    def __init__(self, path, header: dict):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        obj = {"format": LOG_FORMAT, "config": header}
        self._fh.write(json.dumps(obj, **_DUMP_KW) + "\n")

    def write(self, record: StepRecord) -> None:
        self._fh.write(json.dumps(record_to_obj(record), **_DUMP_KW) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_log(records: Iterable[StepRecord], header: dict, path) -> None:
    """Write a complete trial log in one call."""
    with LogWriter(path, header) as w:
        for r in records:
            w.write(r)


def read_log(path) -> tuple[dict, list[StepRecord]]:
    """Parse a trial log back into (config header, records).

    Raises LogFormatError on a version mismatch, a malformed line (named
    by number), or a file truncated mid-line.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    if not text:
        raise LogFormatError(f"{path}: empty log")
    if not text.endswith("\n"):
        raise LogFormatError(f"{path}: truncated file (unterminated last line)")
    lines = text.split("\n")[:-1]
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise LogFormatError(f"{path}: line 1: malformed header ({e.msg})") from None
    if not isinstance(head, dict) or head.get("format") != LOG_FORMAT:
        raise LogFormatError(
            f"{path}: unsupported log format {head.get('format') if isinstance(head, dict) else head!r}"
        )
    records = []
    for n, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            records.append(record_from_obj(obj))
        except (json.JSONDecodeError, KeyError, IndexError, TypeError, ValueError) as e:
            raise LogFormatError(f"{path}: line {n}: malformed record ({e})") from None
    return head["config"], records


@dataclass(frozen=True)
class TrialSummary:
    """One batch row: identity, outcome, metrics, and safety counters."""

    seed: int
    condition: str
    operator: str
    outcome: str
    v_avg: float
    t_collision: float
    disagreement: float
    duration: float
    h_min: float
    relaxed_count: int
    ticks: int
    failure_cause: str = ""
    log_path: str = ""


SUMMARY_FIELDS = [
    "seed", "condition", "operator", "outcome", "v_avg", "t_collision",
    "disagreement", "duration", "h_min", "relaxed_count", "ticks",
    "failure_cause", "log_path",
]


def write_summary(rows: Iterable[TrialSummary], path) -> None:
    """Tabular per-trial export for downstream analysis."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_FIELDS)
        for r in rows:
            w.writerow([getattr(r, f) for f in SUMMARY_FIELDS])
