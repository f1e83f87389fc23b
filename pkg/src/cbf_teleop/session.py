"""Trial execution: the per-tick pipeline, headless runs, batches, replay.

The engine owns the canonical tick ordering.  Each tick maps the operator
command to a desired velocity, derives the reference acceleration, runs
the safety filter, blends per the interaction condition, applies
inspection presses, steps the plant, then advances the trial lifecycle
against the post-step contact report.  The logged record describes the
pre-step state, so a log replays from tick zero by feeding the same
commands back through the same pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .cbf import build_constraints
from .config import SessionConfig, config_from_dict, config_to_dict
from .dynamics import (
    ControlInput,
    OperatorCommand,
    StateVec,
    Vec2,
    compute_u_ref,
    map_stylus_to_desired_velocity,
    step,
)
from .metrics_log import (
    LogWriter,
    Metrics,
    MetricsAccumulator,
    StepRecord,
    TrialSummary,
    accumulate_step,
    finalize,
    read_log,
    write_summary,
)
from .operators import (
    OperatorObservation,
    ReplayExhausted,
    ReplayOperator,
    make_operator,
)
from .paradigm import apply_condition
from .qp import FEAS_TOL, QpStatus, solve_relaxed
from .world import (
    Environment,
    Phase,
    TrialParams,
    TrialState,
    attempt_inspection,
    contact_query,
    end_trial,
    generate_environment,
    update_trial,
    wall_constraints,
    wall_rows,
)

_NO_EXTRAS = (
    np.zeros(0, dtype=np.float64),
    np.zeros(0, dtype=np.float64),
    np.zeros(0, dtype=np.float64),
)


def build_environment(cfg: SessionConfig) -> Environment:
    """The trial's world: an explicit scenario, or generated from the seed."""
    if cfg.scenario is not None:
        return Environment.from_dict(cfg.scenario)
    return generate_environment(cfg.env_params, cfg.seed)


def log_header(cfg: SessionConfig, env: Environment) -> dict:
    """Header payload: the behavioral config plus the exact world instance.

    Embedding the instance makes logs self-contained; replay never has to
    re-generate the world, so a scenario file can move or vanish without
    breaking the log.
    """
    return {"session": config_to_dict(cfg), "environment": env.to_dict()}


class TrialEngine:
    """State machine for one trial; drive it with tick() until terminal."""

    def __init__(self, cfg: SessionConfig, env: Environment, log_path=None):
        cfg.validate()
        env.reset_targets()
        self.cfg = cfg
        self.env = env
        self.state: StateVec = env.spawn_state()
        self.trial = TrialState()
        self.trial_params = TrialParams(
            dt=cfg.dynamics.dt,
            crash_depth=cfg.crash_depth,
            target_count=len(env.targets),
            hover_speed_max=cfg.hover_speed_max,
        )
        self.acc = MetricsAccumulator()
        self.relaxed_count = 0
        self.force_prev: Vec2 = (0.0, 0.0)
        self._contact = contact_query(self.state.x1, env)
        self.h_min_trial = self._contact.h_min
        self.writer = (
            LogWriter(log_path, log_header(cfg, env)) if log_path is not None else None
        )
        self.log_path = log_path

    def observation(self) -> OperatorObservation:
        return OperatorObservation(
            state=self.state,
            force=self.force_prev,
            targets_remaining=self.env.targets_remaining(),
            tick=self.trial.tick,
        )

    def _solve_relaxed(self, u_ref: ControlInput) -> ControlInput:
        """Slow path for an infeasible tick: shared-slack relaxation."""
        constraints = build_constraints(
            self.state, self.env.obstacles, self.env.uav_radius, self.cfg.gains
        )
        if self.cfg.wall_constraints:
            constraints = constraints + wall_constraints(
                self.state, self.env, self.cfg.gains
            )
        sol = solve_relaxed(u_ref, constraints, penalty=self.cfg.penalty)
        self.relaxed_count += 1
        return sol.u

    def tick(self, cmd: OperatorCommand) -> StepRecord:
        """Run one control tick and return its log record."""
        cfg = self.cfg
        env = self.env
        state = self.state
        trial0 = self.trial
        t = trial0.tick * cfg.dynamics.dt

        x2d = map_stylus_to_desired_velocity(cmd, state.yaw, cfg.input_map)
        u_ref = compute_u_ref(x2d, state.x2, cfg.dynamics)

        if cfg.wall_constraints:
            extras = wall_rows(state, env, cfg.gains)
        else:
            extras = _NO_EXTRAS
        ux, uy, code, _, _ = _kernels.safety_filter(
            state.x1[0], state.x1[1], state.x2[0], state.x2[1],
            u_ref.u[0], u_ref.u[1],
            env.cx, env.cy, env.radii, env.uav_radius,
            cfg.gains.k1, cfg.gains.k2,
            cfg.cull_radius, cfg.dynamics.u_max,
            extras[0], extras[1], extras[2],
            FEAS_TOL,
        )
        if code < 0:
            u_cbf = self._solve_relaxed(u_ref)
            qp_status = QpStatus.RELAXED
        elif code == 0:
            u_cbf = u_ref
            qp_status = QpStatus.UNCONSTRAINED
        else:
            u_cbf = ControlInput((ux, uy))
            qp_status = QpStatus.OPTIMAL

        out = apply_condition(cfg.condition, u_ref, u_cbf, cfg.paradigm)

        record = StepRecord(
            tick=trial0.tick,
            t=t,
            x1=state.x1,
            x2=state.x2,
            yaw=state.yaw,
            operator_command=cmd,
            u_ref=u_ref,
            u_cbf=u_cbf,
            u_applied=out.u_applied,
            force=out.force,
            h_min=self._contact.h_min,
            in_contact=self._contact.in_contact,
            qp_status=qp_status,
            condition=cfg.condition,
        )

        inspections = 0
        if cmd.inspect_pressed and trial0.phase == Phase.RUNNING:
            result = attempt_inspection(state, env, trial0, cfg.hover_speed_max)
            if result.accepted:
                inspections = 1

        new_state = step(state, out.u_applied, cmd.yaw_input, cfg.dynamics)
        contact = contact_query(new_state.x1, env)
        if contact.h_min < self.h_min_trial:
            self.h_min_trial = contact.h_min
        trial1 = update_trial(trial0, x2d, contact, inspections, self.trial_params)

        active = trial0.phase == Phase.RUNNING or (
            trial0.phase == Phase.IDLE and trial1.phase != Phase.IDLE
        )
        if active:
            accumulate_step(self.acc, record, cfg.dynamics.dt)

        self.state = new_state
        self.trial = trial1
        self._contact = contact
        self.force_prev = out.force
        if self.writer is not None:
            self.writer.write(record)
        return record

    def stop(self, phase: Phase) -> None:
        """Terminate a live trial from outside (timeout or abort)."""
        self.trial = end_trial(self.trial, phase, self.trial_params)

    def close(self) -> None:
        if self.writer is not None:
            self.writer.close()
            self.writer = None


@dataclass(frozen=True)
class RunResult:
    """Everything a finished trial leaves behind."""

    trial: TrialState
    metrics: Metrics
    summary: TrialSummary
    log_path: Optional[str]
    records: Optional[list[StepRecord]] = None


def _summarize(engine: TrialEngine, metrics: Metrics) -> TrialSummary:
    cfg = engine.cfg
    return TrialSummary(
        seed=cfg.seed,
        condition=cfg.condition.value,
        operator=cfg.operator,
        outcome=engine.trial.phase.value,
        v_avg=metrics.v_avg,
        t_collision=metrics.t_collision,
        disagreement=metrics.disagreement,
        duration=metrics.duration,
        h_min=engine.h_min_trial,
        relaxed_count=engine.relaxed_count,
        ticks=engine.trial.tick,
        failure_cause=metrics.failure_cause or "",
        log_path="" if engine.log_path is None else str(engine.log_path),
    )


def run_headless(
    cfg: SessionConfig,
    log_path=None,
    operator=None,
    collect: bool = False,
) -> RunResult:
    """Run one trial to termination with a scripted operator.

    log_path overrides cfg.out_path; pass an operator instance to bypass
    the cfg.operator spec string.  With collect=True every StepRecord is
    also kept in memory.
    """
    if log_path is None:
        log_path = cfg.out_path
    env = build_environment(cfg)
    if operator is None:
        operator = make_operator(
            cfg.operator, cfg.input_map, press_speed=0.9 * cfg.hover_speed_max
        )
    engine = TrialEngine(cfg, env, log_path)
    records: Optional[list[StepRecord]] = [] if collect else None
    try:
        while not engine.trial.phase.terminal and engine.trial.tick < cfg.tick_cap:
            try:
                cmd = operator.step(engine.observation())
            except ReplayExhausted:
                engine.stop(Phase.ABORTED)
                break
            record = engine.tick(cmd)
            if records is not None:
                records.append(record)
        if not engine.trial.phase.terminal:
            engine.stop(Phase.TIMEOUT)
    finally:
        engine.close()
    metrics = finalize(engine.acc, engine.trial)
    summary = _summarize(engine, metrics)
    return RunResult(
        trial=engine.trial,
        metrics=metrics,
        summary=summary,
        log_path=None if log_path is None else str(log_path),
        records=records,
    )


def _run_case(args) -> TrialSummary:
    cfg, path = args
    return run_headless(cfg, log_path=path).summary


def run_batch(
    cases: Sequence[SessionConfig],
    out_dir=None,
    jobs: int = 1,
    write_logs: bool = True,
) -> list[TrialSummary]:
    """Run a list of trial configurations, optionally in parallel.

    Results keep the input order regardless of jobs.  With an out_dir,
    each trial logs to a deterministic file name there and the summary
    table is written as summary.csv.
    """
    paths: list[Optional[Path]] = []
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, cfg in enumerate(cases):
            name = f"{i:04d}_{cfg.condition.value}_{cfg.seed}.jsonl"
            paths.append(out / name if write_logs else None)
    else:
        paths = [None] * len(cases)

    work = list(zip(cases, paths))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_run_case, work))
    else:
        summaries = [_run_case(w) for w in work]

    if out_dir is not None:
        write_summary(summaries, Path(out_dir) / "summary.csv")
    return summaries


@dataclass(frozen=True)
class ReplayReport:
    """Replay outcome: the fresh run and where it first left the log, if ever."""

    result: RunResult
    replayed: int
    total: int
    first_divergence: Optional[int]

    @property
    def identical(self) -> bool:
        return self.first_divergence is None and self.replayed == self.total


def replay_log(log_path, out_path=None) -> ReplayReport:
    """Re-run a logged trial from its own header and commands.

    The header's config and environment instance rebuild the session; the
    logged commands drive it.  Every regenerated record is compared
    field-for-field (floats bit-exact) against the logged one.
    """
    header, records = read_log(log_path)
    cfg = config_from_dict(header["session"])
    env = Environment.from_dict(header["environment"])
    operator = ReplayOperator([r.operator_command for r in records])

    engine = TrialEngine(cfg, env, out_path)
    divergence: Optional[int] = None
    replayed = 0
    try:
        while not engine.trial.phase.terminal and engine.trial.tick < cfg.tick_cap:
            try:
                cmd = operator.step(engine.observation())
            except ReplayExhausted:
                engine.stop(Phase.ABORTED)
                break
            rec = engine.tick(cmd)
            if rec != records[replayed]:
                divergence = replayed
                replayed += 1
                break
            replayed += 1
        if not engine.trial.phase.terminal:
            engine.stop(Phase.TIMEOUT)
    finally:
        engine.close()
    metrics = finalize(engine.acc, engine.trial)
    result = RunResult(
        trial=engine.trial,
        metrics=metrics,
        summary=_summarize(engine, metrics),
        log_path=None if out_path is None else str(out_path),
    )
    return ReplayReport(
        result=result,
        replayed=replayed,
        total=len(records),
        first_divergence=divergence,
    )
