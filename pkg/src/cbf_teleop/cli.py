"""Command line front end: run, batch, serve, verify, bench, replay.

Every command exits 0 on success and nonzero after printing a single
``error: <Kind>: <message>`` line on stderr, so wrappers can parse
failures without scraping tracebacks.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .config import (
    ConfigError,
    SessionConfig,
    config_from_dict,
    load_config,
)
from .paradigm import Condition


def _fail(exc: BaseException, code: int = 1) -> "click.exceptions.Exit":
    click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
    return click.exceptions.Exit(code)


def _load_base(config_path) -> SessionConfig:
    if config_path is None:
        return SessionConfig()
    return load_config(config_path)


@click.group()
@click.version_option(version=__version__, prog_name="cbf-teleop")
def main() -> None:
    """Safe shared-autonomy teleoperation workbench."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--condition", type=click.Choice(["na", "hsc", "sa", "hsa"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--operator", "operator_spec", type=str, default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def run(config_path, condition, seed, operator_spec, out_path) -> None:
    """Run one headless trial and print its outcome and metrics."""
    from .session import run_headless

    try:
        cfg = _load_base(config_path)
        overrides = {}
        if condition is not None:
            overrides["condition"] = condition
        if seed is not None:
            overrides["seed"] = seed
        if operator_spec is not None:
            overrides["operator"] = operator_spec
        if out_path is not None:
            overrides["out"] = out_path
        if overrides:
            cfg = config_from_dict(overrides, base=cfg)
        result = run_headless(cfg)
    except Exception as e:  # noqa: BLE001 - single reporting point
        raise _fail(e)

    m = result.metrics
    click.echo(
        f"outcome={result.trial.phase.value} ticks={result.trial.tick} "
        f"duration={m.duration:.2f}s inspected={result.trial.inspected_count}"
    )
    click.echo(
        f"v_avg={m.v_avg:.4f} t_collision={m.t_collision:.4f} "
        f"disagreement={m.disagreement:.6f} h_min={result.summary.h_min:.6f} "
        f"relaxed={result.summary.relaxed_count}"
    )
    if result.trial.failure_cause:
        click.echo(f"failure_cause={result.trial.failure_cause}")
    if result.log_path:
        click.echo(f"log={result.log_path}")


def _expand_sweep(doc: dict) -> list[SessionConfig]:
    """Cross conditions with seeds, cycling operator specs over seeds."""
    if not isinstance(doc, dict):
        raise ConfigError("sweep file root must be a mapping")
    unknown = set(doc) - {"base", "sweep"}
    if unknown:
        raise ConfigError(f"sweep file: unknown keys {sorted(unknown)}")
    base = config_from_dict(doc.get("base", {}))
    sweep = doc.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("sweep: expected a mapping")
    unknown = set(sweep) - {"conditions", "seeds", "operators"}
    if unknown:
        raise ConfigError(f"sweep: unknown keys {sorted(unknown)}")

    conditions = sweep.get("conditions", [base.condition.value])
    seeds = sweep.get("seeds", [base.seed])
    if isinstance(seeds, dict):
        extra = set(seeds) - {"start", "count"}
        if extra:
            raise ConfigError(f"sweep.seeds: unknown keys {sorted(extra)}")
        start = int(seeds.get("start", 0))
        seeds = list(range(start, start + int(seeds["count"])))
    operators = sweep.get("operators", [base.operator])

    import dataclasses

    cases = []
    for cond in conditions:
        for i, seed in enumerate(seeds):
            cases.append(
                dataclasses.replace(
                    base,
                    condition=Condition.parse(str(cond)),
                    seed=int(seed),
                    operator=str(operators[i % len(operators)]),
                    out_path=None,
                )
            )
    return cases


@main.command()
@click.option(
    "--sweep", "sweep_path", required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option(
    "--out-dir", "out_dir", required=True, type=click.Path(file_okay=False)
)
@click.option("--jobs", type=int, default=1, show_default=True)
def batch(sweep_path, out_dir, jobs) -> None:
    """Run a sweep of trials and write per-trial logs plus summary.csv."""
    import yaml

    from .session import run_batch

    try:
        with open(sweep_path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        cases = _expand_sweep(doc)
        if not cases:
            raise ConfigError("sweep expands to zero cases")
        summaries = run_batch(cases, out_dir=out_dir, jobs=jobs)
    except Exception as e:  # noqa: BLE001
        raise _fail(e)

    failures = sum(1 for s in summaries if s.outcome == "failed")
    click.echo(
        f"ran {len(summaries)} trials: "
        f"{sum(1 for s in summaries if s.outcome == 'succeeded')} succeeded, "
        f"{failures} failed, "
        f"{sum(1 for s in summaries if s.outcome not in ('succeeded', 'failed'))} other"
    )
    click.echo(f"summary={Path(out_dir) / 'summary.csv'}")


@main.command()
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
def serve(port, config_path, host) -> None:
    """Serve live sessions over a websocket for the browser cockpit."""
    try:
        cfg = _load_base(config_path)
        from .server import serve_forever

        serve_forever(cfg, host=host, port=port)
    except Exception as e:  # noqa: BLE001
        raise _fail(e)


@main.command()
@click.option("--instances", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=20260822, show_default=True)
def verify(instances, seed) -> None:
    """Run the built-in oracle, property, parity, and determinism suites."""
    from . import _kernels
    from .selfcheck import run_all

    click.echo(f"kernel backend: {_kernels.BACKEND}")
    try:
        results = run_all(instances=instances, seed=seed)
    except Exception as e:  # noqa: BLE001
        raise _fail(e)
    failed = 0
    for name, ok, detail in results:
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failed += 1
    if failed:
        click.echo(f"error: VerificationFailure: {failed} suite(s) failed", err=True)
        sys.exit(1)
    click.echo(f"all {len(results)} suites passed")


@main.command()
@click.option("--ticks", type=int, default=20000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def bench(ticks, seed) -> None:
    """Time the per-tick safety filter on every available kernel backend."""
    from .bench import bench_kernels

    try:
        results = bench_kernels(ticks=ticks, seed=seed)
    except Exception as e:  # noqa: BLE001
        raise _fail(e)
    for r in results:
        click.echo(f"{r.backend:>8}: {r.us_per_tick:8.2f} us/tick ({r.ticks} ticks)")
    if len(results) == 2:
        click.echo(f" speedup: {results[1].us_per_tick / results[0].us_per_tick:.1f}x")


@main.command()
@click.option(
    "--log", "log_path", required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def replay(log_path, out_path) -> None:
    """Re-run a logged trial and check it reproduces the log exactly."""
    from .session import replay_log

    try:
        rep = replay_log(log_path, out_path=out_path)
    except Exception as e:  # noqa: BLE001
        raise _fail(e)
    if rep.identical:
        click.echo(
            f"replayed {rep.replayed}/{rep.total} records identically; "
            f"outcome={rep.result.trial.phase.value}"
        )
    else:
        where = (
            f"record {rep.first_divergence}"
            if rep.first_divergence is not None
            else f"length mismatch ({rep.replayed} vs {rep.total})"
        )
        click.echo(f"error: ReplayDivergence: trajectory diverged at {where}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
