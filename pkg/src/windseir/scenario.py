"""Compile a scenario, run it, and write the run artifacts.

A run directory receives: ``config.yaml`` (the canonical config echo),
``diagnostics.csv`` (streamed, so an aborted run leaves partial output),
``snap_<field>_<k>.csv`` grids at the configured times, and ``report.txt``
with outbreak events, long-time summary and the invariant checks.

The run directory itself is created, but its parent must already exist;
pointing the output at a missing tree is an I/O error, not a silent mkdir -p.
The ``WINDSEIR_OUTPUT_ROOT`` environment variable (or the ``output_root``
argument) prefixes relative output directories.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import Scenario, ScenarioConfig, compile_scenario, write_config
from .diagnostics import (
    AsymptoticSummary,
    OutbreakEvent,
    asymptotic_summary,
    check_host_budget,
    check_monotone_susceptibles,
    detect_outbreak,
)
from .errors import InvariantViolation
from .model import SimState
from .output import DiagnosticsWriter, snapshot_filename, write_report, write_snapshot
from .solver import RunResult, Sinks, run

OUTPUT_ROOT_ENV = "WINDSEIR_OUTPUT_ROOT"

_HOST_COMPARTMENTS = {"host_susceptible": "s", "host_exposed": "e", "host_infected": "i"}


def snapshot_field(state: SimState, scenario: Scenario, field: str) -> np.ndarray:
    """Full-grid view of one snapshot field (host fields scattered, zero off
    their masks)."""
    if field == "vector_infected":
        return state.vi
    if field == "vector_susceptible":
        return state.vs
    comp = _HOST_COMPARTMENTS[field]
    out = scenario.grid.zeros().reshape(-1)
    for mask, host in zip(scenario.masks, state.hosts):
        out[mask.flat] = getattr(host, comp)
    return out.reshape(scenario.grid.shape)


def resolve_run_dir(cfg: ScenarioConfig, output_root: str | Path | None = None) -> Path:
    d = Path(cfg.output.directory)
    if not d.is_absolute():
        root = output_root if output_root is not None else os.environ.get(OUTPUT_ROOT_ENV)
        if root:
            d = Path(root) / d
    return d


@dataclass
class RunArtifacts:
    run_dir: Path
    diagnostics_csv: Path
    snapshots: list[Path]
    report: Path
    config_echo: Path
    result: RunResult
    events: list[OutbreakEvent]
    summary: AsymptoticSummary


def run_scenario(cfg: ScenarioConfig, output_root: str | Path | None = None) -> RunArtifacts:
    scenario = compile_scenario(cfg)
    run_dir = resolve_run_dir(cfg, output_root)
    run_dir.mkdir(exist_ok=True)  # parent must exist
    config_echo = run_dir / "config.yaml"
    write_config(cfg, config_echo)

    snapshots: list[Path] = []
    snap_index = [0]

    def on_snapshot(state: SimState) -> None:
        k = snap_index[0]
        snap_index[0] += 1
        for field in cfg.output.snapshot_fields:
            path = run_dir / snapshot_filename(field, k)
            write_snapshot(path, snapshot_field(state, scenario, field), scenario.grid, state.t)
            snapshots.append(path)

    csv_path = run_dir / "diagnostics.csv"
    ids = tuple(m.subregion.id for m in scenario.masks)
    writer = DiagnosticsWriter(csv_path, ids)
    sinks = Sinks(
        on_record=writer.write,
        on_snapshot=on_snapshot,
        snapshot_times=cfg.output.snapshot_times,
    )
    try:
        result = run(
            scenario.initial,
            scenario.params,
            scenario.grid,
            scenario.masks,
            cfg.solver,
            sinks=sinks,
            policy=cfg.diagnostics.policy,
        )
    except InvariantViolation as exc:
        writer.close()
        write_report(
            run_dir / "report.txt",
            scenario_name=cfg.name,
            events=[],
            summary=None,
            budget=[],
            monotone_flags=[],
            violations=[],
            aborted=str(exc),
        )
        raise
    finally:
        writer.close()

    events = detect_outbreak(result.series, cfg.diagnostics.outbreak_threshold)
    summary = asymptotic_summary(result.series)
    budget = check_host_budget(result.series)
    monotone = check_monotone_susceptibles(result.series)
    report = write_report(
        run_dir / "report.txt",
        scenario_name=cfg.name,
        events=events,
        summary=summary,
        budget=budget,
        monotone_flags=monotone,
        violations=result.violations,
    )
    return RunArtifacts(
        run_dir=run_dir,
        diagnostics_csv=csv_path,
        snapshots=snapshots,
        report=report,
        config_echo=config_echo,
        result=result,
        events=events,
        summary=summary,
    )
