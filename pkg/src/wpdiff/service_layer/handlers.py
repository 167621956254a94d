import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List

from loguru import logger

from src.wpdiff.adapters.config_file import dump_config
from src.wpdiff.adapters.exporter import AbstractExporter
from src.wpdiff.adapters.notifications import AbstractNotifications
from src.wpdiff.domain import commands, events, peaks
from src.wpdiff.domain.scenario_model import RunRecord, ScenarioConfig
from src.wpdiff.observability.context import ctx_run_id
from src.wpdiff.service_layer import scenarios

SIMULATION_MODES = ("schrodinger1d", "dirac1d", "experiment")
ANALYTIC_MODES = ("analytic1d", "analytic3d")


class InvalidRequest(ValueError):
    pass


def _summary(record: RunRecord) -> dict:
    summary = {
        key: str(value)
        for key, value in sorted(record.metrics.items())
        if not key.startswith("assumed.")
    }
    if record.comparison is not None:
        summary["compare.max_abs"] = repr(record.comparison.max_abs)
        summary["compare.peak_relative"] = repr(record.comparison.peak_relative)
    return summary


def _completed(record: RunRecord, files: List[str], out: str, run_id: str) -> events.RunCompleted:
    return events.RunCompleted(
        run_id=run_id,
        name=record.name,
        out_dir=str(out),
        files=files,
        wall_clock=record.wall_clock,
        peak_count=None if record.peak_report is None else record.peak_report.count,
        summary=_summary(record),
    )


def _run_and_export(config: ScenarioConfig, out: str, run_id: str, nk, exporter: AbstractExporter) -> None:
    record = scenarios.run_config(config, nk=nk)
    files = exporter.export(record, Path(out))
    exporter.events.append(_completed(record, files, out, run_id))


def simulate(command: commands.Simulate, exporter: AbstractExporter) -> None:
    """
    Evolves a configuration with one of the PDE evolvers and exports it.

    Args:
        command: commands.Simulate: config, output directory and run id.
        exporter: AbstractExporter: where results are written.

    Raises:
        InvalidRequest: if the config mode is not an evolution mode.
    """
    mode = command.config.run.mode
    if mode not in SIMULATION_MODES:
        raise InvalidRequest(f"simulate runs {', '.join(SIMULATION_MODES)}; got {mode}")
    _run_and_export(command.config, command.out, command.run_id, command.nk, exporter)


def analytic(command: commands.Analytic, exporter: AbstractExporter) -> None:
    mode = command.config.run.mode
    if mode not in ANALYTIC_MODES:
        raise InvalidRequest(f"analytic runs {', '.join(ANALYTIC_MODES)}; got {mode}")
    _run_and_export(command.config, command.out, command.run_id, command.nk, exporter)


def experiment(command: commands.Experiment, exporter: AbstractExporter) -> None:
    if command.config.run.mode != "experiment":
        raise InvalidRequest(f"experiment needs run.mode experiment; got {command.config.run.mode}")
    _run_and_export(command.config, command.out, command.run_id, command.nk, exporter)


def run_preset(command: commands.RunPreset, exporter: AbstractExporter) -> None:
    if command.name not in scenarios.preset_names():
        raise InvalidRequest(
            f"unknown preset '{command.name}'; known: {', '.join(scenarios.preset_names())}"
        )
    record = scenarios.run_preset(command.name, nk=command.nk)
    files = exporter.export(record, Path(command.out))
    exporter.events.append(_completed(record, files, command.out, command.run_id))


def compare(command: commands.Compare, exporter: AbstractExporter) -> None:
    """Compares |psi| of two profile files sampled on the same grid."""
    started = time.perf_counter()
    x_a, a = exporter.read_profile(command.path_a)
    x_b, b = exporter.read_profile(command.path_b)
    metrics = peaks.compare_profiles(x_a, a, b, x_b=x_b)
    elapsed = time.perf_counter() - started

    files = exporter.export_comparison(
        command.name, command.path_a, command.path_b, metrics, len(x_a), Path(command.out), elapsed
    )
    exporter.events.append(
        events.RunCompleted(
            run_id=command.run_id,
            name=command.name,
            out_dir=command.out,
            files=files,
            wall_clock=elapsed,
            summary={key: str(value) for key, value in metrics.model_dump().items()},
        )
    )


def sweep(command: commands.Sweep, exporter: AbstractExporter) -> None:
    """
    Runs every point of the cartesian product in a worker pool. Each point
    writes into `<out>/<config digest>/` together with its config.
    """
    started = time.perf_counter()
    points = scenarios.expand_sweep(command.config, command.axes)
    digests = [scenarios.config_digest(p) for p in points]
    if len(set(digests)) != len(digests):
        raise InvalidRequest("sweep contains duplicate points")

    def run_point(point: ScenarioConfig, digest: str) -> str:
        ctx_run_id.set(digest)
        point_dir = Path(command.out) / digest
        record = scenarios.run_config(point, nk=command.nk)
        exporter.export(record, point_dir)
        dump_config(point, point_dir / "config.yaml")
        logger.info(f"sweep point {digest} done")
        return digest

    with ThreadPoolExecutor(max_workers=command.threads) as pool:
        done = list(pool.map(run_point, points, digests))

    exporter.events.append(
        events.SweepCompleted(
            run_id=command.run_id,
            name=command.config.name,
            out_dir=command.out,
            points=done,
            wall_clock=time.perf_counter() - started,
        )
    )


def notify(event: events.Event, notifications: List[AbstractNotifications]) -> None:
    for notification in notifications:
        notification.send(event.run_id, event)


EVENT_HANDLERS = {
    events.RunCompleted: [notify],
    events.RunFailed: [notify],
    events.SweepCompleted: [notify],
}

COMMAND_HANDLERS = {
    commands.Simulate: simulate,
    commands.Analytic: analytic,
    commands.Experiment: experiment,
    commands.RunPreset: run_preset,
    commands.Compare: compare,
    commands.Sweep: sweep,
}
