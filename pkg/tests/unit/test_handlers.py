from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from src.wpdiff.adapters.config_file import load_config, parse_config
from src.wpdiff.bootstrap import bootstrap
from src.wpdiff.domain import commands, events
from src.wpdiff.service_layer.handlers import InvalidRequest
from src.wpdiff.service_layer.messagebus import describe
from tests.mock_object import FailingNotifications, FakeExporter, FakeNotifications
from tests.utils import SMALL_ANALYTIC_CONFIG, SMALL_SCHRODINGER_CONFIG


def bootstrap_test_app(notifications=None):
    exporter = FakeExporter()
    notifications = notifications if notifications is not None else [FakeNotifications()]
    return bootstrap(exporter=exporter, notifications=notifications), exporter, notifications


class TestRunPreset:
    def test_exports_and_notifies(self, tmp_path):
        bus, exporter, (notifications,) = bootstrap_test_app()
        bus.handle(commands.RunPreset(name="fig2", out=str(tmp_path), run_id="run-1"))

        record, out_dir = exporter.exported[0]
        assert record.name == "fig2"
        assert out_dir == tmp_path
        destination, event = notifications.sent[0]
        assert destination == "run-1"
        assert isinstance(event, events.RunCompleted)
        assert event.files == [str(tmp_path / "fig2_report.txt")]
        assert event.summary["mass"] == "1.0"

    def test_unknown_preset(self, tmp_path):
        bus, exporter, (notifications,) = bootstrap_test_app()
        with pytest.raises(InvalidRequest, match="unknown preset"):
            bus.handle(commands.RunPreset(name="fig99", out=str(tmp_path), run_id="run-1"))
        assert exporter.exported == []
        assert notifications.sent == []


class TestModes:
    def test_simulate_rejects_analytic_config(self, tmp_path):
        bus, _, _ = bootstrap_test_app()
        config = parse_config(SMALL_ANALYTIC_CONFIG)
        with pytest.raises(InvalidRequest):
            bus.handle(commands.Simulate(config=config, out=str(tmp_path), run_id="r"))

    def test_analytic_rejects_evolution_config(self, tmp_path):
        bus, _, _ = bootstrap_test_app()
        config = parse_config(SMALL_SCHRODINGER_CONFIG)
        with pytest.raises(InvalidRequest):
            bus.handle(commands.Analytic(config=config, out=str(tmp_path), run_id="r"))

    def test_experiment_needs_experiment_mode(self, tmp_path):
        bus, _, _ = bootstrap_test_app()
        config = parse_config(SMALL_SCHRODINGER_CONFIG)
        with pytest.raises(InvalidRequest):
            bus.handle(commands.Experiment(config=config, out=str(tmp_path), run_id="r"))

    def test_analytic_reports_peaks(self, tmp_path):
        bus, exporter, (notifications,) = bootstrap_test_app()
        config = parse_config(SMALL_ANALYTIC_CONFIG)
        bus.handle(commands.Analytic(config=config, out=str(tmp_path), run_id="r"))

        record, _ = exporter.exported[0]
        _, event = notifications.sent[0]
        assert event.peak_count == record.peak_report.count
        assert event.peak_count >= 5
        assert "compare.peak_relative" in event.summary
        assert not any(key.startswith("assumed.") for key in event.summary)

    def test_simulate_records_snapshots(self, tmp_path):
        bus, exporter, _ = bootstrap_test_app()
        config = parse_config(SMALL_SCHRODINGER_CONFIG)
        bus.handle(commands.Simulate(config=config, out=str(tmp_path), run_id="r"))
        record, _ = exporter.exported[0]
        assert [p.label for p in record.profiles] == ["snap_t0.5", "snap"]
        assert record.max_norm_drift < 1e-9


class TestCompare:
    def test_compares_profiles_read_by_the_exporter(self, tmp_path):
        bus, exporter, (notifications,) = bootstrap_test_app()
        x = np.linspace(-5.0, 5.0, 201)
        exporter.profiles = {"a.csv": (x, np.exp(-(x**2))), "b.csv": (x, np.exp(-(x**2)))}
        bus.handle(
            commands.Compare(path_a="a.csv", path_b="b.csv", out=str(tmp_path), run_id="c", name="ab")
        )
        comparison = exporter.comparisons[0]
        assert comparison["name"] == "ab"
        assert comparison["points"] == 201
        assert comparison["metrics"].max_abs == 0.0
        _, event = notifications.sent[0]
        assert event.summary["peaks_a"] == "1"


class TestSweep:
    def test_writes_every_point_with_its_config(self, tmp_path):
        bus, exporter, (notifications,) = bootstrap_test_app()
        config = parse_config(SMALL_SCHRODINGER_CONFIG)
        bus.handle(
            commands.Sweep(
                config=config,
                axes={"packet.q0": [0.5, 1.0]},
                out=str(tmp_path),
                run_id="s",
                threads=2,
            )
        )
        assert len(exporter.exported) == 2
        _, event = notifications.sent[0]
        assert isinstance(event, events.SweepCompleted)
        assert len(event.points) == 2
        for digest in event.points:
            point = load_config(Path(tmp_path) / digest / "config.yaml")
            assert point.packet.q0 in (0.5, 1.0)

    def test_unknown_axis(self, tmp_path):
        bus, exporter, _ = bootstrap_test_app()
        config = parse_config(SMALL_SCHRODINGER_CONFIG)
        with pytest.raises(ValueError):
            bus.handle(
                commands.Sweep(config=config, axes={"grid.colour": [1.0]}, out=str(tmp_path), run_id="s")
            )
        assert exporter.exported == []


class TestNotifications:
    def test_failing_notification_does_not_abort_the_run(self, tmp_path):
        recorder = FakeNotifications()
        bus, exporter, _ = bootstrap_test_app(notifications=[FailingNotifications(), recorder])
        bus.handle(commands.RunPreset(name="fig3", out=str(tmp_path), run_id="run-2"))
        assert len(exporter.exported) == 1
        assert recorder.sent == []

    def test_failure_event_reaches_notifications(self):
        bus, _, (notifications,) = bootstrap_test_app()
        failed = events.RunFailed(run_id="x", name="simulate", exception="PoleError: pole", exit_code=2)
        bus.handle(failed)
        assert notifications.sent == [("x", failed)]


class TestMessageBus:
    def test_describes_runs(self):
        config = parse_config(SMALL_SCHRODINGER_CONFIG)
        assert describe(commands.RunPreset(name="fig4", out="o", run_id="r")) == "preset fig4"
        assert describe(commands.Simulate(config=config, out="o", run_id="r")) == "simulate schrodinger1d"
        sweep = commands.Sweep(config=config, axes={"packet.sigma": [0.5, 1.0]}, out="o", run_id="r")
        assert describe(sweep) == "sweep schrodinger1d over packet.sigma[2]"

    def test_rejects_other_messages(self):
        bus, _, _ = bootstrap_test_app()
        with pytest.raises(TypeError):
            bus.handle("fig2")

    def test_run_error_is_logged_and_raised(self, tmp_path):
        bus, _, _ = bootstrap_test_app()
        with patch("src.wpdiff.service_layer.messagebus.logger") as mock_logger:
            with pytest.raises(InvalidRequest):
                bus.handle(commands.RunPreset(name="fig99", out=str(tmp_path), run_id="run-7"))
        mock_logger.exception.assert_called_once_with("run run-7 aborted: preset fig99")
