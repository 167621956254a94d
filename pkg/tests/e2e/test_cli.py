import unittest
from pathlib import Path
from unittest.mock import patch

import pytest

from src.wpdiff.entrypoints.main import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from src.wpdiff.physics.errors import PoleError
from tests.utils import SMALL_SCHRODINGER_CONFIG, read_csv, write_yaml


class TestCLI:
    @pytest.fixture(autouse=True)
    def workspace(self, tmp_path):
        self.tmp = tmp_path
        self.out = tmp_path / "out"
        self.config = write_yaml(tmp_path / "small.yaml", SMALL_SCHRODINGER_CONFIG)

    def run(self, *argv: str) -> int:
        return main([*argv, "--out", str(self.out)])

    def test_reflection_preset(self):
        assert self.run("preset", "fig2") == EXIT_OK
        assert sorted(p.name for p in self.out.iterdir()) == [
            "fig2_report.txt",
            "fig2_w1.csv",
            "fig2_w2.csv",
        ]
        assert list(read_csv(self.out / "fig2_w1.csv").columns) == ["x", "re", "im", "abs"]

    def test_pattern_preset_through_flag(self):
        assert self.run("preset", "--preset", "fig1") == EXIT_OK
        report = (self.out / "fig1_report.txt").read_text()
        assert "peaks.count=" in report
        assert "compare.peak_relative=" in report
        assert "assumed=preset" in report
        assert (self.out / "fig1_profile.csv").exists()
        assert (self.out / "fig1_asymptotic.csv").exists()

    def test_simulate_writes_snapshots(self, capsys):
        assert self.run("simulate", "--config", str(self.config)) == EXIT_OK
        for name in ("schrodinger1d_snap.csv", "schrodinger1d_snap_t0.5.csv", "schrodinger1d_norm.csv"):
            assert (self.out / name).exists()
        assert "schrodinger1d finished" in capsys.readouterr().err

    def test_malformed_config(self, capsys):
        broken = write_yaml(self.tmp / "broken.yaml", "run: [unclosed\n")
        assert self.run("simulate", "--config", str(broken)) == EXIT_CONFIG
        assert not self.out.exists() or not any(self.out.iterdir())
        assert "failed (exit 1)" in capsys.readouterr().err

    def test_invalid_config_values(self):
        bad = write_yaml(self.tmp / "bad.yaml", SMALL_SCHRODINGER_CONFIG.replace("sigma: 1.0", "sigma: 0.0"))
        assert self.run("simulate", "--config", str(bad)) == EXIT_CONFIG

    def test_wrong_mode_for_subcommand(self):
        assert self.run("analytic", "--config", str(self.config)) == EXIT_CONFIG

    @patch("src.wpdiff.service_layer.scenarios.run_config", side_effect=PoleError("pole on the contour"))
    def test_numerical_failure(self, mock_run, capsys):
        assert self.run("simulate", "--config", str(self.config)) == EXIT_NUMERICAL
        mock_run.assert_called_once()
        assert "PoleError: pole on the contour" in capsys.readouterr().err

    @patch("src.wpdiff.service_layer.scenarios.run_config", side_effect=ZeroDivisionError("float division by zero"))
    def test_unexpected_failure_is_reported(self, mock_run, capsys):
        assert self.run("simulate", "--config", str(self.config)) == EXIT_NUMERICAL
        mock_run.assert_called_once()
        assert "simulate failed (exit 2): ZeroDivisionError: float division by zero" in capsys.readouterr().err

    def test_compare_two_profiles(self):
        assert self.run("simulate", "--config", str(self.config)) == EXIT_OK
        snap = str(self.out / "schrodinger1d_snap.csv")
        assert self.run("compare", snap, snap, "--name", "self") == EXIT_OK
        report = (self.out / "self_report.txt").read_text()
        assert "compare.max_abs=0.0\n" in report

    def test_compare_rejects_different_grids(self):
        assert self.run("simulate", "--config", str(self.config)) == EXIT_OK
        other = write_yaml(self.tmp / "other.yaml", SMALL_SCHRODINGER_CONFIG.replace("nx: 601", "nx: 301"))
        assert main(["simulate", "--config", str(other), "--out", str(self.tmp / "other")]) == EXIT_OK
        a = str(self.out / "schrodinger1d_snap.csv")
        b = str(self.tmp / "other" / "schrodinger1d_snap.csv")
        assert self.run("compare", a, b) == EXIT_CONFIG

    def test_sweep(self):
        code = self.run("sweep", "--config", str(self.config), "--vary", "packet.q0=0.5,1.0", "--threads", "2")
        assert code == EXIT_OK
        points = [p for p in self.out.iterdir() if p.is_dir()]
        assert len(points) == 2
        for point in points:
            assert (Path(point) / "config.yaml").exists()
            assert (Path(point) / "schrodinger1d_report.txt").exists()

    def test_sweep_needs_an_axis(self):
        assert self.run("sweep", "--config", str(self.config)) == EXIT_CONFIG

    def test_unknown_preset(self):
        assert self.run("preset", "fig11") == EXIT_CONFIG

    def test_quadrature_order_floor(self):
        assert self.run("preset", "fig1", "--nk", "10") == EXIT_CONFIG


class TestExitCodes(unittest.TestCase):
    def test_missing_subcommand(self):
        self.assertEqual(main([]), EXIT_CONFIG)

    def test_missing_config_file(self):
        self.assertEqual(main(["simulate", "--config", "/nonexistent/config.yaml"]), EXIT_CONFIG)
