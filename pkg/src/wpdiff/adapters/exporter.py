from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

import numpy as np
import pandas as pd
import yaml
from loguru import logger

from src.wpdiff.config import get_output_config
from src.wpdiff.domain.scenario_model import (
    ComparisonMetrics,
    FieldMap,
    Profile,
    RunRecord,
    ScalarProfile,
    SpinorProfile,
)
from src.wpdiff.utils import populate_template

FLOAT_FORMAT = "%.17g"


class AbstractExporter(ABC):
    """
    AbstractExporter writes run records to an output directory.

    Handlers append events to `events` once their files are written; the
    message bus picks them up through collect_new_events.

    Methods:
        - export(record, out_dir) -> List[str]: Write every artifact of a record.
        - export_comparison(...) -> List[str]: Write a two-profile metrics report.
        - read_profile(path) -> Tuple: Read x and |psi| back from a profile file.
        - collect_new_events(): Collect events raised while handling a command.
    """

    def __init__(self):
        self.events = []

    @abstractmethod
    def export(self, record: RunRecord, out_dir: Path) -> List[str]:
        raise NotImplementedError

    @abstractmethod
    def export_comparison(
        self, name: str, path_a: str, path_b: str, metrics: ComparisonMetrics, points: int, out_dir: Path, wall_clock: float
    ) -> List[str]:
        raise NotImplementedError

    @abstractmethod
    def read_profile(self, path: str) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def collect_new_events(self):
        """
        Collect new events raised by handlers.

        Returns:
            An iterator of events.
        """
        while self.events:
            event = self.events.pop(0)
            yield event


def profile_frame(profile: Profile) -> pd.DataFrame:
    """Column layout of a profile file; rows in ascending coordinate order."""
    if isinstance(profile, ScalarProfile):
        return pd.DataFrame(
            {
                "x": profile.x,
                "re": profile.psi.real,
                "im": profile.psi.imag,
                "abs": np.abs(profile.psi),
            }
        )
    if isinstance(profile, SpinorProfile):
        return pd.DataFrame(
            {
                "x": profile.x,
                "re_u": profile.U.real,
                "im_u": profile.U.imag,
                "re_v": profile.V.real,
                "im_v": profile.V.imag,
                "abs": np.sqrt(np.abs(profile.U) ** 2 + np.abs(profile.V) ** 2),
            }
        )
    if isinstance(profile, FieldMap):
        na, nb = len(profile.a), len(profile.b)
        return pd.DataFrame(
            {
                "x": np.tile(profile.a, nb),
                "y": np.repeat(profile.b, na),
                "abs": profile.amplitude.ravel(),
            }
        )
    raise TypeError(f"unsupported profile type {type(profile).__name__}")


def write_frame(frame: pd.DataFrame, path: Path) -> None:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_profile_csv(profile: Profile, path: Path) -> None:
    write_frame(profile_frame(profile), path)


def write_series_csv(series: Iterable[Tuple[float, float]], columns: Tuple[str, str], path: Path) -> None:
    rows = list(series)
    write_frame(pd.DataFrame(rows, columns=list(columns)), path)


def _flatten(prefix: str, value) -> List[Tuple[str, str]]:
    if isinstance(value, dict):
        lines = []
        for key in sorted(value):
            lines.extend(_flatten(f"{prefix}.{key}" if prefix else key, value[key]))
        return lines
    if isinstance(value, float):
        return [(prefix, repr(value))]
    if isinstance(value, (list, tuple)):
        return [(prefix, ",".join(repr(v) if isinstance(v, float) else str(v) for v in value))]
    return [(prefix, str(value))]


def _comparison_lines(metrics: ComparisonMetrics) -> List[Tuple[str, str]]:
    return _flatten("", metrics.model_dump())


class CsvExporter(AbstractExporter):
    """
    CsvExporter writes profiles as CSV and reports as plain text rendered
    from the report templates.
    """

    def __init__(self, template_path: str = None):
        super().__init__()
        template_path = template_path or get_output_config()["report_template_path"]
        try:
            with open(template_path, "r") as file:
                self.templates: Dict[str, str] = yaml.safe_load(file)
        except FileNotFoundError:
            raise ValueError(f"Report template path not found: {template_path}")

    def export(self, record: RunRecord, out_dir: Path) -> List[str]:
        """
        Writes `{name}_{label}.csv` per profile, the norm and detector series
        when present, and `{name}_report.txt` last.

        Args:
            record: RunRecord: completed run.
            out_dir: Path: target directory, created if missing.

        Returns:
            List[str]: written paths, report last.
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        files = []

        for profile in record.profiles:
            path = out_dir / f"{record.name}_{profile.label}.csv"
            write_profile_csv(profile, path)
            files.append(str(path))

        if record.norm_series:
            path = out_dir / f"{record.name}_norm.csv"
            write_series_csv(record.norm_series, ("t", "norm"), path)
            files.append(str(path))

        if record.detector_series:
            path = out_dir / f"{record.name}_detector.csv"
            write_series_csv(record.detector_series, ("t", "counts"), path)
            files.append(str(path))

        report_path = out_dir / f"{record.name}_report.txt"
        report_path.write_text(self.render_report(record, files), newline="\n")
        files.append(str(report_path))
        logger.info(f"wrote {len(files)} files to {out_dir}")
        return files

    def render_report(self, record: RunRecord, files: List[str] = ()) -> str:
        config_lines, preset_assumptions = [], []
        if record.config is not None:
            config_lines = _flatten(
                "", record.config.model_dump(mode="json", exclude={"assumptions", "preset_name"})
            )
            preset_assumptions = sorted(record.config.assumptions.items())

        assumed_lines, metric_lines = [], []
        for key in sorted(record.metrics):
            value = record.metrics[key]
            if key.startswith("assumed."):
                name = key.removeprefix("assumed.")
                if record.config is not None and name in record.config.assumptions:
                    continue
                assumed_lines.append((name, str(value)))
            else:
                metric_lines.extend(_flatten(key, value))

        report = record.peak_report
        variables = {
            "name": record.name,
            "config_lines": config_lines,
            "assumed_lines": assumed_lines,
            "preset_assumptions": preset_assumptions,
            "norm_samples": len(record.norm_series),
            "norm_drift": repr(record.max_norm_drift),
            "detector_samples": len(record.detector_series),
            "peak_count": None if report is None else report.count,
            "peak_positions": "" if report is None else ",".join(repr(p) for p in report.positions),
            "peak_spacings": "" if report is None else ",".join(repr(s) for s in report.spacings),
            "peak_height_fraction": None if report is None else report.height_fraction,
            "peak_valley_fraction": None if report is None else report.valley_fraction,
            "peak_window": None if report is None else report.window,
            "peak_table": self._peak_table(record),
            "comparison_lines": [] if record.comparison is None else _comparison_lines(record.comparison),
            "metric_lines": metric_lines,
            "files": list(files),
            "wall_clock": f"{record.wall_clock:.3f}",
        }
        return populate_template(self.templates["report"], variables) + "\n"

    @staticmethod
    def _peak_table(record: RunRecord) -> str:
        report = record.peak_report
        if report is None or report.count == 0:
            return ""
        spacing = [None, *report.spacings]
        frame = pd.DataFrame(
            {"peak": range(1, report.count + 1), "position": report.positions, "spacing": spacing}
        )
        return frame.to_markdown(index=False, floatfmt=".6g")

    def export_comparison(
        self,
        name: str,
        path_a: str,
        path_b: str,
        metrics: ComparisonMetrics,
        points: int,
        out_dir: Path,
        wall_clock: float,
    ) -> List[str]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report_path = out_dir / f"{name}_report.txt"
        text = populate_template(
            self.templates["compare"],
            {
                "name": name,
                "path_a": path_a,
                "path_b": path_b,
                "points": points,
                "comparison_lines": _comparison_lines(metrics),
                "wall_clock": f"{wall_clock:.3f}",
            },
        )
        report_path.write_text(text + "\n", newline="\n")
        return [str(report_path)]

    def read_profile(self, path: str) -> Tuple[np.ndarray, np.ndarray]:
        """
        Reads x and abs columns of a scalar or spinor profile file.

        Raises:
            ValueError: if the file lacks the x or abs column.
        """
        frame = pd.read_csv(path, float_precision="round_trip")
        if "x" not in frame.columns or "abs" not in frame.columns:
            raise ValueError(f"{path} is not a profile file (needs x and abs columns)")
        if "y" in frame.columns:
            raise ValueError(f"{path} is a field map; compare takes 1D profiles")
        return frame["x"].to_numpy(), frame["abs"].to_numpy()
